"""Split construction, manifest handling, and split invariants."""

import pytest

from wlann.dataio import Label, RespiratoryEvent, load_manifest, make_splits, write_manifest
from wlann.errors import ValidationError

# Published per-class event counts of the target corpus layout
# (train, intra-patient test, inter-patient test).
REFERENCE_COUNTS = {
    Label.NORMAL: (5159, 688, 1040),
    Label.RHONCHI: (39, 14, 0),
    Label.WHEEZE: (452, 108, 305),
    Label.STRIDOR: (15, 2, 0),
    Label.COARSE_CRACKLE: (49, 14, 3),
    Label.FINE_CRACKLE: (912, 175, 80),
    Label.WHEEZE_AND_CRACKLE: (30, 3, 1),
}
REFERENCE_TOTALS = (6656, 1004, 1429)


def event(recording_id, label=Label.NORMAL, patient=None):
    patient = patient or recording_id.split("_")[0]
    return RespiratoryEvent(recording_id, 0, 100, label, patient)


def build_reference_corpus():
    """One event per recording, patients arranged to satisfy the invariants."""
    events, manifest = [], {}
    counter = 0
    for label, (n_train, n_intra, n_inter) in REFERENCE_COUNTS.items():
        for split, count in (("train", n_train), ("test_intra", n_intra), ("test_inter", n_inter)):
            for _ in range(count):
                # intra-test patients overlap train; inter-test patients never do
                patient = f"q{counter % 37}" if split == "test_inter" else f"p{counter % 61}"
                rec = f"{patient}_{label.value}_{counter}"
                events.append(event(rec, label, patient))
                manifest[rec] = split
                counter += 1
    return events, manifest


class TestMakeSplits:
    def test_reference_totals(self):
        events, manifest = build_reference_corpus()
        train, intra, inter = make_splits(events, manifest)
        assert (len(train), len(intra), len(inter)) == REFERENCE_TOTALS
        for label, expected in REFERENCE_COUNTS.items():
            got = (train.class_counts()[label], intra.class_counts()[label], inter.class_counts()[label])
            assert got == expected

    def test_class_count_conservation(self):
        events, manifest = build_reference_corpus()
        splits = make_splits(events, manifest)
        for label in Label:
            assert sum(s.class_counts()[label] for s in splits) == sum(
                1 for e in events if e.label is label
            )
        assert sum(len(s) for s in splits) == len(events)

    def test_empty_manifest_empty_splits(self):
        train, intra, inter = make_splits([], {})
        assert (len(train), len(intra), len(inter)) == (0, 0, 0)

    def test_inter_patient_leak_rejected(self):
        events = [event("p1_a"), event("p1_b")]
        manifest = {"p1_a": "train", "p1_b": "test_inter"}
        with pytest.raises(ValidationError, match="shares patients"):
            make_splits(events, manifest)

    def test_intra_patient_outside_train_rejected(self):
        events = [event("p1_a"), event("p2_b")]
        manifest = {"p1_a": "train", "p2_b": "test_intra"}
        with pytest.raises(ValidationError, match="absent from training"):
            make_splits(events, manifest)

    def test_unassigned_recording_rejected(self):
        with pytest.raises(ValidationError, match="not assigned"):
            make_splits([event("p1_a")], {})

    def test_patient_disjointness_holds_on_valid_input(self):
        events, manifest = build_reference_corpus()
        train, _, inter = make_splits(events, manifest)
        assert not (train.patient_ids() & inter.patient_ids())


class TestManifestIO:
    def test_round_trip(self, tmp_path):
        assignment = {"p1_a": "train", "p2_b": "test_intra", "q1_c": "test_inter"}
        path = tmp_path / "manifest.tsv"
        write_manifest(path, assignment)
        assert load_manifest(path) == assignment

    def test_short_split_aliases(self, tmp_path):
        path = tmp_path / "manifest.tsv"
        path.write_text("r1 train\nr2 intra\nr3 inter\n")
        loaded = load_manifest(path)
        assert loaded == {"r1": "train", "r2": "test_intra", "r3": "test_inter"}

    def test_duplicate_assignment_rejected(self, tmp_path):
        path = tmp_path / "manifest.tsv"
        path.write_text("r1 train\nr1 inter\n")
        with pytest.raises(ValidationError, match="twice"):
            load_manifest(path)

    def test_unknown_split_rejected(self, tmp_path):
        path = tmp_path / "manifest.tsv"
        path.write_text("r1 validation\n")
        with pytest.raises(ValidationError, match="unknown split"):
            load_manifest(path)

    def test_comments_and_blanks_skipped(self, tmp_path):
        path = tmp_path / "manifest.tsv"
        path.write_text("# header\n\nr1 train\n")
        assert load_manifest(path) == {"r1": "train"}
