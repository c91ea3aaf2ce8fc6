"""Load a corpus directory (paired WAV + JSON annotations + manifest)."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..errors import StorageError, ValidationError
from .audio import AudioClip, load_wav
from .events import RespiratoryEvent, load_annotations, slice_event
from .splits import DatasetSplit, load_manifest, make_splits


@dataclass
class Corpus:
    """All recordings and event annotations under one directory."""

    root: Path
    clips: dict[str, AudioClip]
    events: list[RespiratoryEvent]

    def event_clip(self, event: RespiratoryEvent) -> AudioClip:
        return slice_event(self.clips[event.recording_id], event)


def load_corpus(root: str | Path) -> Corpus:
    """Read every *.json annotation under `root` with its sibling WAV."""
    root = Path(root)
    if not root.is_dir():
        raise StorageError(f"corpus directory {root} does not exist")
    clips: dict[str, AudioClip] = {}
    events: list[RespiratoryEvent] = []
    annotation_paths = sorted(root.glob("*.json"))
    if not annotation_paths:
        raise ValidationError(f"no annotation files found in {root}")
    for annotation_path in annotation_paths:
        wav_path = annotation_path.with_suffix(".wav")
        if not wav_path.exists():
            raise ValidationError(f"annotation {annotation_path} has no matching WAV file")
        recording_events = load_annotations(annotation_path)
        clip = load_wav(wav_path)
        for event in recording_events:
            if event.offset_ms > clip.duration_ms + 1e-9:
                raise ValidationError(
                    f"{event.recording_id}: event offset {event.offset_ms} ms exceeds recording "
                    f"duration {clip.duration_ms:.1f} ms"
                )
        clips[annotation_path.stem] = clip
        events.extend(recording_events)
    return Corpus(root=root, clips=clips, events=events)


def load_corpus_splits(
    root: str | Path, manifest_path: str | Path | None = None
) -> tuple[Corpus, DatasetSplit, DatasetSplit, DatasetSplit]:
    """Load a corpus and partition its events by the manifest.

    The manifest defaults to `<root>/manifest.tsv`.
    """
    root = Path(root)
    corpus = load_corpus(root)
    manifest = load_manifest(manifest_path if manifest_path is not None else root / "manifest.tsv")
    train, intra, inter = make_splits(corpus.events, manifest)
    return corpus, train, intra, inter
