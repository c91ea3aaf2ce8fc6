"""wlann: dual-branch waveform + log-mel respiratory sound classification.

A self-contained desk-scale stack: corpus ingestion, deterministic DSP,
a hand-verified differentiable-numerics substrate, the dual-branch
network with Bi-GRU context modeling, focal-loss training, and the
sensitivity/specificity challenge scoring protocol.
"""

__version__ = "0.1.0"
