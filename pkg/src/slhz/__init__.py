"""Parity-encoded (SLHZ) spin systems as a classical code: bit-flipping
decoding, channel experiments, rejection-free sampling and the hybrid
anneal-then-decode pipeline."""

__version__ = "0.1.0"
