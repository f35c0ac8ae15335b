"""Confidence-gated cloud-edge inference with distillation-based edge updates."""

__version__ = "0.1.0"
