"""Verification harness: co-simulation, random generation, suites."""
from .generate import GenConfig, generate, responders_for
from .harness import (
    CosimReport, Divergence, verify_normalization, verify_pruning, verify_separation,
    verify_serialization,
)

__all__ = [
    "CosimReport", "Divergence", "GenConfig", "generate", "responders_for",
    "verify_normalization", "verify_pruning", "verify_separation", "verify_serialization",
]
