"""Zero-shot feature selection with attribute supervision.

``semfs`` holds the selector, ``baselines`` the reference selectors,
``evaluation`` the K-means/ACC/NMI protocol and ``data`` ingestion and the
synthetic generator.
"""
from .data import SyntheticParams, generate_synthetic_zero_shot
from .semfs import SemfsConfig, SelectionResult, fit, rank_features

__all__ = ["SemfsConfig", "SelectionResult", "SyntheticParams", "fit", "generate_synthetic_zero_shot",
           "rank_features"]
