"""Thinned finite renewal processes: forward model, simulation and inversion."""

from ._core import (
    FlowRecord,
    RenewalError,
    SampledDataset,
    bootstrap_band_FD,
    bootstrap_sup_ci,
    classify_regime,
    continuation_invert,
    decompound,
    estimate_fw,
    gap_mix_coeffs,
    invert_S,
    read_dataset,
    revert,
    sampled_size_pmf,
    simulate,
    write_dataset,
)

__all__ = [
    "FlowRecord",
    "RenewalError",
    "SampledDataset",
    "bootstrap_band_FD",
    "bootstrap_sup_ci",
    "classify_regime",
    "continuation_invert",
    "decompound",
    "estimate_fw",
    "gap_mix_coeffs",
    "invert_S",
    "read_dataset",
    "revert",
    "sampled_size_pmf",
    "simulate",
    "write_dataset",
]
