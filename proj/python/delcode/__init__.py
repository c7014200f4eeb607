"""Marker-coded deletion channel toolkit (Python bindings)."""

from ._delcode import (
    DelcodeError,
    Estimator,
    Interleaver,
    MarkerConfig,
    Net,
    OneShotDecoder,
    OuterCode,
    brute_force_llrs,
    conv_encode,
    estimate_pd,
    featurize,
    insert_markers,
    llr_to_hard,
    map_detect,
    marker_mask,
    marker_template,
    oracle_check,
    overall_rate,
    run_point,
    strip_marker_llrs,
    sweep_csv,
    transmit,
    viterbi_hdd,
    viterbi_sdd,
)

__all__ = [name for name in dir() if not name.startswith("_")]
