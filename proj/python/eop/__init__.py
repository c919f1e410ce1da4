"""Empirical option pricing on raw and Haar low-pass filtered return series."""

from ._core import (
    WaveletDecomposition,
    __version__,
    black_scholes_call,
    detrend,
    filter_series,
    fit_g,
    generate_synthetic,
    haar_forward,
    haar_inverse,
    horizon_histogram,
    log_returns,
    lowpass_filter,
    price_call,
    price_ladder,
    purify,
)

__all__ = [
    "WaveletDecomposition",
    "__version__",
    "black_scholes_call",
    "detrend",
    "filter_series",
    "fit_g",
    "generate_synthetic",
    "haar_forward",
    "haar_inverse",
    "horizon_histogram",
    "log_returns",
    "lowpass_filter",
    "price_call",
    "price_ladder",
    "purify",
]
