"""Waveform-domain bandwidth extension (8 kHz -> 16 kHz) with hierarchical RNNs."""

from ._bwe import (
    ConfigError,
    DataError,
    Error,
    FormatError,
    Model,
    NumericError,
    ParameterError,
    ShapeError,
    band_lsd_db,
    downsample2,
    load_wav,
    lsd_db,
    max_latency_ms,
    mfcc,
    mulaw_decode,
    mulaw_encode,
    run_cli,
    save_wav,
    snr_db,
    upsample2,
)

__all__ = [
    "ConfigError", "DataError", "Error", "FormatError", "Model", "NumericError",
    "ParameterError", "ShapeError", "band_lsd_db", "downsample2", "load_wav", "lsd_db",
    "max_latency_ms", "mfcc", "mulaw_decode", "mulaw_encode", "run_cli", "save_wav",
    "snr_db", "upsample2",
]
