"""Genuine multipartite entanglement certification with PPT-mixture witnesses."""

from .linalg import Bipartition, PauliString, bipartitions, partial_transpose
from .witness import (
    DetectionResult,
    Mode,
    ObservableBasis,
    Verdict,
    WitnessCertificate,
    detect,
    detect_fully_ppt,
    detect_gme,
    detect_restricted,
    gme_negativity,
    linear_tolerance,
    verify_certificate,
    volume_estimate,
    white_noise_tolerance,
)

__version__ = "0.1.0"
