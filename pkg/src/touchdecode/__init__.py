"""Uncertainty-aware probabilistic touch-input decoding.

Fuses noisy touch-location observations (bivariate Gaussians) with per-key
touch models and n-gram language priors to infer intended text. Ships a
simulator, metric suite, verified training-objective numerics, a CLI, and
an interactive typing playground service.
"""

from .decoder import (DecoderConfig, Session, TouchObservation, beam_decode,
                      debounce, greedy_decode, key_likelihoods)
from .gaussians import FusionResult, Gaussian2, fit_gaussian, fuse, log_pdf
from .keyboard import (KeyboardLayout, KeyTouchModel, contact_key,
                       default_layout, fit_key_models, nearest_key)
from .kernels import backend
from .lexicon import Trie
from .losses import (FrameDistribution, LocationPrediction, LossConfig,
                     beta_nll_grad, beta_nll_loss, combined_loss, ctc_grad,
                     ctc_loss, offset_xent_loss)
from .ngram import NgramModel, parse_arpa, score, train, write_arpa
from .simulator import GroundTruthEvent, NoiseProfile, calibrate_sensing, simulate

__version__ = "0.1.0"

__all__ = [
    "Gaussian2", "FusionResult", "log_pdf", "fuse", "fit_gaussian",
    "LossConfig", "FrameDistribution", "LocationPrediction",
    "ctc_loss", "ctc_grad", "offset_xent_loss", "beta_nll_loss",
    "beta_nll_grad", "combined_loss",
    "KeyboardLayout", "KeyTouchModel", "default_layout", "nearest_key",
    "contact_key", "fit_key_models",
    "NgramModel", "train", "score", "parse_arpa", "write_arpa",
    "Trie",
    "TouchObservation", "DecoderConfig", "Session", "key_likelihoods",
    "greedy_decode", "beam_decode", "debounce",
    "NoiseProfile", "GroundTruthEvent", "simulate", "calibrate_sensing",
    "backend",
    "__version__",
]
