"""
Constants and enumerations for the ASSIST library.
"""

from enum import Enum


class LossKind(str, Enum):
    """Classification losses. Only the margin losses are training objectives."""
    ZERO_ONE = "zero-one"
    HINGE = "hinge"
    PSI = "psi"


class Metric(str, Enum):
    """Cross-validation metrics."""
    L1 = "l1"
    MISCLASS_AT_HALF = "misclass-at-half"
    MAE = "mae"
    AUC = "auc"


class ResponseKind(str, Enum):
    """Response types for the regression simulator."""
    CONTINUOUS = "continuous"
    BINARY = "binary"


class LinkKind(str, Enum):
    """Link functions h(z) for the regression simulator."""
    SMOOTH = "smooth"
    STEP = "step"


class ActivationPattern(str, Enum):
    """Active-edge patterns for the latent network simulator."""
    CROSS = "cross"
    BLOCK = "block"
    STAR = "star"
    CIRCLE = "circle"


class ResolutionPreset(str, Enum):
    """Choices of the level resolution H for matrix completion."""
    DEFAULT = "default"
    THEORY = "theory"


# File format headers
DATASET_MAGIC = "#assist-dataset"
TRIPLETS_MAGIC = "#assist-triplets"
MODEL_SCHEMA = "assist-model"
FORMAT_VERSION = "v1"
MODEL_VERSION = 1

# Solver defaults
DEFAULT_RHO0 = 1e-2
DEFAULT_RHO_GROWTH = 1.1
DEFAULT_MAX_ADMM_ITERS = 100
DEFAULT_MAX_INNER_ITERS = 500
DEFAULT_PRIMAL_TOL = 1e-3
DEFAULT_N_STARTS = 5
DEFAULT_PROJECTION_ITERS = 20
DEFAULT_CCCP_ROUNDS = 5
DEFAULT_INNER_PATIENCE = 25
# Relative objective decrease that resets the inner patience counter.
INNER_RTOL = 1e-5
MAX_DEFAULT_RESOLUTION = 20
MAX_DEFAULT_LAMBDA = 0.1
