"""
ASSIST - nonparametric trace regression for matrix predictors via aggregation
of sign-series classifiers, with matrix completion and a simulation harness.
"""

__version__ = "0.1.0"

from .client import Assist
from .config import AssistConfig
from .constants import LossKind, Metric, ResolutionPreset
from .exceptions import (
    AssistException,
    ValidationException,
    InfeasibleBudgetException,
    SolverDivergenceException,
    ComputationException,
    DecodeException,
    SchemaVersionException,
    EmptyDatasetException,
)
from .grid import GridBuilder

# Import convenience modules for easy access
from .entities import (
    Dataset,
    ObservedMatrix,
    ResponseScale,
    Hyperparams,
    TraceFunction,
    LevelGrid,
    SignSeriesModel,
    CompletionModel,
    LevelReport,
)
from .estimator import fit, predict, predict_many
from .completion import fit_completion, impute
from .tuning import cross_validate, one_se_rule
