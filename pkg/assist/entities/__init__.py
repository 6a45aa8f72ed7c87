"""
Entity models for the ASSIST library.
"""

from .base import Entity
from .data import ResponseScale, Sample, Dataset, ObservedMatrix, rescale_responses
from .model import TraceFunction, LevelGrid, SignSeriesModel, CompletionModel, coefficient_matrix
from .hyperparams import Hyperparams
from .reports import AdmmRecord, LevelReport
