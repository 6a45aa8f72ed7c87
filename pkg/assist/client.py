"""
Main client class for the ASSIST library.
"""

from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .completion import fit_completion_with_reports, impute
from .config import AssistConfig
from .constants import Metric
from .entities import AdmmRecord, CompletionModel, Dataset, Hyperparams, LevelReport, ObservedMatrix, SignSeriesModel
from .estimator import fit_with_reports, predict_many
from .exceptions import ValidationException
from .file_client import FileClient
from .repositories import DatasetRepository, MatrixRepository, ModelRepository, TripletRepository
from .tuning import CrossValidationTable, cross_validate, one_se_rule

REPORT_COLUMNS = ["level", "start", "iterations", "converged", "primal_residual", "objective", "diverged_starts"]


class Assist:
    """Main ASSIST client: configuration, file repositories and the fitting operations."""

    def __init__(self, config: Optional[AssistConfig] = None, **kwargs):
        """
        Initialize the ASSIST client.

        Args:
            config: Runtime configuration; built from kwargs when omitted
            **kwargs: AssistConfig options (n_jobs, backend, debug, log_level, float_format)
        """
        self.config = config or AssistConfig(**kwargs)
        self.logger = self.config.configure_logging()
        self.file_client = FileClient(self.config)

        self._init_repositories()

    @classmethod
    def from_env(cls, dotenv_path: Optional[str] = None) -> "Assist":
        """Client configured from ASSIST_* environment variables."""
        return cls(AssistConfig.from_env(dotenv_path))

    def _init_repositories(self):
        """Initialize file repositories."""
        self.datasets = DatasetRepository(self.file_client)
        self.triplets = TripletRepository(self.file_client)
        self.matrices = MatrixRepository(self.file_client)
        self.models = ModelRepository(self.file_client)

    def fit(
        self,
        data: Dataset,
        hp: Hyperparams,
        sink: Optional[Callable[[AdmmRecord], None]] = None,
    ) -> Tuple[SignSeriesModel, List[LevelReport]]:
        """
        Fit a sign-series regression model.

        Args:
            data: Training dataset
            hp: Hyperparameters
            sink: Callable receiving per-iteration ADMM records

        Returns:
            Tuple of (model, per-level reports)
        """
        return fit_with_reports(data, hp, n_jobs=self.config.n_jobs, backend=self.config.backend, sink=sink)

    def predict(self, model: SignSeriesModel, predictors, covariates=None) -> np.ndarray:
        """
        Predict raw responses for a stack of predictors.

        Args:
            model: Fitted model
            predictors: Array (m, d1, d2)
            covariates: Array (m, p) when the model uses covariates

        Returns:
            Predictions, shape (m,)
        """
        return predict_many(model, predictors, covariates)

    def complete(self, obs: ObservedMatrix, hp: Hyperparams) -> Tuple[CompletionModel, List[LevelReport]]:
        """
        Fit a completion model from observed entries.

        Args:
            obs: Observed entries
            hp: Hyperparameters (support budgets are ignored)

        Returns:
            Tuple of (model, per-level reports)
        """
        return fit_completion_with_reports(obs, hp, n_jobs=self.config.n_jobs, backend=self.config.backend)

    def impute(self, model: CompletionModel) -> np.ndarray:
        """
        Impute the full matrix from a completion model.

        Args:
            model: Fitted completion model

        Returns:
            Matrix (d1, d2) on the raw scale
        """
        return impute(model)

    def tune(
        self,
        data: Dataset,
        grid: Sequence[Hyperparams],
        k: int = 5,
        metric: Union[Metric, str] = Metric.L1,
        seed: Optional[int] = 0,
        use_one_se: bool = True,
    ) -> Tuple[CrossValidationTable, Hyperparams]:
        """
        Cross-validate a grid and select hyperparameters.

        Args:
            data: Dataset
            grid: Candidates
            k: Number of folds
            metric: Cross-validation metric
            seed: Fold seed
            use_one_se: Select by the one-standard-error rule instead of the best mean

        Returns:
            Tuple of (table, selected hyperparameters)
        """
        table = cross_validate(data, grid, k, metric, seed, n_jobs=self.config.n_jobs, backend=self.config.backend)
        if use_one_se:
            selected = one_se_rule(table)
        else:
            ok = [row for row in table.rows if row.ok]
            if not ok:
                raise ValidationException("every cross-validation row failed")
            selected = min(ok, key=lambda row: row.mean).hyperparams
        return table, selected

    @staticmethod
    def reports_frame(reports: Sequence[LevelReport]) -> pd.DataFrame:
        """
        Per-level diagnostics as a DataFrame.

        Args:
            reports: Level reports in grid order

        Returns:
            DataFrame with one row per level
        """
        return pd.DataFrame.from_records([report.to_dict() for report in reports], columns=REPORT_COLUMNS)
