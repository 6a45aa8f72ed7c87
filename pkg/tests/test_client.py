import logging

import numpy as np

from assist import Assist, AssistConfig
from assist.client import REPORT_COLUMNS
from assist.entities import Hyperparams, ObservedMatrix


def test_fit_predict_and_reports(client, small_dataset, fast_hp):
    records = []
    model, reports = client.fit(small_dataset, fast_hp, sink=records.append)
    assert records
    predictions = client.predict(model, small_dataset.predictors)
    assert predictions.shape == (30,)
    frame = client.reports_frame(reports)
    assert list(frame.columns) == REPORT_COLUMNS
    assert len(frame) == 3


def test_complete_and_impute(client):
    obs = ObservedMatrix.from_matrix(np.outer(np.arange(1.0, 5.0), np.ones(4)))
    model, reports = client.complete(obs, Hyperparams(H=1, n_starts=1, max_admm_iters=3, max_inner_iters=30))
    assert len(reports) == 3
    assert client.impute(model).shape == (4, 4)


def test_tune_selects_from_grid(client, small_dataset, fast_hp):
    grid = [fast_hp, fast_hp.with_overrides(r=2)]
    table, selected = client.tune(small_dataset, grid, k=3)
    assert len(table) == 2
    assert selected in grid
    _, best = client.tune(small_dataset, grid, k=3, use_one_se=False)
    assert best in grid


def test_config_from_env(monkeypatch):
    monkeypatch.setenv("ASSIST_N_JOBS", "2")
    monkeypatch.setenv("ASSIST_DEBUG", "yes")
    monkeypatch.setenv("ASSIST_LOG_LEVEL", "info")
    config = AssistConfig.from_env()
    assert config.n_jobs == 2 and config.debug
    assert config.log_level == "INFO"


def test_debug_configures_logger_once():
    Assist(debug=True)
    Assist(debug=True)
    logger = logging.getLogger("assist")
    assert logger.level == logging.DEBUG
    assert sum(getattr(h, "_assist_handler", False) for h in logger.handlers) == 1
    Assist(log_level="ERROR")
    assert logger.level == logging.ERROR
    for handler in [h for h in logger.handlers if getattr(h, "_assist_handler", False)]:
        logger.removeHandler(handler)
