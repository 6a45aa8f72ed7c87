"""
Configuration classes for the ASSIST library.
"""

import logging
import os
from typing import Optional

from dotenv import load_dotenv


class AssistConfig:
    """Runtime configuration for the ASSIST library."""

    def __init__(
            self,
            n_jobs: int = 1,
            backend: str = "loky",
            debug: bool = False,
            log_level: str = "WARNING",
            float_format: str = "%.17g"
    ):
        """
        Initialize ASSIST runtime configuration.

        Args:
            n_jobs: Number of parallel workers for per-level fits (-1 uses all cores)
            backend: joblib backend used for parallel fits
            debug: Enable debug logging
            log_level: Logger level when debug is off
            float_format: printf-style format for numbers written to CSV files
        """
        self.n_jobs = n_jobs
        self.backend = backend
        self.debug = debug
        self.log_level = log_level
        self.float_format = float_format

    @classmethod
    def from_env(cls, dotenv_path: Optional[str] = None) -> "AssistConfig":
        """
        Build a configuration from ASSIST_* environment variables.

        A .env file is loaded first when present.

        Args:
            dotenv_path: Explicit path to a .env file

        Returns:
            Configuration instance
        """
        load_dotenv(dotenv_path)
        return cls(
            n_jobs=int(os.getenv("ASSIST_N_JOBS", "1")),
            backend=os.getenv("ASSIST_BACKEND", "loky"),
            debug=os.getenv("ASSIST_DEBUG", "false").strip().lower() in ("1", "true", "yes", "on"),
            log_level=os.getenv("ASSIST_LOG_LEVEL", "WARNING").upper(),
        )

    def configure_logging(self) -> logging.Logger:
        """
        Set up the package logger according to this configuration.

        Returns:
            The "assist" logger
        """
        logger = logging.getLogger("assist")
        if self.debug:
            logger.setLevel(logging.DEBUG)
            if not any(getattr(h, "_assist_handler", False) for h in logger.handlers):
                handler = logging.StreamHandler()
                formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
                handler.setFormatter(formatter)
                handler._assist_handler = True
                logger.addHandler(handler)
        else:
            logger.setLevel(getattr(logging, str(self.log_level).upper(), logging.WARNING))
        return logger
