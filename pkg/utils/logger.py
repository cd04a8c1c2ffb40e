"""Logging configuration."""
import logging
import logging.handlers
import os
from typing import Optional

from utils.config import APP_NAME


def setup_logging(level=logging.INFO, log_path: Optional[str] = None) -> logging.Logger:
    logger = logging.getLogger(APP_NAME)
    if logger.handlers:
        logger.setLevel(level)
        return logger  # already configured

    logger.setLevel(level)
    fmt = logging.Formatter("%(asctime)s [%(levelname)s] %(name)s: %(message)s")

    if log_path:
        os.makedirs(os.path.dirname(os.path.abspath(log_path)), exist_ok=True)
        # Rotating file handler (5 MB x 3 backups)
        fh = logging.handlers.RotatingFileHandler(
            log_path, maxBytes=5 * 1024 * 1024, backupCount=3, encoding="utf-8"
        )
        fh.setFormatter(fmt)
        logger.addHandler(fh)

    # Console handler; stdout is reserved for results
    ch = logging.StreamHandler()
    ch.setFormatter(fmt)
    logger.addHandler(ch)

    return logger


def get_logger(name: str = APP_NAME) -> logging.Logger:
    return logging.getLogger(name)
