"""
Logging helpers
"""

import logging
import sys

from config.settings import LOGGER_NAMESPACE

LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


def get_logger(name: str) -> logging.Logger:
    """Module logger under the package namespace"""
    if name.startswith("src."):
        name = name[len("src."):]
    return logging.getLogger(f"{LOGGER_NAMESPACE}.{name}")


def configure_logging(level: int = logging.INFO) -> None:
    """Send package logs to stderr at the given level"""
    root = logging.getLogger(LOGGER_NAMESPACE)
    root.setLevel(level)
    if not any(getattr(h, "_volterra", False) for h in root.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._volterra = True  # type: ignore[attr-defined]
        root.addHandler(handler)
    for handler in root.handlers:
        handler.setLevel(level)
