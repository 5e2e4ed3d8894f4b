"""
Logging setup for the CLI and the API process.
"""
import logging

LOG_FORMAT = "%(levelname)s: %(name)s: %(message)s"


def configure_logging(level: int = logging.WARNING) -> None:
    """Install the package log format on the root logger (idempotent)."""
    root = logging.getLogger()
    if not any(getattr(h, "_icardmaps", False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._icardmaps = True
        root.addHandler(handler)
    root.setLevel(level)
    logging.getLogger("icardmaps").setLevel(level)
