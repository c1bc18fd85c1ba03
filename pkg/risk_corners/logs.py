import logging

from rich.console import Console
from rich.logging import RichHandler

PACKAGE_LOGGER = "risk_corners"


def setup_logging(verbose: bool = False, console: Console | None = None) -> logging.Logger:
    """Attach a rich handler to the package logger.

    Only the CLI calls this; library modules just log through their own
    ``logging.getLogger(__name__)``.
    """
    logger = logging.getLogger(PACKAGE_LOGGER)
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    # Re-running main() in one process (tests) must not stack handlers.
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    logger.addHandler(
        RichHandler(
            console=console or Console(stderr=True),
            show_path=verbose,
            rich_tracebacks=False,
        )
    )
    logger.propagate = False
    return logger
