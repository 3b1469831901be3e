# core/log.py

import datetime

from rich.console import Console

# Reports go to stdout; every diagnostic line goes here.
_console = Console(stderr=True, highlight=False, soft_wrap=True)

# 🔧 Global verbose toggle (set from profiles.yaml or --verbose at runtime)
VERBOSE_LOG = False


def log(stage: str, msg: str) -> None:
    """Simple timestamped console logger."""
    now = datetime.datetime.now().strftime("%H:%M:%S")
    _console.print(f"[{now}] [{stage}] {msg}", markup=False)


def vlog(stage: str, msg: str) -> None:
    """Verbose logger: only prints when VERBOSE_LOG is True."""
    if VERBOSE_LOG:
        log(stage, msg)


def set_verbose(enabled: bool) -> None:
    global VERBOSE_LOG
    VERBOSE_LOG = bool(enabled)
