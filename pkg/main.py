"""
Main entry point for the tben command-line interface.
"""
import argparse
import logging
import sys
import time
import traceback
from pathlib import Path
from typing import List, Optional, Sequence

# Ensure proper Python version
if sys.version_info < (3, 9):
    print("Error: Python 3.9 or higher is required.")
    sys.exit(1)

# Add the repository root to the path
sys.path.insert(0, str(Path(__file__).resolve().parent))

from pydantic import ValidationError  # noqa: E402

from src.config.settings import get_settings  # noqa: E402
from src.core.errors import ConfigError, TbenError  # noqa: E402
from src.core.registry import registry  # noqa: E402

# Import all tools to register them
import src.tools.synth_tools  # noqa: E402,F401
import src.tools.encode_tools  # noqa: E402,F401
import src.tools.train_tools  # noqa: E402,F401
import src.tools.eval_tools  # noqa: E402,F401
import src.tools.fusion_tools  # noqa: E402,F401
import src.tools.bench_tools  # noqa: E402,F401

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# Handlers added by setup_logging, so repeated calls replace only our own
_installed_handlers: List[logging.Handler] = []


class CliParser(argparse.ArgumentParser):
    """Argument parser that reports usage errors as ConfigError (exit code 1)."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: {message}")


def setup_logging(debug: bool = False) -> None:
    """Configure the root logger: console always, file when TBEN_LOG_FILE is set."""
    settings = get_settings()
    level = logging.DEBUG if (debug or settings.DEBUG) else getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO)

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    for handler in _installed_handlers:
        root_logger.removeHandler(handler)
        handler.close()
    _installed_handlers.clear()

    formatter = logging.Formatter(LOG_FORMAT)
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    _installed_handlers.append(console_handler)

    if settings.LOG_FILE:
        log_path = Path(settings.LOG_FILE)
        try:
            log_path.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(log_path)
            file_handler.setFormatter(formatter)
            _installed_handlers.append(file_handler)
        except OSError as e:
            print(f"Warning: cannot open log file {log_path}: {e}", file=sys.stderr)

    for handler in _installed_handlers:
        root_logger.addHandler(handler)


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(
        prog="tben",
        description="Temporal bilinear encoding toolkit: synthetic data, encoding, training, evaluation, fusion",
    )
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    return registry.build_parser(parser)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, run one subcommand and map errors to exit codes.

    Returns:
        0 on success, 1 for usage/config errors, 2 for data errors,
        3 when a batch command finished with per-item failures
    """
    parser = build_parser()
    start_time = time.time()
    try:
        args = parser.parse_args(argv)
        setup_logging(args.debug)
        return int(args.handler(args) or 0)
    except ValidationError as e:
        error = ConfigError(f"Invalid configuration: {e}")
        logger.error(str(error))
        return error.exit_code
    except TbenError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except SystemExit as e:
        # --help and --version
        return int(e.code or 0)
    except KeyboardInterrupt:
        print("\nInterrupted", file=sys.stderr)
        return 130
    except Exception as e:
        logger.critical(f"Unhandled exception: {e}")
        traceback.print_exc()
        return 2
    finally:
        logger.debug(f"Finished in {time.time() - start_time:.2f}s")


if __name__ == "__main__":
    sys.exit(main())
