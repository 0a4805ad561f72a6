import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from .config import config

LOGGER_NAME = "svcq"


def setup_logging(
    logger_name: Optional[str] = None,
    log_file: Optional[str] = None,
    level: Optional[str] = None
) -> logging.Logger:
    """Set up logging configuration"""

    log_config = config.get_logging_config()
    log_level = level or log_config['level']
    log_format = log_config['format']

    # Create logger
    logger = logging.getLogger(logger_name or LOGGER_NAME)
    logger.setLevel(getattr(logging, log_level.upper()))

    # Remove existing handlers to avoid duplicates
    for handler in logger.handlers[:]:
        logger.removeHandler(handler)

    formatter = logging.Formatter(log_format)

    # Console handler
    if log_config['console_enabled']:
        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    # File handler
    if log_config['file_enabled'] and log_file:
        # Ensure log directory exists
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger


def get_logger(name: str) -> logging.Logger:
    """Child of the svcq logger, so one setup_logging call covers every module"""
    short_name = name.rsplit('.', 1)[-1]
    return logging.getLogger(f"{LOGGER_NAME}.{short_name}")


def validate_input_file(input_file: Union[str, Path]) -> Path:
    """Validate and return the Path of a CSV input file"""
    input_path = Path(input_file)

    if not input_path.exists():
        raise FileNotFoundError(f"Input file not found: {input_file}")

    if not input_path.suffix.lower() == '.csv':
        raise ValueError(f"Input file must be a CSV file: {input_file}")

    return input_path


def ensure_output_dir(output_dir: Optional[Union[str, Path]] = None) -> Path:
    """Create and return the output directory"""
    data_config = config.get_data_config()
    output_path = Path(output_dir or data_config['output_dir'])
    output_path.mkdir(parents=True, exist_ok=True)
    return output_path


def write_json(path: Union[str, Path], document: Any) -> Path:
    """Write a JSON document with stable key order"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding=config.get_data_config()['encoding']) as f:
        json.dump(document, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def make_rng(seed: Union[int, np.random.Generator, None]) -> np.random.Generator:
    """Counter-based (Philox) generator; a Generator passes through unchanged"""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(0 if seed is None else int(seed)))
