import json
import math
import os
import re
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from config.app_config import AppConfig
from extensions.logger import logger
from storage.storage_strategy import StorageStrategy


FLOAT_TOKEN = "__float__:"
_TOKEN_PATTERN = re.compile(r'"' + FLOAT_TOKEN + r'([^"]*)"')


def _float_text(value: float, float_format: str) -> str:
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    return float_format % value


def _tokenize(value: Any, float_format: str) -> Any:
    """Replaces every float by a placeholder string carrying its fixed-format text."""
    if isinstance(value, dict):
        return {str(key): _tokenize(item, float_format) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_tokenize(item, float_format) for item in value]
    if isinstance(value, np.ndarray):
        return _tokenize(value.tolist(), float_format)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return FLOAT_TOKEN + _float_text(float(value), float_format)
    return value


def canonical_json(payload: Any, float_format: str = AppConfig.FLOAT_FORMAT) -> str:
    """
    Serializes payload with sorted keys and every float printed with
    `float_format`, so equal payloads give byte-identical text.
    """
    text = json.dumps(_tokenize(payload, float_format), sort_keys=True, indent=2)
    return _TOKEN_PATTERN.sub(r"\1", text) + "\n"


class LocalFileSystemStorage(StorageStrategy):
    def __init__(self, output_dir: Optional[str] = None) -> None:
        """
        Initializes the storage with a results directory.

        Args:
            output_dir (str): Directory where result files are written.
                              If not provided, defaults to the config value.
        """
        self.output_dir = output_dir or AppConfig.OUTPUT_DIR
        self.float_format = AppConfig.FLOAT_FORMAT

    def save_json(self, name: str, payload: Any) -> str:
        """
        Saves a payload as canonical JSON.

        Args:
            name (str): File name relative to the output directory.
            payload: JSON-compatible data; numpy arrays and scalars are accepted.

        Returns:
            str: Full path of the written file.
        """
        return self._write(name, canonical_json(payload, self.float_format))

    def save_csv(self, name: str, header: Sequence[str], rows: np.ndarray) -> str:
        """
        Saves a numeric table with a header row, every value as `%.12e`.
        """
        full_path = self.make_full_path(name)
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if rows.size == 0:
            rows = np.zeros((0, len(header)))
        try:
            np.savetxt(
                full_path,
                rows,
                fmt=self.float_format,
                delimiter=",",
                header=",".join(header),
                comments="",
            )
            logger.info(f"File saved successfully at: {full_path}")
        except OSError as e:
            logger.error(f"Failed to save file at: {full_path}. Error: {e}")
            raise
        return full_path

    def load_json(self, name: str) -> Any:
        full_path = self.make_full_path(name)
        logger.info(f"Attempting to retrieve file from: {full_path}")
        try:
            with open(full_path, "r", encoding="utf-8") as f:
                return json.load(f)
        except FileNotFoundError:
            logger.error(f"File not found: {full_path}")
            raise

    def load_csv(self, name: str) -> Tuple[List[str], np.ndarray]:
        """
        Reads a table written by `save_csv`.

        Returns:
            Tuple[List[str], np.ndarray]: Column names and a 2-D array of rows.
        """
        full_path = self.make_full_path(name)
        logger.info(f"Attempting to retrieve file from: {full_path}")
        try:
            with open(full_path, "r", encoding="utf-8") as f:
                header = f.readline().strip().split(",")
            data = np.loadtxt(full_path, delimiter=",", skiprows=1, ndmin=2)
        except FileNotFoundError:
            logger.error(f"File not found: {full_path}")
            raise
        return header, data.reshape(-1, len(header))

    def make_full_path(self, name: str) -> str:
        """
        Constructs the full path to the file within the output directory.
        """
        return os.path.join(self.output_dir, name)

    def _write(self, name: str, text: str) -> str:
        full_path = self.make_full_path(name)
        try:
            with open(full_path, "w", encoding="utf-8") as f:
                f.write(text)
            logger.info(f"File saved successfully at: {full_path}")
        except OSError as e:
            logger.error(f"Failed to save file at: {full_path}. Error: {e}")
            raise
        return full_path
