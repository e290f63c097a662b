#!/usr/bin/env python3
"""
File handling for run output directories
"""

import csv
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, List, Sequence, Union

from core.exceptions import OutputError


class OutputDirectory:
    """Writes run artifacts inside one directory; paths may not escape it"""

    def __init__(self, base_path: Union[str, Path]):
        self.base_path = Path(base_path).resolve()
        try:
            self.base_path.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise OutputError(self.base_path, str(e))

    def _validate_path(self, path: Union[str, Path]) -> Path:
        """Validate that path is within the output directory"""
        full_path = (self.base_path / path).resolve()
        if full_path != self.base_path and self.base_path not in full_path.parents:
            raise OutputError(path, f"outside output directory {self.base_path}")
        return full_path

    def write_text(self, path: str, content: str) -> Path:
        """Write via a temp file and rename so readers never see half a file"""
        target = self._validate_path(path)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp_name = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
            with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
                f.write(content)
            os.replace(tmp_name, target)
        except OSError as e:
            raise OutputError(target, str(e))
        return target

    def write_json(self, path: str, data: Any) -> Path:
        return self.write_text(path, json.dumps(data, indent=2, sort_keys=True) + "\n")

    def write_csv(self, path: str, header: Sequence[str], rows: Iterable[Sequence[Any]],
                  comments: Sequence[str] = ()) -> Path:
        lines: List[str] = [f"# {comment}\n" for comment in comments]

        class _Collector:
            def write(self, text):
                lines.append(text)

        writer = csv.writer(_Collector(), lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return self.write_text(path, "".join(lines))


def format_number(value: float, digits: int = 6) -> str:
    """Fixed significant-digit rendering so reruns diff cleanly"""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    return f"{value:.{digits}g}"


def round_significant(value: Any, digits: int = 6) -> Any:
    """Round every float in a nested structure to `digits` significant digits"""
    if isinstance(value, bool) or isinstance(value, int) or value is None or isinstance(value, str):
        return value
    if isinstance(value, float):
        return float(f"{value:.{digits}g}")
    if isinstance(value, dict):
        return {k: round_significant(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_significant(v, digits) for v in value]
    return value
