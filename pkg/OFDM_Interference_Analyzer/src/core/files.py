"""Atomic file output."""

from pathlib import Path
from typing import Union
import os
import tempfile


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    """Write text to a sibling temporary file, then rename it over the target"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, temporary = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(handle, "w", encoding="utf-8", newline="\n") as out:
            out.write(text)
        os.replace(temporary, path)
    except BaseException:
        Path(temporary).unlink(missing_ok=True)
        raise
    return path
