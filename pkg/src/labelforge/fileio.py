"""Write-to-temp-then-rename file helpers."""

from __future__ import annotations

import os
import shutil
import tempfile
from pathlib import Path


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def make_backup(path: str | Path) -> Path:
    """Copy `path` to `path.bak`, overwriting any previous backup."""
    path = Path(path)
    backup = path.with_name(path.name + ".bak")
    shutil.copyfile(path, backup)
    return backup
