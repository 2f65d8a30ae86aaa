from __future__ import annotations

from pathlib import Path

import pytest

from labelforge import ExportOptions, load_scene, psfrag_export

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def golden_dir() -> Path:
    return GOLDEN


@pytest.fixture
def scene_of():
    def _load(name: str):
        return load_scene(FIXTURES / f"{name}.scene")
    return _load


@pytest.fixture
def export(tmp_path):
    """Export a fixture scene into tmp_path, returning (eps, tex, registry)."""

    def _export(name: str, opts: ExportOptions = ExportOptions(), hooks=None):
        scene = load_scene(FIXTURES / f"{name}.scene")
        base = tmp_path / name
        if hooks is None:
            return psfrag_export(scene, base, opts)
        return psfrag_export(scene, base, opts, hooks)

    return _export
