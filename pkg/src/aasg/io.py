"""On-disk formats: JSON documents, coefficient payloads, run manifests.

A coefficient payload is a directory holding ``catalog.json``, the blocks as
raw little-endian float64 in block-major order (``blocks.bin``) and a
``coefficients.json`` manifest with the shape and problem parameters.
"""
from __future__ import annotations

import json
import subprocess
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InputError
from .galerkin import GpcCoefficients
from .multiindex import IndexCatalog

__all__ = [
    "FORMAT_VERSION",
    "write_json",
    "read_json",
    "save_coefficients",
    "load_coefficients",
    "artifact_version",
    "RunManifest",
]

FORMAT_VERSION = 1


def write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def save_coefficients(directory, coeffs: GpcCoefficients, meta: dict | None = None) -> list[Path]:
    """Write the payload; ``meta`` (grid n, field parameters...) goes into the manifest."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    cat_path, bin_path, man_path = d / "catalog.json", d / "blocks.bin", d / "coefficients.json"
    cat_path.write_text(coeffs.catalog.to_json() + "\n")
    coeffs.blocks.astype("<f8").tofile(bin_path)
    manifest = {
        "format_version": FORMAT_VERSION,
        "N": coeffs.catalog.N,
        "p": coeffs.catalog.p,
        "n_stoch": coeffs.blocks.shape[0],
        "n_phy": coeffs.blocks.shape[1],
        "dtype": "<f8",
        "order": "block-major",
        **(meta or {}),
    }
    write_json(man_path, manifest)
    return [cat_path, bin_path, man_path]


def load_coefficients(directory) -> tuple[GpcCoefficients, dict]:
    d = Path(directory)
    manifest = read_json(d / "coefficients.json")
    if manifest.get("format_version") != FORMAT_VERSION:
        raise InputError(f"unsupported coefficient format {manifest.get('format_version')}")
    catalog = IndexCatalog.from_json((d / "catalog.json").read_text())
    blocks = np.fromfile(d / "blocks.bin", dtype="<f8")
    shape = (manifest["n_stoch"], manifest["n_phy"])
    if blocks.size != shape[0] * shape[1]:
        raise InputError(f"blocks.bin holds {blocks.size} values, manifest says {shape}")
    return GpcCoefficients(catalog, blocks.reshape(shape).astype(float)), manifest


def artifact_version() -> str:
    """Package version with the short commit hash when run from a checkout."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return __version__
    tag = out.stdout.strip()
    return f"{__version__}+g{tag}" if out.returncode == 0 and tag else __version__


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class RunManifest:
    """Record of one command invocation; written last, naming every output."""

    def __init__(self, command: str, config: dict, out_dir):
        self.command = command
        self.config = config
        self.out_dir = Path(out_dir)
        self.started = _now()
        self.outputs: list[Path] = []

    def add(self, *paths) -> None:
        self.outputs.extend(Path(p) for p in paths)

    def write(self) -> Path:
        missing = [str(p) for p in self.outputs if not p.exists()]
        if missing:
            raise InputError(f"manifest names missing outputs: {missing}")
        path = self.out_dir / "manifest.json"
        write_json(
            path,
            {
                "format_version": FORMAT_VERSION,
                "version": artifact_version(),
                "command": self.command,
                "config": self.config,
                "started": self.started,
                "finished": _now(),
                "outputs": [str(p.relative_to(self.out_dir)) for p in self.outputs],
            },
        )
        return path
