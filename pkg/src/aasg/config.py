"""Experiment configuration files.

A config is a sectioned ``key = value`` file::

    [grid]
    n = 32

    [field]
    N = 10
    c = 0.25
    sigma = 0.25
    a0 = 1.0

    [stochastic]
    p = 5
    tol = 1e-3

    [solver]
    tol = 1e-8
    maxit = 2000
    budget_mb = 4096

    [mc]
    samples = 10000
    seed = 0
    threads = 4

Only the keys a command needs are required; missing ones are reported by
their ``section.key`` name.
"""
from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass
from pathlib import Path

from .errors import InputError

__all__ = ["RunConfig", "load_config", "parse_config"]


@dataclass
class RunConfig:
    n: int | None = None
    N: int | None = None
    c: float | None = None
    sigma: float | None = None
    a0: float = 1.0
    p: int | None = None
    tol: float | None = None
    max_order: int | None = None
    solver_tol: float = 1e-8
    maxit: int | None = None
    budget_mb: float = 4096.0
    samples: int | None = None
    seed: int = 0
    threads: int = 1
    # comparison sweeps
    ref_p: int | None = None
    tol_list: tuple[float, ...] = ()
    samples_list: tuple[int, ...] = ()

    def require(self, *names: str) -> None:
        """Raise ``InputError`` naming the first missing key."""
        for name in names:
            if getattr(self, name) is None:
                raise InputError(f"missing config field {_KEY_OF[name]}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tol_list"] = list(self.tol_list)
        d["samples_list"] = list(self.samples_list)
        return d


# attribute -> (section, key, parser)
_SCHEMA = {
    "n": ("grid", "n", int),
    "N": ("field", "N", int),
    "c": ("field", "c", float),
    "sigma": ("field", "sigma", float),
    "a0": ("field", "a0", float),
    "p": ("stochastic", "p", int),
    "tol": ("stochastic", "tol", float),
    "max_order": ("stochastic", "max_order", int),
    "solver_tol": ("solver", "tol", float),
    "maxit": ("solver", "maxit", int),
    "budget_mb": ("solver", "budget_mb", float),
    "samples": ("mc", "samples", int),
    "seed": ("mc", "seed", int),
    "threads": ("mc", "threads", int),
    "ref_p": ("compare", "ref_p", int),
    "tol_list": ("compare", "tol_list", lambda s: tuple(float(v) for v in _split(s))),
    "samples_list": ("compare", "samples_list", lambda s: tuple(int(v) for v in _split(s))),
}
_KEY_OF = {attr: f"{sec}.{key}" for attr, (sec, key, _) in _SCHEMA.items()}


def _split(text: str) -> list[str]:
    return [v for v in text.strip().strip("[]").replace(",", " ").split() if v]


def _unquote(text: str) -> str:
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    return text


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keep "N" distinct from "n"
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise InputError(f"unreadable config: {exc}") from exc
    cfg = RunConfig()
    for attr, (sec, key, conv) in _SCHEMA.items():
        if not cp.has_option(sec, key):
            continue
        raw = _unquote(cp.get(sec, key))
        try:
            setattr(cfg, attr, conv(raw))
        except ValueError as exc:
            raise InputError(f"config field {sec}.{key}: cannot parse {raw!r}") from exc
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    checks = [
        ("n", lambda v: v >= 2, "must be >= 2"),
        ("N", lambda v: v >= 1, "must be >= 1"),
        ("c", lambda v: v > 0, "must be positive"),
        ("sigma", lambda v: v >= 0, "must be non-negative"),
        ("p", lambda v: v >= 1, "must be >= 1"),
        ("tol", lambda v: v > 0, "must be positive"),
        ("solver_tol", lambda v: v > 0, "must be positive"),
        ("maxit", lambda v: v >= 1, "must be >= 1"),
        ("samples", lambda v: v >= 2, "must be >= 2"),
        ("seed", lambda v: 0 <= v < 2**64, "must fit in an unsigned 64-bit integer"),
        ("threads", lambda v: v >= 1, "must be >= 1"),
        ("ref_p", lambda v: v >= 1, "must be >= 1"),
    ]
    for attr, ok, msg in checks:
        v = getattr(cfg, attr)
        if v is not None and not ok(v):
            raise InputError(f"config field {_KEY_OF[attr]} {msg}, got {v}")


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text)
