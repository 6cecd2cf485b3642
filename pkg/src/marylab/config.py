"""Flat key=value sweep configuration.

One `key = value` pair per line, `#` starts a comment.  Keys mirror the CLI
flags; unknown keys, type mismatches, and invariant violations are load
errors naming the key and line.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

from .arithmetic import Frequency, golden_frequency
from .model import LongRangeSymbol, ModelParams, build_symbol

JOBS = ("greens", "ldt", "dk", "paving", "localize", "orbit")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepConfig:
    omega_raw: str
    omega: float
    A: float
    rho: float
    eps: float
    E_list: tuple[float, ...]
    N_list: tuple[int, ...]
    M_rule: str  # "sqrt" or an explicit positive integer rendered as text
    grid: int
    C0: float
    seed: int
    threads_raw: str
    out_dir: str
    jobs: tuple[str, ...]

    @property
    def threads(self) -> int:
        if self.threads_raw == "auto":
            return min(8, os.cpu_count() or 1)
        return int(self.threads_raw)

    def frequency(self) -> Frequency:
        if self.omega_raw == "golden":
            return golden_frequency(A=self.A)
        return Frequency(self.omega, A=self.A)

    def symbol(self) -> LongRangeSymbol:
        return build_symbol(self.rho, "exp_decay", decay=self.rho, margin=0.99)

    def params(self, energy: float) -> ModelParams:
        return ModelParams(freq=self.frequency(), symbol=self.symbol(),
                           eps=self.eps, E=energy, C0=self.C0)

    def m_window(self, n_sites: int) -> int:
        if self.M_rule == "sqrt":
            return round(math.sqrt(n_sites))
        return int(self.M_rule)


_DEFAULTS = {
    "omega": "golden",
    "A": "2",
    "rho": "1",
    "eps": "0.01",
    "E_list": "0",
    "N_list": "64",
    "M_rule": "sqrt",
    "grid": str(2**14),
    "C0": "5",
    "seed": "42",
    "threads": "auto",
    "out_dir": "out",
    "jobs": ",".join(JOBS),
}


def _parse_lines(text: str) -> dict[str, tuple[str, int]]:
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, value = body.split("=", 1)
        key = key.strip()
        if key not in _DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        raw[key] = (value.strip(), lineno)
    return raw


def _coerce(key: str, value: str, lineno: int, kind):
    try:
        return kind(value)
    except ValueError:
        raise ConfigError(f"line {lineno}: key {key!r} expects {kind.__name__}, got {value!r}") from None


def make_config(overrides: dict[str, str] | None = None) -> SweepConfig:
    """Build a validated config from raw string values (defaults filled in)."""
    raw = dict(_DEFAULTS)
    lines = {k: 0 for k in raw}
    for k, v in (overrides or {}).items():
        if k not in _DEFAULTS:
            raise ConfigError(f"unknown key {k!r}")
        if isinstance(v, tuple):
            raw[k], lines[k] = str(v[0]), int(v[1])
        else:
            raw[k] = str(v)

    omega_raw = raw["omega"]
    if omega_raw == "golden":
        omega = golden_frequency().omega
    else:
        omega = _coerce("omega", omega_raw, lines["omega"], float)
        if not 0.0 < omega < 1.0:
            raise ConfigError(f"line {lines['omega']}: omega must lie in (0,1) or be 'golden'")

    a_exp = _coerce("A", raw["A"], lines["A"], float)
    rho = _coerce("rho", raw["rho"], lines["rho"], float)
    eps = _coerce("eps", raw["eps"], lines["eps"], float)
    e_list = tuple(_coerce("E_list", s.strip(), lines["E_list"], float)
                   for s in raw["E_list"].split(","))
    n_list = tuple(_coerce("N_list", s.strip(), lines["N_list"], int)
                   for s in raw["N_list"].split(","))
    m_rule = raw["M_rule"]
    if m_rule != "sqrt":
        m_val = _coerce("M_rule", m_rule, lines["M_rule"], int)
        if m_val < 1:
            raise ConfigError(f"line {lines['M_rule']}: M_rule must be 'sqrt' or a positive integer")
    grid = _coerce("grid", raw["grid"], lines["grid"], int)
    c0_cap = _coerce("C0", raw["C0"], lines["C0"], float)
    seed = _coerce("seed", raw["seed"], lines["seed"], int)
    threads_raw = raw["threads"]
    if threads_raw != "auto":
        t = _coerce("threads", threads_raw, lines["threads"], int)
        if t < 1:
            raise ConfigError(f"line {lines['threads']}: threads must be 'auto' or >= 1")
    jobs = tuple(s.strip() for s in raw["jobs"].split(",") if s.strip())
    for j in jobs:
        if j not in JOBS:
            raise ConfigError(f"line {lines['jobs']}: unknown job {j!r} (choose from {', '.join(JOBS)})")

    if rho <= 0.0:
        raise ConfigError(f"line {lines['rho']}: rho must be positive")
    if grid < 2**12 or grid & (grid - 1):
        raise ConfigError(f"line {lines['grid']}: grid must be a power of two >= {2**12}")
    symbol = build_symbol(rho, "exp_decay", decay=rho, margin=0.99)
    if eps < 0.0 or eps * symbol.l1_norm >= 1.0:
        raise ConfigError(
            f"line {lines['eps']}: eps*l1 = {eps * symbol.l1_norm:.6g} must stay below 1"
        )
    for e in e_list:
        if abs(e) > c0_cap:
            raise ConfigError(f"line {lines['E_list']}: |E| = {abs(e):.6g} exceeds C0 = {c0_cap:.6g}")
    for n in n_list:
        if n < 1:
            raise ConfigError(f"line {lines['N_list']}: window sizes must be >= 1")

    return SweepConfig(
        omega_raw=omega_raw, omega=omega, A=a_exp, rho=rho, eps=eps,
        E_list=e_list, N_list=n_list, M_rule=m_rule, grid=grid, C0=c0_cap,
        seed=seed, threads_raw=threads_raw, out_dir=raw["out_dir"], jobs=jobs,
    )


def parse_config(text: str) -> SweepConfig:
    """Parse and validate a flat key=value document (empty text gives the defaults)."""
    return make_config(_parse_lines(text))
