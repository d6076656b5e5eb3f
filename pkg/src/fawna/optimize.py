"""Optimal interface count and bandwidth, and parameter sweeps.

For fixed fiber rate, adding interfaces or bandwidth buys receive power or
degrees of freedom but coarsens every quantizer, so the lower bound has an
interior maximum in both r and W.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import (AdmissibilityError, CapacityReport, LinkConfig, ParameterError,
                    QuantizerModel, capacity_lower_bound, evaluate)

VARIABLES = ("fiber_rate", "interfaces", "bandwidth", "power")

CSV_COLUMNS = ("variable", "value", "upper_bound_bps", "phi_bps", "lower_bound_bps",
               "quantizer_rate_bits", "admissible", "clamped", "snr_linear", "snr_db")

COARSE_POINTS = 512
RATE_CAP = 1e4  # lower edge of the W search is C_f / (r * RATE_CAP)
GOLDEN_RTOL = 1e-4

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{x:.9g}"


@dataclass(frozen=True)
class SweepRow:
    value: float
    report: CapacityReport

    @property
    def upper_bound(self) -> float:
        return self.report.upper_bound

    @property
    def lower_bound(self) -> float:
        return self.report.lower_bound


@dataclass(frozen=True)
class SweepTable:
    variable: str
    rows: tuple[SweepRow, ...]

    @property
    def values(self) -> np.ndarray:
        return np.array([row.value for row in self.rows], dtype=float)

    @property
    def lower_bounds(self) -> np.ndarray:
        return np.array([row.lower_bound for row in self.rows])

    @property
    def upper_bounds(self) -> np.ndarray:
        return np.array([row.upper_bound for row in self.rows])

    def best(self) -> SweepRow:
        """Row with the largest lower bound among admissible rows; first one wins ties."""
        candidates = [row for row in self.rows if row.report.admissible]
        if not candidates:
            raise AdmissibilityError(f"no admissible point in the {self.variable} sweep")
        best = candidates[0]
        for row in candidates[1:]:
            if row.lower_bound > best.lower_bound:
                best = row
        return best

    def csv_rows(self):
        for row in self.rows:
            rep = row.report
            yield [
                self.variable,
                _fmt(row.value),
                _fmt(rep.upper_bound),
                _fmt(rep.phi),
                _fmt(rep.lower_bound),
                _fmt(rep.quantizer_rate),
                _fmt(rep.admissible),
                _fmt(rep.clamped),
                ";".join(_fmt(s) for s in rep.per_interface_snr),
                ";".join(_fmt(s) for s in rep.per_interface_snr_db),
            ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(self.csv_rows())
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "variable": self.variable,
            "rows": [{"value": row.value, **row.report.to_dict()} for row in self.rows],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


@dataclass(frozen=True)
class OptimumResult:
    variable: str
    argmax: float
    value: float
    profile: SweepTable

    def to_dict(self) -> dict:
        return {
            "variable": self.variable,
            "argmax": self.argmax,
            "lower_bound_bps": self.value,
            "profile": self.profile.to_dict(),
        }


def _unit_cfg(power, noise_density, bandwidth, interfaces, fiber_rate) -> LinkConfig:
    return LinkConfig(power=power, noise_density=noise_density, bandwidth=bandwidth,
                      gains=(1.0,) * int(interfaces), fiber_rate=fiber_rate)


def _variant(cfg: LinkConfig, variable: str, value) -> LinkConfig:
    if variable == "interfaces":
        if not cfg.is_unit_gain:
            raise ParameterError("gains", "interface sweeps add unit-gain interfaces only")
        return cfg.replace(gains=(1.0,) * int(value))
    return cfg.replace(**{variable: float(value)})


def sweep_values(variable: str, lo: float, hi: float, points: int, scale: str = "linear"):
    if variable not in VARIABLES:
        raise ParameterError("variable", f"unknown sweep variable {variable!r}; choose from {VARIABLES}")
    if points < 1:
        raise ParameterError("points", "need at least one point")
    if points == 1:
        if lo != hi:
            raise ParameterError("points", "a single-point sweep needs lo == hi")
        values = np.array([lo], dtype=float)
    else:
        if not lo < hi:
            raise ParameterError("range", f"need lo < hi, got [{lo}, {hi}]")
        if scale == "linear":
            values = np.linspace(lo, hi, points)
        elif scale == "log":
            if lo <= 0:
                raise ParameterError("range", "log spacing needs lo > 0")
            values = np.geomspace(lo, hi, points)
        else:
            raise ParameterError("scale", f"unknown scale {scale!r}")
    if variable == "interfaces":
        values = np.unique(np.round(values).astype(int))
        if values[0] < 1:
            raise ParameterError("range", "interfaces start at 1")
    return values


def sweep(variable: str, lo: float, hi: float, points: int, cfg: LinkConfig,
          q: QuantizerModel, scale: str = "linear", threads: int = 1) -> SweepTable:
    """Capacity reports along one parameter, others fixed; inadmissible points are flagged."""
    values = sweep_values(variable, lo, hi, points, scale)

    def row(v):
        return SweepRow(v.item(), evaluate(_variant(cfg, variable, v), q))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = tuple(pool.map(row, values))
    else:
        rows = tuple(row(v) for v in values)
    return SweepTable(variable, rows)


def optimal_interfaces(power: float, noise_density: float, bandwidth: float,
                       fiber_rate: float, q: QuantizerModel) -> OptimumResult:
    """Exhaustive search over r = 1..floor(C_f / W) with unit gains; ties go to smaller r."""
    r_max = _unit_cfg(power, noise_density, bandwidth, 1, fiber_rate).r_max
    if r_max < 1:
        raise AdmissibilityError(
            f"bandwidth {bandwidth:.9g} Hz exceeds the fiber rate {fiber_rate:.9g} bits/s",
            r_max=0, w_max=fiber_rate)
    rows = []
    for r in range(1, r_max + 1):
        cfg = _unit_cfg(power, noise_density, bandwidth, r, fiber_rate)
        rows.append(SweepRow(r, capacity_lower_bound(cfg, q)))
    table = SweepTable("interfaces", tuple(rows))
    best = table.best()
    return OptimumResult("interfaces", int(best.value), best.lower_bound, table)


def golden_section_max(f, lo: float, hi: float, rtol: float = GOLDEN_RTOL, max_iter: int = 200):
    """Maximize a unimodal ``f`` on [lo, hi]; returns (x, f(x))."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= rtol * 0.5 * abs(a + b):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def optimal_bandwidth(power: float, noise_density: float, interfaces: int,
                      fiber_rate: float, q: QuantizerModel,
                      coarse_points: int = COARSE_POINTS) -> OptimumResult:
    """Coarse log-spaced scan of W over [C_f / (r RATE_CAP), C_f / r], then golden section.

    W = 0 is excluded: there the rate is analytically 0 and l is unbounded.
    """
    if int(interfaces) != interfaces or interfaces < 1:
        raise ParameterError("interfaces", "must be a positive integer")
    w_hi = fiber_rate / interfaces
    w_lo = w_hi / RATE_CAP
    if not (0 < w_lo < w_hi and math.isfinite(w_hi)):
        raise AdmissibilityError(f"degenerate bandwidth interval [{w_lo}, {w_hi}]")
    base = _unit_cfg(power, noise_density, w_hi, interfaces, fiber_rate)
    profile = sweep("bandwidth", w_lo, w_hi, coarse_points, base, q, scale="log")
    values = profile.values
    lbs = profile.lower_bounds
    k = int(np.argmax(lbs))

    def f(w):
        return evaluate(base.replace(bandwidth=min(max(w, w_lo), w_hi)), q).lower_bound

    a = values[max(k - 1, 0)]
    b = values[min(k + 1, len(values) - 1)]
    w_star, c_star = golden_section_max(f, a, b)
    if c_star < lbs[k]:
        w_star, c_star = float(values[k]), float(lbs[k])
    return OptimumResult("bandwidth", float(w_star), float(c_star), profile)


def count_local_maxima(values) -> int:
    """Strict interior local maxima plus maxima at the ends."""
    v = np.asarray(values, dtype=float)
    if len(v) < 2:
        return len(v)
    inner = np.sum((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:]))
    return int(inner + (v[0] > v[1]) + (v[-1] > v[-2]))
