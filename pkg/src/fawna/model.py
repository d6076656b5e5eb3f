"""Closed-form capacity bounds for a quantize-and-forward SIMO fiber link.

A transmitter sends x ~ CN(0, P/W) to r wireless-optical interfaces,
y = a x + w with w ~ CN(0, N0 I).  Each interface quantizes its samples at
l bits per complex sample and forwards them over a shared fiber of rate C_f,
so l <= C_f / (r W).  Rates are in bits/sec, logs are base 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

LOG2E = math.log2(math.e)

# Gersho constants and Zador factors.
M_SCALAR = 1.0 / 12.0
M_ASYMPTOTIC = 1.0 / (2.0 * math.pi * math.e)
BETA_SCALAR_GAUSS = 6.0 * math.sqrt(3.0) * math.pi
BETA_ASYMPTOTIC = 2.0 * math.pi * math.e

MB_MIN = 1.0
MB_MAX = math.pi * math.sqrt(3.0) / 2.0  # scalar quantizer of a Gaussian

# Admissibility check tolerates the rounding in C_f / (r W).
_RATE_FLOOR_TOL = 1e-12


class FawnaError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(FawnaError, ValueError):
    """A parameter lies outside its domain."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class AdmissibilityError(FawnaError, ValueError):
    """The link cannot carry at least one bit per complex sample."""

    def __init__(self, message: str, r_max: int | None = None,
                 w_max: float | None = None):
        hints = []
        if r_max is not None:
            hints.append(f"r_max={r_max}")
        if w_max is not None:
            hints.append(f"W_max={w_max:.9g} Hz")
        if hints:
            message = f"{message} (try {', '.join(hints)})"
        super().__init__(message)
        self.r_max = r_max
        self.w_max = w_max


class NumericsError(FawnaError, ArithmeticError):
    """A numerical quantity is undefined for the given arguments."""


def _check_positive(name, value, allow_zero=False):
    if not math.isfinite(value):
        raise ParameterError(name, f"must be finite, got {value!r}")
    if value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ParameterError(name, f"must be {bound}, got {value!r}")


@dataclass(frozen=True)
class LinkConfig:
    """One SIMO fiber-aided link.

    ``power`` is in watts, ``noise_density`` in W/Hz, ``bandwidth`` in Hz and
    ``fiber_rate`` in bits/sec.  ``gains`` holds one complex gain per
    interface.  Zero power is accepted as the degenerate silent link.
    """

    power: float
    noise_density: float
    bandwidth: float
    gains: tuple[complex, ...]
    fiber_rate: float

    def __post_init__(self):
        _check_positive("power", float(self.power), allow_zero=True)
        _check_positive("noise_density", float(self.noise_density))
        _check_positive("bandwidth", float(self.bandwidth))
        _check_positive("fiber_rate", float(self.fiber_rate))
        gains = tuple(complex(g) for g in np.ravel(np.asarray(self.gains)))
        if not gains:
            raise ParameterError("gains", "need at least one interface")
        if not all(math.isfinite(g.real) and math.isfinite(g.imag) for g in gains):
            raise ParameterError("gains", "entries must be finite")
        object.__setattr__(self, "gains", gains)

    @classmethod
    def from_ratio(cls, power_over_n0, bandwidth, fiber_rate, interfaces=None,
                   gains=None):
        """Build a config from P/N0 (1/s), taking N0 = 1.

        Every bound depends on P and N0 only through their ratio.
        """
        if gains is None:
            if interfaces is None:
                raise ParameterError("interfaces", "give interfaces or gains")
            if int(interfaces) != interfaces or interfaces < 1:
                raise ParameterError("interfaces", f"must be a positive integer, got {interfaces!r}")
            gains = (1.0,) * int(interfaces)
        elif interfaces is not None and len(gains) != interfaces:
            raise ParameterError("gains", f"expected {interfaces} entries, got {len(gains)}")
        return cls(power=power_over_n0, noise_density=1.0, bandwidth=bandwidth,
                   gains=tuple(gains), fiber_rate=fiber_rate)

    @property
    def interfaces(self) -> int:
        return len(self.gains)

    @property
    def power_over_n0(self) -> float:
        return self.power / self.noise_density

    @property
    def snr(self) -> float:
        """P / (N0 W), the transmit SNR per unit gain."""
        return self.power_over_n0 / self.bandwidth

    @property
    def gain_powers(self) -> np.ndarray:
        g = np.asarray(self.gains, dtype=complex)
        return g.real ** 2 + g.imag ** 2

    @property
    def is_unit_gain(self) -> bool:
        return all(g == 1 for g in self.gains)

    @property
    def quantizer_rate(self) -> float:
        """Largest per-interface rate the fiber supports, C_f / (r W)."""
        return self.fiber_rate / (self.interfaces * self.bandwidth)

    @property
    def r_max(self) -> int:
        return int(math.floor(self.fiber_rate / self.bandwidth * (1 + _RATE_FLOOR_TOL)))

    @property
    def w_max(self) -> float:
        return self.fiber_rate / self.interfaces

    @property
    def admissible(self) -> bool:
        return self.quantizer_rate >= 1.0 - _RATE_FLOOR_TOL

    def per_interface_snr(self) -> np.ndarray:
        return self.gain_powers * self.snr

    def replace(self, **changes) -> "LinkConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class QuantizerModel:
    """Analytical quantizer family, summarized by the product M_m * beta_m.

    ``dimension`` is ``math.inf`` for the asymptotic (infinite-dimensional)
    quantizer, whose product is exactly 1.
    """

    dimension: float
    mb_product: float

    def __post_init__(self):
        m = self.dimension
        if not (m == math.inf or (float(m).is_integer() and m >= 1)):
            raise ParameterError("dimension", f"must be a positive integer or inf, got {m!r}")
        mb = float(self.mb_product)
        if not (MB_MIN <= mb <= MB_MAX):
            raise ParameterError(
                "mb_product", f"must lie in [1, pi*sqrt(3)/2 = {MB_MAX:.6f}], got {mb!r}")
        if m == math.inf and mb != 1.0:
            raise ParameterError("mb_product", "asymptotic quantizer requires mb_product = 1")
        object.__setattr__(self, "mb_product", mb)

    @classmethod
    def scalar(cls, mb_product: float = MB_MAX) -> "QuantizerModel":
        return cls(1, mb_product)

    @classmethod
    def asymptotic(cls) -> "QuantizerModel":
        return cls(math.inf, 1.0)

    @property
    def is_asymptotic(self) -> bool:
        return self.dimension == math.inf

    def distortion_factor(self, l: float) -> float:
        """M_m beta_m 2^-l: normalized distortion at rate l."""
        return self.mb_product * 2.0 ** (-l)


@dataclass(frozen=True)
class CapacityReport:
    upper_bound: float
    phi: float
    lower_bound: float
    quantizer_rate: float
    per_interface_snr: tuple[float, ...]
    clamped: bool = False
    admissible: bool = True

    @property
    def per_interface_snr_db(self) -> tuple[float, ...]:
        return tuple(10 * math.log10(s) if s > 0 else -math.inf
                     for s in self.per_interface_snr)

    def to_dict(self) -> dict:
        return {
            "upper_bound_bps": self.upper_bound,
            "phi_bps": self.phi,
            "lower_bound_bps": self.lower_bound,
            "quantizer_rate_bits": self.quantizer_rate,
            "per_interface_snr": list(self.per_interface_snr),
            "per_interface_snr_db": [s if math.isfinite(s) else None
                                     for s in self.per_interface_snr_db],
            "clamped": self.clamped,
            "admissible": self.admissible,
        }


def diag_rank_one_solve(diag, coef, v, b):
    """Solve (Diag(diag) + coef * v v^H) x = b by Sherman-Morrison.

    Returns ``(x, denom)`` where ``denom = 1 + coef * v^H D^-1 v`` is the
    determinant ratio det(D + coef v v^H) / det(D).
    """
    diag = np.asarray(diag, dtype=float)
    v = np.asarray(v, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if np.any(diag <= 0):
        raise NumericsError("diagonal part must be positive definite")
    dinv_v = v / diag
    dinv_b = b / diag
    denom = 1.0 + coef * float(np.real(np.vdot(v, dinv_v)))
    if not denom > 0:
        raise NumericsError(
            f"rank-one update is singular or indefinite (determinant ratio {denom:.3g})")
    x = dinv_b - dinv_v * (coef * np.vdot(v, dinv_b) / denom)
    return x, denom


def wireless_capacity(cfg: LinkConfig) -> float:
    """W log2(1 + |a|^2 P / (N0 W)); also the upper bound on the link."""
    total_gain = float(np.sum(cfg.gain_powers))
    return cfg.bandwidth * math.log1p(total_gain * cfg.snr) * LOG2E


upper_bound = wireless_capacity


def psi(cfg: LinkConfig, q: QuantizerModel, l: float) -> float:
    """Fraction of the per-interface SNR that survives quantization at rate l."""
    d = q.distortion_factor(l)
    return (1.0 - d) / (1.0 + cfg.snr * d)


def _one_minus_psi(rho, d):
    # 1 - psi without cancellation.
    return d * (1.0 + rho) / (1.0 + rho * d)


def phi_general(cfg: LinkConfig, q: QuantizerModel, l: float) -> float:
    """Capacity penalty of quantization for an arbitrary gain vector.

    Evaluates the penalty as
    W log2(1 + |a|^2 rho) + W log2(1 - c a^H M^-1 a) with
    M = c a a^H + I + rho d Diag(|a_i|^2), c = rho (1 - d),
    d = M_m beta_m 2^-l and rho = P / (N0 W).  M is diagonal plus rank
    one, and 1 - c a^H M^-1 a equals 1 / denom from the solve.
    """
    rho = cfg.snr
    d = q.distortion_factor(l)
    g2 = cfg.gain_powers
    a = np.asarray(cfg.gains, dtype=complex)
    diag = 1.0 + rho * d * g2
    coef = rho * (1.0 - d)
    _, denom = diag_rank_one_solve(diag, coef, a, a)
    # (1 + |a|^2 rho) / denom - 1, summed termwise so it stays accurate as d -> 0.
    excess = float(np.sum(rho * g2 * d * (1.0 + rho * g2) / diag)) / denom
    return cfg.bandwidth * math.log1p(excess) * LOG2E


def phi_unit_gain(cfg: LinkConfig, q: QuantizerModel, l: float) -> float:
    """Penalty for a = (1, ..., 1):
    W log2(1 + r rho) - W log2(1 + r psi(l) rho)."""
    if not cfg.is_unit_gain:
        raise ParameterError("gains", "unit-gain penalty needs every gain equal to 1")
    r = cfg.interfaces
    rho = cfg.snr
    d = q.distortion_factor(l)
    retained = 1.0 + r * psi(cfg, q, l) * rho
    if not retained > 0:
        raise NumericsError(f"effective SINR argument {retained:.3g} is not positive")
    return cfg.bandwidth * math.log1p(r * rho * _one_minus_psi(rho, d) / retained) * LOG2E


def phi(cfg: LinkConfig, q: QuantizerModel, l: float) -> float:
    if cfg.is_unit_gain:
        return phi_unit_gain(cfg, q, l)
    return phi_general(cfg, q, l)


def phi_decay_envelope(cfg: LinkConfig, q: QuantizerModel, l: float) -> tuple[float, float]:
    """Upper and lower envelopes of the unit-gain penalty at rate l.

    With u = r (1 - psi) / (1 + r psi rho), the penalty is W log2(1 + rho u)
    and x - x^2/2 <= ln(1 + x) <= x gives
    (P/N0) u log2 e - (P^2 / (2 N0^2 W)) u^2 log2 e <= penalty <= (P/N0) u log2 e.
    """
    if not cfg.is_unit_gain:
        raise ParameterError("gains", "decay envelope is defined for unit gains")
    r = cfg.interfaces
    rho = cfg.snr
    p_n0 = cfg.power_over_n0
    d = q.distortion_factor(l)
    u = r * _one_minus_psi(rho, d) / (1.0 + r * psi(cfg, q, l) * rho)
    upper = p_n0 * u * LOG2E
    lower = upper - p_n0 ** 2 / (2.0 * cfg.bandwidth) * u ** 2 * LOG2E
    return upper, lower


def evaluate(cfg: LinkConfig, q: QuantizerModel, l: float | None = None) -> CapacityReport:
    """Report at rate ``l`` (default C_f / (r W)) without enforcing l >= 1.

    When the quantizer is so coarse that the retained SINR is not positive the
    penalty saturates at the upper bound.  Negative lower bounds clamp to 0.
    """
    if l is None:
        l = cfg.quantizer_rate
    ub = wireless_capacity(cfg)
    clamped = False
    try:
        pen = phi(cfg, q, l)
    except NumericsError:
        pen = ub
        clamped = True
    lb = ub - pen
    if lb < 0:
        lb = 0.0
        clamped = True
    # Rounding can push lb a hair past ub only when pen ~ 0.
    lb = min(lb, ub)
    return CapacityReport(
        upper_bound=ub,
        phi=pen,
        lower_bound=lb,
        quantizer_rate=l,
        per_interface_snr=tuple(float(s) for s in cfg.per_interface_snr()),
        clamped=clamped,
        admissible=l >= 1.0 - _RATE_FLOOR_TOL,
    )


def capacity_lower_bound(cfg: LinkConfig, q: QuantizerModel) -> CapacityReport:
    """Lower bound at the largest admissible quantizer rate l = C_f / (r W).

    The penalty decreases in l, so the full fiber share is always optimal.
    """
    if not cfg.admissible:
        raise AdmissibilityError(
            f"quantizer rate C_f/(rW) = {cfg.quantizer_rate:.6g} < 1 bit/sample",
            r_max=cfg.r_max, w_max=cfg.w_max)
    return evaluate(cfg, q)
