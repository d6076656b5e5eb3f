"""Zador-Gersho distortion model and trained Lloyd-Max scalar quantizers.

The interfaces quantize real and imaginary parts separately with the same
fixed-rate scalar codebook, so l bits per complex sample means l/2 bits per
real dimension.  At high rate the total distortion is close to
E|y|^2 (pi sqrt(3)/2) 2^-l.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtri

from .model import ParameterError, QuantizerModel

TRAINING_SAMPLES = 10 ** 6
MAX_ITERATIONS = 10 ** 4
CENTROID_TOL = 1e-9
MAX_BITS = 12

_BLOCK = 1 << 16


@dataclass(frozen=True)
class ZadorGershoConstants:
    m1: float = 1.0 / 12.0
    m_inf: float = 1.0 / (2.0 * math.pi * math.e)
    beta1_gauss: float = 6.0 * math.sqrt(3.0) * math.pi
    beta_inf: float = 2.0 * math.pi * math.e

    @property
    def scalar_product(self) -> float:
        return self.m1 * self.beta1_gauss

    @property
    def asymptotic_product(self) -> float:
        return self.m_inf * self.beta_inf


CONSTANTS = ZadorGershoConstants()


def distortion_rate(variance_complex: float, q: QuantizerModel, l: float) -> float:
    """Zador-Gersho distortion E|q|^2 for input power ``variance_complex`` at rate l."""
    if variance_complex < 0:
        raise ParameterError("variance_complex", "must be >= 0")
    if l < 0:
        raise ParameterError("l", "must be >= 0")
    return variance_complex * q.distortion_factor(l)


@dataclass(frozen=True, eq=False)
class TrainedQuantizer:
    """Fixed-rate scalar codebook for one real dimension."""

    bits_per_real_dim: int
    codebook: np.ndarray
    thresholds: np.ndarray
    source_variance: float
    converged: bool = True
    iterations: int = 0

    @classmethod
    def from_codebook(cls, codebook, source_variance, **kw) -> "TrainedQuantizer":
        c = np.asarray(codebook, dtype=float)
        bits = int(round(math.log2(len(c))))
        if len(c) != 2 ** bits:
            raise ParameterError("codebook", f"size {len(c)} is not a power of two")
        if np.any(np.diff(c) <= 0):
            raise ParameterError("codebook", "must be strictly increasing")
        c.setflags(write=False)
        t = 0.5 * (c[1:] + c[:-1])
        t.setflags(write=False)
        return cls(bits, c, t, float(source_variance), **kw)

    @property
    def levels(self) -> int:
        return len(self.codebook)

    @property
    def rate_complex(self) -> int:
        """Bits per complex sample."""
        return 2 * self.bits_per_real_dim

    def quantize(self, values):
        """Nearest codeword per real value; boundary ties go to the lower codeword."""
        return self.codebook[np.searchsorted(self.thresholds, values, side="left")]

    def __eq__(self, other):
        if not isinstance(other, TrainedQuantizer):
            return NotImplemented
        return (self.bits_per_real_dim == other.bits_per_real_dim
                and self.source_variance == other.source_variance
                and np.array_equal(self.codebook, other.codebook))

    __hash__ = None


def quantize_complex(tq: TrainedQuantizer, sample):
    """Quantize real and imaginary parts independently (scalar or array)."""
    s = np.asarray(sample, dtype=complex)
    out = tq.quantize(s.real) + 1j * tq.quantize(s.imag)
    return complex(out) if out.ndim == 0 else out


def stratified_gaussian(n: int, rng: np.random.Generator) -> np.ndarray:
    """Sorted standard-normal sample, one draw per equal-probability stratum.

    Only the upper half is drawn; the lower half is its mirror image, so the
    sample is exactly symmetric and n must be even.
    """
    if n % 2:
        raise ParameterError("n", "must be even")
    half = n // 2
    u = 0.5 + 0.5 * (np.arange(half) + rng.random(half)) / half
    upper = ndtri(u)
    return np.concatenate((-upper[::-1], upper))


def lloyd_max(samples: np.ndarray, levels: int, init: np.ndarray,
              tol: float = CENTROID_TOL, max_iter: int = MAX_ITERATIONS):
    """Lloyd-Max iteration on sorted samples.

    Returns ``(codebook, converged, iterations)``.  Cells are found by binary
    search on the sorted samples and centroids from prefix sums, so one
    iteration costs O(levels log n).  Empty cells keep their codeword.
    """
    x = np.asarray(samples, dtype=float)
    n = len(x)
    csum = np.concatenate(([0.0], np.cumsum(x)))
    scale = math.sqrt(float(np.mean(x * x))) or 1.0
    c = np.array(init, dtype=float)
    if len(c) != levels:
        raise ParameterError("init", f"expected {levels} codewords")
    for it in range(1, max_iter + 1):
        t = 0.5 * (c[1:] + c[:-1])
        # side="right" puts a sample equal to a threshold in the lower cell.
        edges = np.concatenate(([0], np.searchsorted(x, t, side="right"), [n]))
        counts = np.diff(edges)
        sums = csum[edges[1:]] - csum[edges[:-1]]
        new = np.where(counts > 0, sums / np.maximum(counts, 1), c)
        move = float(np.max(np.abs(new - c))) / scale
        c = new
        if move < tol:
            return c, True, it
    return c, False, max_iter


@functools.lru_cache(maxsize=64)
def _train_unit(bits: int, seed: int):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
    x = stratified_gaussian(TRAINING_SAMPLES, rng)
    levels = 2 ** bits
    # Companded start: optimal point density for a Gaussian is N(0, 3).
    init = math.sqrt(3.0) * ndtri((np.arange(levels) + 0.5) / levels)
    return lloyd_max(x, levels, init)


def train_gaussian_quantizer(bits_per_real_dim: int, variance: float,
                             seed: int = 0) -> TrainedQuantizer:
    """Lloyd-Max codebook for a real N(0, variance) source.

    Trained on a seeded stratified sample of 10^6 standard normals and scaled
    by the standard deviation; identical arguments give identical codebooks.
    """
    bits = int(bits_per_real_dim)
    if bits != bits_per_real_dim or not 1 <= bits <= MAX_BITS:
        raise ParameterError("bits_per_real_dim", f"must be an integer in [1, {MAX_BITS}]")
    if not (variance > 0 and math.isfinite(variance)):
        raise ParameterError("variance", "must be finite and > 0")
    unit, converged, iterations = _train_unit(bits, int(seed))
    return TrainedQuantizer.from_codebook(
        unit * math.sqrt(variance), variance,
        converged=converged, iterations=iterations)


def complex_gaussian(rng: np.random.Generator, size, variance: float) -> np.ndarray:
    """CN(0, variance): independent real and imaginary parts of variance/2."""
    sd = math.sqrt(variance / 2.0)
    return sd * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


@dataclass(frozen=True)
class MomentReport:
    """Empirical moments of the quantization error q = Q(y) - y, z = Q(y).

    Ratios are normalized by E|q|^2 and come with standard errors on the same
    scale.
    """

    trials: int
    power_input: float
    power_output: float
    power_error: float
    mean_error: float
    mean_error_se: float
    output_error: float
    output_error_se: float
    input_error: float
    input_error_se: float
    power_balance: float
    power_balance_se: float

    def z_scores(self) -> dict:
        def z(v, se):
            return v / se if se > 0 else (0.0 if v == 0 else math.inf)
        return {
            "mean_error": z(self.mean_error, self.mean_error_se),
            "output_error": z(self.output_error, self.output_error_se),
            "input_error": z(self.input_error, self.input_error_se),
            "power_balance": z(self.power_balance, self.power_balance_se),
        }

    def within(self, k: float = 5.0) -> bool:
        return all(abs(v) < k for v in self.z_scores().values())

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["z_scores"] = self.z_scores()
        return d


class MomentAccumulator:
    """Sums for the error moments; merging is plain addition."""

    def __init__(self):
        self.n = 0
        self.sum_q = 0j
        self.sum_q2 = 0.0
        self.sum_zq = 0j
        self.sum_zq2 = 0.0
        self.sum_y2 = 0.0
        self.sum_z2 = 0.0
        self.sum_bal2 = 0.0

    def add(self, y: np.ndarray, z: np.ndarray):
        q = z - y
        zq = z * np.conj(q)
        y2 = (y * np.conj(y)).real
        z2 = (z * np.conj(z)).real
        self.n += y.size
        self.sum_q += complex(q.sum())
        self.sum_q2 += float((q * np.conj(q)).real.sum())
        self.sum_zq += complex(zq.sum())
        self.sum_zq2 += float((zq * np.conj(zq)).real.sum())
        self.sum_y2 += float(y2.sum())
        self.sum_z2 += float(z2.sum())
        self.sum_bal2 += float(((2.0 * zq.real) ** 2).sum())
        return self

    def merge(self, other: "MomentAccumulator"):
        for k, v in other.__dict__.items():
            setattr(self, k, getattr(self, k) + v)
        return self

    def report(self) -> MomentReport:
        n = self.n
        pq = self.sum_q2 / n
        norm = pq if pq > 0 else 1.0
        mq = self.sum_q / n
        se_q = math.sqrt(max(pq - abs(mq) ** 2, 0.0) / n)
        mzq = self.sum_zq / n
        se_zq = math.sqrt(max(self.sum_zq2 / n - abs(mzq) ** 2, 0.0) / n)
        py, pz = self.sum_y2 / n, self.sum_z2 / n
        # E|z|^2 - E|y|^2 + E|q|^2 = 2 Re E[z q*] sample by sample.
        balance = pz - py + pq
        se_bal = math.sqrt(max(self.sum_bal2 / n - balance ** 2, 0.0) / n)
        return MomentReport(
            trials=n,
            power_input=py,
            power_output=pz,
            power_error=pq,
            mean_error=abs(mq) / norm,
            mean_error_se=se_q / norm,
            output_error=abs(mzq) / norm,
            output_error_se=se_zq / norm,
            # y q* + |q|^2 = z q* for every sample.
            input_error=abs(mzq) / norm,
            input_error_se=se_zq / norm,
            power_balance=balance / norm,
            power_balance_se=se_bal / norm,
        )


def verify_quantizer_moments(tq: TrainedQuantizer, trials: int, seed: int = 0) -> MomentReport:
    """Monte Carlo check that the error is zero-mean and orthogonal to the output.

    Draws y ~ CN(0, 2 * source_variance) so each real dimension matches the
    training source.
    """
    if trials < 10 ** 5:
        raise ParameterError("trials", "need at least 10^5 trials")
    acc = MomentAccumulator()
    variance = 2.0 * tq.source_variance
    for i, start in enumerate(range(0, trials, _BLOCK)):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1, i)))
        y = complex_gaussian(rng, min(_BLOCK, trials - start), variance)
        acc.add(y, quantize_complex(tq, y))
    return acc.report()


def held_out_distortion(tq: TrainedQuantizer, samples: int = 10 ** 6, seed: int = 1) -> float:
    """Mean squared error per real dimension on fresh N(0, source_variance) draws."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2,)))
    x = math.sqrt(tq.source_variance) * rng.standard_normal(samples)
    return float(np.mean((tq.quantize(x) - x) ** 2))


def dumps_codebook(tq: TrainedQuantizer) -> str:
    lines = [f"bits={tq.bits_per_real_dim} variance={tq.source_variance!r}"]
    lines += [repr(float(c)) for c in tq.codebook]
    return "\n".join(lines) + "\n"


def loads_codebook(text: str) -> TrainedQuantizer:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParameterError("codebook", "empty codebook text")
    header = dict(tok.split("=", 1) for tok in lines[0].split())
    try:
        bits = int(header["bits"])
        variance = float(header["variance"])
    except (KeyError, ValueError) as exc:
        raise ParameterError("codebook", f"bad header {lines[0]!r}") from exc
    tq = TrainedQuantizer.from_codebook([float(s) for s in lines[1:]], variance)
    if tq.bits_per_real_dim != bits:
        raise ParameterError("codebook", f"header says {bits} bits, found {tq.levels} codewords")
    return tq


def save_codebook(tq: TrainedQuantizer, path) -> None:
    Path(path).write_text(dumps_codebook(tq))


def load_codebook(path) -> TrainedQuantizer:
    return loads_codebook(Path(path).read_text())
