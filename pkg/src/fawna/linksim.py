"""Monte Carlo simulation of the quantize-and-forward SIMO link.

Symbols x ~ CN(0, P/W) pass through y = a x + w, every interface quantizes
its sample with a trained scalar codebook to get z, and the receiver forms
the linear-MMSE estimate of x from z.  The empirical rate is
W log2(1 + SINR) of that estimate.

Trials are split into fixed-size blocks, each with its own generator seeded
from (seed, block index).  Blocks reduce to second-order sums that are merged
in block order, so results do not depend on the thread count.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import model
from .model import AdmissibilityError, LinkConfig, ParameterError, QuantizerModel
from .quantizer import (MAX_BITS, MomentAccumulator, MomentReport, TrainedQuantizer,
                        complex_gaussian, quantize_complex, train_gaussian_quantizer)

MIN_TRIALS = 10 ** 4
BLOCK_SIZE = 1 << 14
BOOTSTRAP_RESAMPLES = 200

# Stream ids under the master seed.
_STREAM_TRIALS = 0
_STREAM_BOOTSTRAP = 1


def effective_rate(l: float, max_bits: int = MAX_BITS) -> int:
    """Largest even integer <= l, capped at 2 * max_bits."""
    return int(min(2 * (math.floor(l) // 2), 2 * max_bits))


@dataclass(frozen=True)
class SimRun:
    """One simulation request.

    ``quantizers`` is filled with one codebook per interface, trained on that
    interface's real-dimension variance (N0 + |a_i|^2 P/W) / 2.  With
    ``quantize=False`` the interfaces forward y unquantized.
    """

    cfg: LinkConfig
    trials: int = 10 ** 6
    seed: int = 0
    quantize: bool = True
    threads: int = 1
    quantizers: tuple[TrainedQuantizer, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < MIN_TRIALS:
            raise ParameterError("trials", f"need an integer >= {MIN_TRIALS}, got {self.trials!r}")
        if self.threads < 1:
            raise ParameterError("threads", "must be >= 1")
        if not self.quantize:
            return
        if self.effective_l < 2:
            raise AdmissibilityError(
                f"simulation needs at least 2 bits per complex sample, "
                f"C_f/(rW) = {self.cfg.quantizer_rate:.6g}",
                r_max=int(self.cfg.fiber_rate // (2 * self.cfg.bandwidth)) or None,
                w_max=self.cfg.fiber_rate / (2 * self.cfg.interfaces))
        if not self.quantizers:
            bits = self.effective_l // 2
            qs = tuple(train_gaussian_quantizer(bits, v / 2.0, self.seed)
                       for v in self.input_powers())
            object.__setattr__(self, "quantizers", qs)
        elif len(self.quantizers) != self.cfg.interfaces:
            raise ParameterError("quantizers", "need one quantizer per interface")

    @property
    def nominal_l(self) -> float:
        return self.cfg.quantizer_rate

    @property
    def effective_l(self) -> int | float:
        if not self.quantize:
            return math.inf
        return effective_rate(self.nominal_l)

    def input_powers(self) -> np.ndarray:
        """E|y_i|^2 = N0 + |a_i|^2 P / W."""
        cfg = self.cfg
        return cfg.noise_density + cfg.gain_powers * cfg.power / cfg.bandwidth


@dataclass(frozen=True)
class SimReport:
    empirical_rate: float
    rate_se: float
    analytical_lower_bound: float
    upper_bound: float
    nominal_l: float
    effective_l: float
    trials: int
    seed: int
    moment_diagnostics: tuple[MomentReport, ...]

    @property
    def distortion(self) -> np.ndarray:
        return np.array([m.power_error for m in self.moment_diagnostics])

    def to_dict(self) -> dict:
        return {
            "empirical_rate_bps": self.empirical_rate,
            "rate_se_bps": self.rate_se,
            "analytical_lower_bound_bps": self.analytical_lower_bound,
            "upper_bound_bps": self.upper_bound,
            "nominal_l": self.nominal_l,
            "effective_l": None if math.isinf(self.effective_l) else self.effective_l,
            "trials": self.trials,
            "seed": self.seed,
            "moment_diagnostics": [m.to_dict() for m in self.moment_diagnostics],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


class _BlockStats:
    __slots__ = ("n", "sxx", "szx", "szz")

    def __init__(self, r):
        self.n = 0
        self.sxx = 0.0
        self.szx = np.zeros(r, dtype=complex)
        self.szz = np.zeros((r, r), dtype=complex)

    def add(self, x, z):
        self.n += len(x)
        self.sxx += float(np.vdot(x, x).real)
        self.szx += z.T @ np.conj(x)
        self.szz += z.T @ np.conj(z)

    def merge(self, other):
        self.n += other.n
        self.sxx += other.sxx
        self.szx += other.szx
        self.szz += other.szz
        return self


def mmse_rate(sxx, szx, szz, n, bandwidth) -> float:
    """W log2(1 + SINR) of the linear-MMSE estimate of x from z."""
    px = sxx / n
    if px <= 0:
        return 0.0
    rzx = szx / n
    rzz = szz / n
    gain = float(np.real(np.vdot(rzx, np.linalg.solve(rzz, rzx))))
    mse = px - gain
    if mse <= 0:
        return math.inf
    return bandwidth * math.log2(px / mse)


def _run_block(run: SimRun, index: int, size: int):
    cfg = run.cfg
    r = cfg.interfaces
    rng = np.random.default_rng(np.random.SeedSequence(run.seed, spawn_key=(_STREAM_TRIALS, index)))
    x = complex_gaussian(rng, size, cfg.power / cfg.bandwidth)
    w = complex_gaussian(rng, (size, r), cfg.noise_density)
    y = x[:, None] * np.asarray(cfg.gains, dtype=complex)[None, :] + w
    moments = [MomentAccumulator() for _ in range(r)]
    if run.quantize:
        z = np.empty_like(y)
        for i, tq in enumerate(run.quantizers):
            z[:, i] = quantize_complex(tq, y[:, i])
            moments[i].add(y[:, i], z[:, i])
    else:
        z = y
    stats = _BlockStats(r)
    stats.add(x, z)
    return stats, moments


def _blocks(trials):
    return [(i, min(BLOCK_SIZE, trials - start))
            for i, start in enumerate(range(0, trials, BLOCK_SIZE))]


def _bootstrap_se(run: SimRun, block_stats) -> float:
    k = len(block_stats)
    if k < 2:
        return 0.0
    rng = np.random.default_rng(np.random.SeedSequence(run.seed, spawn_key=(_STREAM_BOOTSTRAP,)))
    n = np.array([b.n for b in block_stats], dtype=float)
    sxx = np.array([b.sxx for b in block_stats])
    szx = np.stack([b.szx for b in block_stats])
    szz = np.stack([b.szz for b in block_stats])
    rates = []
    for _ in range(BOOTSTRAP_RESAMPLES):
        counts = np.bincount(rng.integers(0, k, k), minlength=k).astype(float)
        rates.append(mmse_rate(counts @ sxx, counts @ szx,
                               np.tensordot(counts, szz, axes=1),
                               counts @ n, run.cfg.bandwidth))
    return float(np.std(rates, ddof=1))


def simulate_link(run: SimRun) -> SimReport:
    """Simulate ``run.trials`` symbols and compare the MMSE rate to the bound."""
    cfg = run.cfg
    blocks = _blocks(run.trials)
    if run.threads > 1:
        with ThreadPoolExecutor(max_workers=run.threads) as pool:
            results = list(pool.map(lambda b: _run_block(run, *b), blocks))
    else:
        results = [_run_block(run, *b) for b in blocks]

    total = _BlockStats(cfg.interfaces)
    moments = [MomentAccumulator() for _ in range(cfg.interfaces)]
    for stats, accs in results:
        total.merge(stats)
        for m, a in zip(moments, accs):
            m.merge(a)

    rate = mmse_rate(total.sxx, total.szx, total.szz, total.n, cfg.bandwidth)
    upper = model.wireless_capacity(cfg)
    if run.quantize:
        # The realized codebooks are scalar, so the bound uses the scalar product.
        bound = model.evaluate(cfg, QuantizerModel.scalar(), run.effective_l).lower_bound
        diagnostics = tuple(m.report() for m in moments)
    else:
        bound = upper
        diagnostics = ()
    return SimReport(
        empirical_rate=rate,
        rate_se=_bootstrap_se(run, [s for s, _ in results]),
        analytical_lower_bound=bound,
        upper_bound=upper,
        nominal_l=run.nominal_l,
        effective_l=run.effective_l,
        trials=run.trials,
        seed=run.seed,
        moment_diagnostics=diagnostics,
    )


def empirical_distortion_vector(run: SimRun) -> np.ndarray:
    """Measured E|q_i|^2 for every interface."""
    if not run.quantize:
        return np.zeros(run.cfg.interfaces)
    return simulate_link(run).distortion


def predicted_distortion_vector(run: SimRun) -> np.ndarray:
    """Zador-Gersho prediction (N0 + |a_i|^2 P/W) (pi sqrt(3)/2) 2^-l."""
    return run.input_powers() * QuantizerModel.scalar().distortion_factor(run.effective_l)
