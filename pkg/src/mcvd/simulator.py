"""Monte-Carlo ground truth for the analytical model.

Each realization samples the tagged distance, the tagged transmitter's bit
history, a homogeneous Poisson field of interferers in the shell
``a < r <= r_max`` with independent bit histories, and finally the absorbed
count from its conditional Poisson law. Molecules are never walked
individually.

Realization ``i`` draws from its own Philox stream (key = seed, top counter
word = ``i``), so estimates are bit-identical for a given seed however the
work is split across processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ber import BerResult, ThresholdTable
from .channel import SystemParams, _taps_unchecked
from .distance import DistanceDistribution
from .exceptions import DomainError

__all__ = [
    "SimConfig",
    "McEstimate",
    "realization_rng",
    "sample_ppp",
    "simulate_realization",
    "simulate_counts",
    "estimate_ber",
    "estimate_ber_curve",
    "estimate_mean_counts",
]

Z95 = 1.959963984540054


@dataclass(frozen=True)
class SimConfig:
    """Monte-Carlo experiment.

    ``eta`` is a fixed threshold or a :class:`ThresholdTable` consulted with
    the realized tagged distance. ``L`` is the ISI memory in slots (1 means
    no ISI). ``pin_bits`` replaces every random bit except the tagged
    current one by the given value, reproducing fixed-history baselines.
    """

    params: SystemParams
    rd_dist: DistanceDistribution
    eta: int | ThresholdTable = 1
    L: int = 1
    r_max: float = 150.0
    realizations: int = 10_000
    seed: int = 0
    pin_bits: int | None = None

    def __post_init__(self):
        if not self.r_max > self.params.a:
            raise DomainError("r_max must exceed the receiver radius")
        if self.realizations < 1:
            raise DomainError("realizations must be >= 1")
        if self.L < 1:
            raise DomainError("L must be >= 1")
        if self.pin_bits not in (None, 0, 1):
            raise DomainError("pin_bits must be None, 0 or 1")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        self.rd_dist.validate(self.params.a)

    def replace(self, **changes) -> "SimConfig":
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        values.update(changes)
        return SimConfig(**values)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    half_width_95: float
    n: int
    seed: int

    @property
    def se(self) -> float:
        return self.half_width_95 / Z95

    @classmethod
    def from_samples(cls, samples: np.ndarray, seed: int) -> "McEstimate":
        samples = np.asarray(samples, dtype=float)
        n = samples.size
        if n == 0:
            return cls(math.nan, math.nan, 0, seed)
        mean = float(samples.mean())
        std = float(samples.std(ddof=1)) if n > 1 else 0.0
        return cls(mean, Z95 * std / math.sqrt(n), n, seed)

    @classmethod
    def from_bernoulli(cls, successes: int, n: int, seed: int) -> "McEstimate":
        if n == 0:
            return cls(math.nan, math.nan, 0, seed)
        m = successes / n
        return cls(m, Z95 * math.sqrt(m * (1.0 - m) / n), n, seed)


def realization_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, index]))


def sample_ppp(lam: float, a: float, r_max: float, rng: np.random.Generator) -> np.ndarray:
    """Distances of a homogeneous PPP of density ``lam`` in ``a < r <= r_max``."""
    if not r_max > a:
        raise DomainError("r_max must exceed a")
    volume = 4.0 / 3.0 * math.pi * (r_max**3 - a**3)
    count = rng.poisson(lam * volume) if lam > 0 else 0
    u = rng.random(count)
    return np.cbrt(a**3 + u * (r_max**3 - a**3))


def _intensities(cfg: SimConfig, rng: np.random.Generator):
    """Poisson intensities of one realization.

    Returns ``(rd, bit, signal, isi, cci)`` where ``signal`` is the tagged
    current-slot intensity *if* the bit is 1.
    """
    p = cfg.params
    rd = float(cfg.rd_dist.sample(rng))
    bits = rng.random(cfg.L) < p.p1
    bit = int(bits[0])
    radii = sample_ppp(p.lam, p.a, cfg.r_max, rng)
    marks = rng.random((radii.size, cfg.L)) < p.p1
    if cfg.pin_bits is not None:
        bits[1:] = bool(cfg.pin_bits)
        marks[:] = bool(cfg.pin_bits)
    taps = _taps_unchecked(np.concatenate(([rd], radii)), cfg.L, p)
    signal = p.N * taps[0, 0]
    isi = p.N * float(np.dot(taps[0, 1:], bits[1:]))
    cci = p.N * float(np.sum(taps[1:] * marks)) if radii.size else 0.0
    return rd, bit, signal, isi, cci


def simulate_realization(cfg: SimConfig, rng: np.random.Generator) -> tuple[int, int]:
    """One draw of ``(y, tagged_bit)`` with the tagged bit sampled naturally."""
    rd, bit, signal, isi, cci = _intensities(cfg, rng)
    return int(rng.poisson(bit * signal + isi + cci)), bit


def _one(cfg: SimConfig, index: int):
    rng = realization_rng(cfg.seed, index)
    rd, bit, signal, isi, cci = _intensities(cfg, rng)
    y0 = rng.poisson(isi + cci)
    extra = rng.poisson(signal)
    return rd, bit, y0, y0 + extra


def _chunk(cfg: SimConfig, indices):
    return [_one(cfg, int(i)) for i in indices]


def simulate_counts(cfg: SimConfig, n_jobs: int = 1) -> dict[str, np.ndarray]:
    """Per-realization draws, in realization order.

    ``y0`` is the count with the tagged current bit forced to 0 and ``y1``
    the count with it forced to 1 (same field, same history; ``y1 - y0`` is
    the tagged signal). ``bit`` is the naturally sampled tagged bit.
    """
    n = cfg.realizations
    if n_jobs == 1:
        rows = [_one(cfg, i) for i in range(n)]
    else:
        from joblib import Parallel, delayed

        chunks = np.array_split(np.arange(n), max(1, n_jobs * 4))
        parts = Parallel(n_jobs=n_jobs)(
            delayed(_chunk)(cfg, c) for c in chunks if c.size
        )
        rows = [r for part in parts for r in part]
    rd, bit, y0, y1 = (np.array(col) for col in zip(*rows))
    return {"rd": rd.astype(float), "bit": bit.astype(int), "y0": y0.astype(np.int64), "y1": y1.astype(np.int64)}


def _thresholds(cfg: SimConfig, eta, rd):
    if isinstance(eta, ThresholdTable):
        return np.asarray(eta.lookup(rd))
    if eta < 0 or int(eta) != eta:
        raise DomainError(f"eta must be a non-negative integer, got {eta}")
    return np.full(rd.shape, int(eta))


def _estimates(cfg: SimConfig, draws, eta, mode: str):
    p = cfg.params
    thr = _thresholds(cfg, eta, draws["rd"])
    err0 = draws["y0"] >= thr
    err1 = draws["y1"] < thr
    n = cfg.realizations
    if mode == "forced":
        peb0 = McEstimate.from_bernoulli(int(err0.sum()), n, cfg.seed)
        peb1 = McEstimate.from_bernoulli(int(err1.sum()), n, cfg.seed)
        pe = McEstimate.from_samples(p.p0 * err0 + p.p1 * err1, cfg.seed)
    elif mode == "natural":
        bit = draws["bit"]
        e0 = err0[bit == 0]
        e1 = err1[bit == 1]
        peb0 = McEstimate.from_bernoulli(int(e0.sum()), e0.size, cfg.seed)
        peb1 = McEstimate.from_bernoulli(int(e1.sum()), e1.size, cfg.seed)
        pe = McEstimate.from_bernoulli(int(e0.sum() + e1.sum()), n, cfg.seed)
    else:
        raise DomainError(f"unknown sampling mode {mode!r}")
    eta_out = None if isinstance(eta, ThresholdTable) else int(eta)
    result = BerResult(
        peb0=peb0.mean, peb1=peb1.mean, pe=pe.mean, eta=eta_out, method="monte_carlo"
    )
    return result, {"peb0": peb0, "peb1": peb1, "pe": pe}


def estimate_ber(cfg: SimConfig, mode: str = "forced", n_jobs: int = 1, draws=None):
    """``(BerResult, {"peb0", "peb1", "pe": McEstimate})`` at ``cfg.eta``.

    ``mode="forced"`` scores every realization under both tagged bits
    (lower variance); ``"natural"`` scores only the sampled bit. In natural
    mode a bit that never occurs gives ``nan`` for its conditional error.
    """
    if draws is None:
        draws = simulate_counts(cfg, n_jobs=n_jobs)
    return _estimates(cfg, draws, cfg.eta, mode)


def estimate_ber_curve(
    cfg: SimConfig, etas: Sequence[int], mode: str = "forced", n_jobs: int = 1, draws=None
):
    """Estimates for several thresholds sharing the same realizations."""
    if draws is None:
        draws = simulate_counts(cfg, n_jobs=n_jobs)
    return [_estimates(cfg, draws, int(e), mode) for e in etas]


def estimate_mean_counts(cfg: SimConfig) -> tuple[McEstimate, McEstimate, McEstimate]:
    """Mean absorbed counts split into (signal, ISI, CCI).

    The tagged bit is sampled naturally and each component count is drawn
    from its own Poisson law.
    """
    sig = np.empty(cfg.realizations)
    isi = np.empty(cfg.realizations)
    cci = np.empty(cfg.realizations)
    for i in range(cfg.realizations):
        rng = realization_rng(cfg.seed, i)
        rd, bit, s, x, c = _intensities(cfg, rng)
        sig[i] = rng.poisson(bit * s)
        isi[i] = rng.poisson(x)
        cci[i] = rng.poisson(c)
    return (
        McEstimate.from_samples(sig, cfg.seed),
        McEstimate.from_samples(isi, cfg.seed),
        McEstimate.from_samples(cci, cfg.seed),
    )
