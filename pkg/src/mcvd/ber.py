"""Analytical bit-error probability of the threshold detector.

The receiver decodes 1 when the absorbed count ``y`` reaches the threshold
``eta`` and 0 otherwise. Conditioned on the tagged bit, ``y`` is a
compound-Poisson mixture over the marked interferer field; its mass at
``n`` is ``exp(-x0) * B_n(x) / n!`` where ``x0`` and ``x`` come from the
Laplace functional of the field. All masses are assembled in log space so
that dense fields neither overflow ``B_n`` nor underflow ``exp(-x0)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .channel import SystemParams, absorb_fraction, integrate_field, slot_taps, truncation_radius
from .distance import DistanceDistribution
from .exceptions import DomainError
from .mathkit import integrate_adaptive, log_scaled_bell

__all__ = [
    "BerResult",
    "ThresholdTable",
    "total_ber",
    "alpha_coeffs",
    "ber_no_isi_fixed",
    "ber_no_isi_curve",
    "ber_no_isi_eta1_equiprobable",
    "ber_no_isi_random",
    "ber_no_isi_random_curve",
    "e_lk",
    "isi_field_coeffs",
    "epsilon_coeffs",
    "ber_isi_fixed",
    "ber_isi_curve",
    "default_eta_max",
    "optimal_threshold",
    "build_threshold_table",
    "adaptive_policy_ber",
    "best_single_threshold",
]

METHODS = ("analytic_no_isi", "analytic_isi", "monte_carlo")
_TOL = 1e-11


@dataclass(frozen=True)
class BerResult:
    """Conditional and total error probabilities at one operating point.

    ``eta`` is ``None`` when the threshold varies with the distance.
    """

    peb0: float
    peb1: float
    pe: float
    eta: int | None
    method: str

    def __post_init__(self):
        if self.method not in METHODS and not self.method.startswith(METHODS):
            raise DomainError(f"unknown method {self.method!r}")


def total_ber(peb0: float, peb1: float, p: SystemParams) -> float:
    return p.p0 * peb0 + p.p1 * peb1


def _result(peb0, peb1, eta, method, p):
    peb0 = min(max(float(peb0), 0.0), 1.0)
    peb1 = min(max(float(peb1), 0.0), 1.0)
    return BerResult(peb0, peb1, total_ber(peb0, peb1, p), eta, method)


def _check_eta(eta):
    if eta < 0 or int(eta) != eta:
        raise DomainError(f"eta must be a non-negative integer, got {eta}")
    return int(eta)


def _check_rd(rd, p):
    if not rd > p.a:
        raise DomainError(f"rd must exceed a={p.a}, got {rd}")


def _field_weight(p: SystemParams) -> float:
    return 4.0 * math.pi * p.lam


def _poisson_masses(c, k_max):
    """``exp(-c) c^k / k!`` for ``k = 0..k_max``; leading axis is ``k``."""
    c = np.asarray(c, dtype=float)
    k = np.arange(k_max + 1).reshape((-1,) + (1,) * c.ndim)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(special.xlogy(k, c) - c - special.gammaln(k + 1.0))
    return out


def _convolve_truncated(x, y, n):
    """First ``n`` terms of the Cauchy product along axis 0."""
    out = np.zeros((n,) + np.broadcast_shapes(x.shape[1:], y.shape[1:]))
    for i in range(min(n, x.shape[0])):
        m = min(n - i, y.shape[0])
        out[i : i + m] += x[i] * y[:m]
    return out


def _masses(log_bell, shift):
    with np.errstate(under="ignore"):
        return np.exp(log_bell - shift)


# --------------------------------------------------------------------------
# No ISI


def _unscale(vals, scaled):
    if scaled:
        return vals
    with np.errstate(over="ignore"):
        return vals * special.gamma(np.arange(2, vals.size + 2))


def alpha_coeffs(eta: int, p: SystemParams, tol: float = _TOL, scaled: bool = False):
    """Field coefficients of the no-ISI model.

    Returns ``(alpha0, alphas)`` with ``alphas = [alpha_1 .. alpha_{eta-1}]``.
    Each is ``4 pi lam p1`` times a radial integral over the interferer
    region of ``1 - exp(-c)`` (``alpha0``) or ``exp(-c) c^i``, with
    ``c = N f(ts, z)``. ``scaled=True`` returns ``alpha_i / i!`` instead;
    that is the form the curve functions accept through ``coeffs``.
    """
    if eta < 1 or int(eta) != eta:
        raise DomainError(f"eta must be a positive integer, got {eta}")
    K = int(eta) - 1
    if p.lam == 0 or p.p1 == 0 or p.N == 0:
        return 0.0, np.zeros(K)

    def integrand(z):
        c = p.N * absorb_fraction(p.ts, z, p)
        return np.vstack([-np.expm1(-c), _poisson_masses(c, K)[1:]])

    # beyond the truncation radius exp(-c) c^i / i! <= N f * c_far^(i-1) / i!
    c_far = p.N * absorb_fraction(p.ts, truncation_radius(p, p.ts), p)
    i = np.arange(1, K + 1)
    envelope = p.N * np.concatenate(
        ([1.0], np.exp((i - 1) * math.log(min(1.0, c_far)) - special.gammaln(i + 1.0)))
    )
    vals = integrate_field(integrand, p, horizon=p.ts, tol=tol, envelope=envelope)
    vals = _field_weight(p) * p.p1 * np.atleast_1d(vals)
    return float(vals[0]), _unscale(vals[1:], scaled)


def _curve_from_masses(mass0, mass1):
    eta_max = mass0.size
    peb0 = np.ones(eta_max + 1)
    peb1 = np.zeros(eta_max + 1)
    peb0[1:] = 1.0 - np.cumsum(mass0)
    peb1[1:] = np.cumsum(mass1)
    return np.clip(peb0, 0.0, 1.0), np.clip(peb1, 0.0, 1.0)


def ber_no_isi_curve(rd: float, eta_max: int, p: SystemParams, coeffs=None):
    """``(peb0, peb1)`` arrays for every threshold ``0..eta_max`` at fixed ``rd``."""
    _check_rd(rd, p)
    eta_max = _check_eta(eta_max)
    if eta_max == 0:
        return np.ones(1), np.zeros(1)
    if coeffs is None:
        coeffs = alpha_coeffs(eta_max, p, scaled=True)
    alpha0, alphas = coeffs
    if alphas.size < eta_max - 1:
        raise DomainError("precomputed coefficients are too short for eta_max")
    alphas = alphas[: eta_max - 1]
    signal = p.N * absorb_fraction(p.ts, rd, p)
    beta = alphas.copy()
    if beta.size:
        beta[0] += signal
    mass0 = _masses(log_scaled_bell(alphas, eta_max - 1, scaled=True), alpha0)
    mass1 = _masses(log_scaled_bell(beta, eta_max - 1, scaled=True), alpha0 + signal)
    return _curve_from_masses(mass0, mass1)


def ber_no_isi_fixed(rd: float, eta: int, p: SystemParams, coeffs=None) -> BerResult:
    """Error probabilities without ISI for a tagged transmitter at ``rd``."""
    eta = _check_eta(eta)
    _check_rd(rd, p)
    if eta == 0:
        return _result(1.0, 0.0, 0, "analytic_no_isi", p)
    peb0, peb1 = ber_no_isi_curve(rd, eta, p, coeffs)
    return _result(peb0[eta], peb1[eta], eta, "analytic_no_isi", p)


def ber_no_isi_eta1_equiprobable(rd: float, p: SystemParams) -> float:
    """Total error at ``eta = 1`` for equiprobable bits, in closed form."""
    if abs(p.p1 - 0.5) > 1e-12:
        raise DomainError(f"equiprobable closed form needs p1 = 0.5, got {p.p1}")
    _check_rd(rd, p)
    field_term, _ = alpha_coeffs(1, p)
    detect = -math.expm1(-p.N * absorb_fraction(p.ts, rd, p))
    return 0.5 * (1.0 - math.exp(-field_term) * detect)


def _signal_moments(dist: DistanceDistribution, k_max: int, p: SystemParams):
    """``E_R[exp(-c) c^i / i!]`` for ``i = 0..k_max``, ``c = N f(ts, R)``."""
    return np.atleast_1d(
        dist.expect(lambda r: _poisson_masses(p.N * absorb_fraction(p.ts, r, p), k_max))
    )


def ber_no_isi_random_curve(dist: DistanceDistribution, eta_max: int, p: SystemParams, coeffs=None):
    """``(peb0, peb1)`` for thresholds ``0..eta_max`` with a random tagged distance.

    The bit-1 masses use the binomial expansion of the shifted Bell
    polynomial, so the distance average only touches the Poisson factors.
    """
    dist.validate(p.a)
    eta_max = _check_eta(eta_max)
    if eta_max == 0:
        return np.ones(1), np.zeros(1)
    if coeffs is None:
        coeffs = alpha_coeffs(eta_max, p, scaled=True)
    alpha0, alphas = coeffs
    alphas = alphas[: eta_max - 1]
    mass0 = _masses(log_scaled_bell(alphas, eta_max - 1, scaled=True), alpha0)
    moments = _signal_moments(dist, eta_max - 1, p)
    mass1 = _convolve_truncated(mass0, moments, eta_max)
    return _curve_from_masses(mass0, mass1)


def ber_no_isi_random(dist: DistanceDistribution, eta: int, p: SystemParams, coeffs=None) -> BerResult:
    eta = _check_eta(eta)
    dist.validate(p.a)
    if eta == 0:
        return _result(1.0, 0.0, 0, "analytic_no_isi", p)
    peb0, peb1 = ber_no_isi_random_curve(dist, eta, p, coeffs)
    return _result(peb0[eta], peb1[eta], eta, "analytic_no_isi", p)


# --------------------------------------------------------------------------
# ISI over L slots


def e_lk(z, l: int, k: int, p: SystemParams):
    """``p0 * 1(k=0) + p1 * (h_z[l] N)^k exp(-h_z[l] N)``."""
    if l < 0 or k < 0:
        raise DomainError("slot index and order must be non-negative")
    z = np.asarray(z, dtype=float)
    c = p.N * slot_taps(z, l + 1, p)[..., l]
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.exp(special.xlogy(k, c) - c)
    out = p.p1 * term + (p.p0 if k == 0 else 0.0)
    return float(out) if out.ndim == 0 else out


def _mark_masses(c, k_max, p):
    """``e_{l,k} / k!`` for ``k = 0..k_max``; leading axis ``k``."""
    out = p.p1 * _poisson_masses(c, k_max)
    out[0] += p.p0
    return out


def isi_field_coeffs(eta: int, L: int, p: SystemParams, tol: float = _TOL, scaled: bool = False):
    """``(xi, eps)`` for the ISI model.

    ``xi`` is the exponent of the field's Laplace functional at unit
    argument, ``4 pi lam int (1 - prod_l e_{l,0}(z)) z^2 dz``, and
    ``eps = [eps_1 .. eps_{eta-1}]`` (divided by ``i!`` when ``scaled``).
    """
    if eta < 1 or int(eta) != eta:
        raise DomainError(f"eta must be a positive integer, got {eta}")
    if L < 1:
        raise DomainError(f"L must be >= 1, got {L}")
    K = int(eta) - 1
    if p.lam == 0 or p.p1 == 0 or p.N == 0:
        return 0.0, np.zeros(K)

    def integrand(z):
        c = p.N * slot_taps(z, L, p)  # (nz, L)
        log_silent = np.log1p(p.p1 * np.expm1(-c)).sum(axis=-1)
        conv = _mark_masses(c[:, 0], K, p)
        for l in range(1, L):
            conv = _convolve_truncated(conv, _mark_masses(c[:, l], K, p), K + 1)
        return np.vstack([-np.expm1(log_silent), conv[1:]])

    horizon = L * p.ts
    # the count from one interferer is dominated by Poisson(N f(horizon, z))
    c_far = p.N * absorb_fraction(horizon, truncation_radius(p, horizon), p)
    i = np.arange(1, K + 1)
    envelope = p.N * np.concatenate(
        ([1.0], np.exp((i - 1) * math.log(min(1.0, c_far)) - special.gammaln(i + 1.0)))
    )
    vals = integrate_field(integrand, p, horizon=horizon, tol=tol, envelope=envelope)
    vals = _field_weight(p) * np.atleast_1d(vals)
    return float(vals[0]), _unscale(vals[1:], scaled)


def epsilon_coeffs(eta: int, L: int, p: SystemParams) -> np.ndarray:
    return isi_field_coeffs(eta, L, p)[1]


def ber_isi_curve(rd: float, eta_max: int, L: int, p: SystemParams, coeffs=None):
    """``(peb0, peb1)`` for thresholds ``0..eta_max`` with ISI from ``L - 1`` slots.

    The sum over weak compositions of ``n`` factorizes into a Cauchy
    product of the tagged transmitter's per-slot mark masses with the
    Bell-polynomial masses of the field.
    """
    _check_rd(rd, p)
    eta_max = _check_eta(eta_max)
    if eta_max == 0:
        return np.ones(1), np.zeros(1)
    if coeffs is None:
        coeffs = isi_field_coeffs(eta_max, L, p, scaled=True)
    xi, eps = coeffs
    eps = eps[: eta_max - 1]
    K = eta_max - 1
    c_tag = p.N * slot_taps(rd, L, p)
    theta = eps.copy()
    if theta.size:
        theta[0] += c_tag[0]
    mass0 = _masses(log_scaled_bell(eps, K, scaled=True), xi)
    mass1 = _masses(log_scaled_bell(theta, K, scaled=True), xi + c_tag[0])
    for l in range(1, L):
        marks = _mark_masses(c_tag[l], K, p)
        mass0 = _convolve_truncated(mass0, marks, eta_max)
        mass1 = _convolve_truncated(mass1, marks, eta_max)
    return _curve_from_masses(mass0, mass1)


def ber_isi_fixed(rd: float, eta: int, L: int, p: SystemParams, coeffs=None) -> BerResult:
    eta = _check_eta(eta)
    _check_rd(rd, p)
    if L < 1:
        raise DomainError(f"L must be >= 1, got {L}")
    if eta == 0:
        return _result(1.0, 0.0, 0, "analytic_isi", p)
    peb0, peb1 = ber_isi_curve(rd, eta, L, p, coeffs)
    return _result(peb0[eta], peb1[eta], eta, "analytic_isi", p)


# --------------------------------------------------------------------------
# Thresholds


def default_eta_max(p: SystemParams, rd: float | None = None) -> int:
    """Scan limit that safely covers the optimal threshold.

    Uses an upper bound on the mean count given bit 1: the signal plus
    the interference a single slot of the field can deliver.
    """
    horizon = p.ts
    field_mean = _field_weight(p) * p.p1 * p.N * p.a * (
        p.D * horizon + p.a * math.sqrt(4.0 * p.D * horizon / math.pi)
    )
    signal = p.N * (absorb_fraction(p.ts, rd, p) if rd is not None else 1.0)
    m = signal + field_mean
    return int(math.ceil(m + 6.0 * math.sqrt(m) + 5.0))


def _scan(pe):
    idx = int(np.argmin(pe))  # argmin returns the first minimizer
    return idx, float(pe[idx])


def optimal_threshold(
    rd: float,
    p: SystemParams,
    method: str = "analytic_no_isi",
    eta_max: int | None = None,
    L: int = 5,
    coeffs=None,
):
    """``(eta_opt, pe_min)`` by exhaustive scan of ``eta = 0..eta_max``.

    Ties resolve to the smallest threshold.
    """
    if eta_max is None:
        eta_max = default_eta_max(p, rd)
    if eta_max < 1:
        raise DomainError("eta_max must be >= 1")
    if method == "analytic_no_isi":
        peb0, peb1 = ber_no_isi_curve(rd, eta_max, p, coeffs)
    elif method == "analytic_isi":
        peb0, peb1 = ber_isi_curve(rd, eta_max, L, p, coeffs)
    else:
        raise DomainError(f"unknown analytic method {method!r}")
    return _scan(total_ber(peb0, peb1, p))


@dataclass(frozen=True)
class ThresholdTable:
    """Optimal threshold per tagged distance on an evenly spaced grid."""

    rd_grid: np.ndarray = field(repr=False)
    eta_opt: np.ndarray = field(repr=False)
    pe_min: np.ndarray = field(repr=False)
    params_hash: str = ""

    @property
    def step(self) -> float:
        return float(self.rd_grid[1] - self.rd_grid[0]) if self.rd_grid.size > 1 else 0.0

    def lookup(self, rd):
        """Threshold of the grid point nearest to ``rd``, the lower one on a tie
        (clamped to the grid)."""
        rd = np.asarray(rd, dtype=float)
        if self.rd_grid.size == 1:
            idx = np.zeros(rd.shape, dtype=int)
        else:
            idx = np.clip(np.ceil((rd - self.rd_grid[0]) / self.step - 0.5).astype(int), 0, self.rd_grid.size - 1)
        out = self.eta_opt[idx]
        return int(out) if out.ndim == 0 else out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rd_um", "eta_opt", "pe_min"])
            for r, e, pe in zip(self.rd_grid, self.eta_opt, self.pe_min):
                writer.writerow([f"{r:.17g}", int(e), f"{pe:.17g}"])

    @classmethod
    def from_csv(cls, path, params_hash: str = "") -> "ThresholdTable":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        return cls(
            np.array([float(r["rd_um"]) for r in rows]),
            np.array([int(r["eta_opt"]) for r in rows]),
            np.array([float(r["pe_min"]) for r in rows]),
            params_hash,
        )


def build_threshold_table(
    b: float, c: float, step: float, p: SystemParams, eta_max: int | None = None
) -> ThresholdTable:
    """Optimal no-ISI threshold on the grid ``b, b + step, ..., c``."""
    if not (p.a < b < c) or not step > 0:
        raise DomainError("need a < b < c and step > 0")
    n = int(math.floor((c - b) / step + 1e-9)) + 1
    grid = b + step * np.arange(n)
    if eta_max is None:
        eta_max = default_eta_max(p, b)
    coeffs = alpha_coeffs(eta_max, p, scaled=True)
    eta_opt = np.empty(n, dtype=int)
    pe_min = np.empty(n)
    for i, rd in enumerate(grid):
        eta_opt[i], pe_min[i] = optimal_threshold(rd, p, eta_max=eta_max, coeffs=coeffs)
    return ThresholdTable(grid, eta_opt, pe_min, p.digest())


def _peb1_no_isi_vec(r, eta, p, mass0):
    """Bit-1 error at threshold ``eta`` for an array of distances."""
    if eta == 0:
        return np.zeros_like(r)
    poisson = _poisson_masses(p.N * absorb_fraction(p.ts, r, p), eta - 1)
    mass1 = _convolve_truncated(mass0[:eta, None], poisson, eta)
    return mass1.sum(axis=0)


def adaptive_policy_ber(table: ThresholdTable, dist: DistanceDistribution, p: SystemParams, coeffs=None) -> BerResult:
    """Expected error when the threshold follows ``table.lookup(rd)``."""
    dist.validate(p.a)
    eta_top = int(table.eta_opt.max())
    if coeffs is None:
        coeffs = alpha_coeffs(max(eta_top, 1), p, scaled=True)
    mass0 = _masses(log_scaled_bell(coeffs[1][: max(eta_top - 1, 0)], max(eta_top - 1, 0), scaled=True), coeffs[0])
    cum0 = np.concatenate(([0.0], np.cumsum(mass0)))

    if dist.kind == "fixed":
        eta = table.lookup(dist.lo)
        peb1 = float(_peb1_no_isi_vec(np.array([dist.lo]), eta, p, mass0)[0])
        return _result(1.0 - cum0[eta], peb1, None, "analytic_no_isi_adaptive", p)

    grid = table.rd_grid
    mids = 0.5 * (grid[1:] + grid[:-1])
    edges = np.concatenate(([dist.lo], mids[(mids > dist.lo) & (mids < dist.hi)], [dist.hi]))
    peb0 = 0.0
    peb1 = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        eta = table.lookup(0.5 * (lo + hi))
        if dist.kind == "uniform":
            weight = lambda r: np.full_like(r, 1.0 / (dist.hi - dist.lo))
        else:
            weight = dist.pdf
        prob = integrate_adaptive(lambda r: np.asarray(weight(r), float), lo, hi, tol=1e-12)
        peb0 += prob * (1.0 - cum0[eta])
        if eta > 0:
            peb1 += integrate_adaptive(
                lambda r: _peb1_no_isi_vec(r, eta, p, mass0) * weight(r), lo, hi, tol=1e-10
            )
    return _result(peb0, peb1, None, "analytic_no_isi_adaptive", p)


def best_single_threshold(dist: DistanceDistribution, p: SystemParams, eta_max: int | None = None, coeffs=None):
    """``(eta_opt, pe_min)`` of one threshold used for every tagged distance."""
    if eta_max is None:
        eta_max = default_eta_max(p, dist.lo)
    peb0, peb1 = ber_no_isi_random_curve(dist, eta_max, p, coeffs)
    return _scan(total_ber(peb0, peb1, p))
