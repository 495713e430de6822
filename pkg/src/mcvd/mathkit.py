"""Special functions and combinatorics shared by the analytical modules.

Bell polynomials are built with the binomial recurrence; the error-probability
assemblies use the log-scaled variant so that ``exp(-alpha0) * B_n / n!``
stays representable when the interferer field is dense.
"""

from __future__ import annotations

from typing import Callable, Iterator, Sequence

import numpy as np
from scipy import special

from .exceptions import DomainError, NumericError

__all__ = [
    "bell_sequence",
    "log_scaled_bell",
    "weak_compositions",
    "erfc",
    "erfcx",
    "poisson_cdf",
    "poisson_logpmf",
    "integrate_adaptive",
    "integrate_radial",
]


def _coefficients(a: Sequence[float], n_max: int) -> np.ndarray:
    if n_max < 0:
        raise DomainError(f"n_max must be >= 0, got {n_max}")
    arr = np.zeros(n_max, dtype=float)
    vals = np.asarray(a, dtype=float).ravel()[:n_max]
    if not np.all(np.isfinite(vals)):
        raise DomainError("Bell polynomial coefficients must be finite")
    arr[: vals.size] = vals
    return arr


def bell_sequence(a: Sequence[float], n_max: int) -> np.ndarray:
    """Complete exponential Bell polynomials ``B_0 .. B_{n_max}`` of ``a``.

    ``a[0]`` plays the role of ``a_1``. Missing trailing coefficients are
    taken as zero. Uses ``B_{n+1} = sum_i C(n, i) a_{i+1} B_{n-i}``.
    """
    coef = _coefficients(a, n_max)
    out = np.zeros(n_max + 1)
    out[0] = 1.0
    for n in range(n_max):
        i = np.arange(n + 1)
        binom = special.comb(n, i, exact=False)
        out[n + 1] = np.dot(binom * coef[: n + 1], out[n::-1])
    return out


def log_scaled_bell(a: Sequence[float], n_max: int, scaled: bool = False) -> np.ndarray:
    """``log(B_n(a) / n!)`` for ``n = 0..n_max``, for non-negative ``a``.

    Works on ``b_n = B_n / n!`` through
    ``b_{n+1} = (n+1)^-1 sum_i (a_{i+1} / i!) b_{n-i}``, entirely in log
    space. Entries equal to ``-inf`` mean the polynomial is exactly zero.
    With ``scaled=True`` the input holds ``a_j / j!`` instead of ``a_j``,
    which keeps high-order coefficients representable.
    """
    coef = _coefficients(a, n_max)
    if np.any(coef < 0):
        raise DomainError("log_scaled_bell requires non-negative coefficients")
    j = np.arange(1, n_max + 1)
    with np.errstate(divide="ignore"):
        if scaled:
            log_w = np.log(coef) + np.log(j)
        else:
            log_w = np.log(coef) - special.gammaln(j)
    out = np.full(n_max + 1, -np.inf)
    out[0] = 0.0
    for n in range(n_max):
        out[n + 1] = special.logsumexp(log_w[: n + 1] + out[n::-1]) - np.log(n + 1)
    return out


def weak_compositions(n: int, L: int) -> Iterator[tuple[int, ...]]:
    """Yield every ``L``-tuple of non-negative integers summing to ``n``.

    Tuples come out in lexicographic order; there are ``C(n+L-1, L-1)``.
    """
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if L <= 0:
        if L == 0 and n == 0:
            yield ()
        return
    if L == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in weak_compositions(n - first, L - 1):
            yield (first,) + rest


def erfc(x):
    """Complementary error function (scipy-backed)."""
    return special.erfc(x)


def erfcx(x):
    """Scaled complementary error function ``exp(x**2) * erfc(x)``."""
    return special.erfcx(x)


def poisson_cdf(k, nu):
    """``P(Y <= k)`` for ``Y ~ Poisson(nu)``; ``k = -1`` gives 0.

    Evaluated through the regularized upper incomplete gamma function,
    which is accurate well beyond ``nu = 1e5``.
    """
    k = np.asarray(k)
    nu = np.asarray(nu, dtype=float)
    if np.any(nu < 0) or np.any(~np.isfinite(nu)):
        raise DomainError("Poisson mean must be finite and non-negative")
    if np.any(k < -1):
        raise DomainError("k must be >= -1")
    kk = np.maximum(k, 0).astype(float)
    with np.errstate(invalid="ignore"):
        out = np.where(nu > 0, special.gammaincc(kk + 1.0, np.where(nu > 0, nu, 1.0)), 1.0)
    out = np.where(k < 0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def poisson_logpmf(k, nu):
    """Log of the Poisson mass at ``k`` (``-inf`` where the mass is zero)."""
    k = np.asarray(k, dtype=float)
    nu = np.asarray(nu, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = special.xlogy(k, nu) - nu - special.gammaln(k + 1)
    out = np.where(k < 0, -np.inf, out)
    return float(out) if out.ndim == 0 else out


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _panel_rule(lo: np.ndarray, hi: np.ndarray):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    weights = half[:, None] * _GL_WEIGHTS[None, :]
    return nodes, weights


def integrate_adaptive(
    g: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float = np.inf,
    tol: float = 1e-10,
    breaks: Sequence[float] | None = None,
    max_panels: int = 20000,
):
    """Adaptive Gauss-Legendre quadrature of ``int_lo^hi g(x) dx``.

    ``g`` must be vectorized: given a 1-D array of abscissae it returns an
    array whose last axis runs over them. Leading axes are integrated
    componentwise, each to relative tolerance ``tol``. An infinite ``hi`` is
    mapped onto ``[0, 1)`` by ``x = lo + s / (1 - s)``.

    Panels use 16 nodes; a panel's error estimate is the difference between
    the whole-panel rule and the rule applied to its two halves.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    if np.isinf(hi):
        def integrand(s):
            one_minus = 1.0 - s
            return np.asarray(g(lo + s / one_minus), dtype=float) / (one_minus * one_minus)

        edges = np.linspace(0.0, 1.0, 17)
        scale = 1.0
    else:
        if not hi > lo:
            raise DomainError(f"upper limit {hi} must exceed lower limit {lo}")

        def integrand(x):
            return np.asarray(g(x), dtype=float)

        if breaks is None:
            edges = np.linspace(lo, hi, 9)
        else:
            edges = np.unique(np.clip(np.concatenate(([lo], np.asarray(breaks, float), [hi])), lo, hi))
        scale = max(abs(lo), abs(hi), 1.0)

    def evaluate(left, right):
        mid = 0.5 * (left + right)
        nodes, weights = _panel_rule(
            np.concatenate([left, left, mid]), np.concatenate([right, mid, right])
        )
        vals = integrand(nodes.ravel())
        vals = vals.reshape(vals.shape[:-1] + nodes.shape)
        parts = np.sum(vals * weights, axis=-1)
        m = left.size
        whole = parts[..., :m]
        halves = parts[..., m : 2 * m] + parts[..., 2 * m :]
        return halves, np.abs(halves - whole)

    left, right = edges[:-1], edges[1:]
    est, err = evaluate(left, right)
    done_est = np.zeros(est.shape[:-1])
    done_err = np.zeros(est.shape[:-1])
    n_panels = left.size
    while True:
        total = done_est + est.sum(axis=-1)
        total_err = done_err + err.sum(axis=-1)
        budget = tol * np.abs(total)
        if np.all(total_err <= budget + 1e-300):
            break
        # split every panel whose error exceeds its fair share of the budget
        share = (budget[..., None] + 1e-300) / left.size
        bad = err > share
        if bad.ndim > 1:
            bad = np.any(bad, axis=tuple(range(bad.ndim - 1)))
        bad &= (right - left) > 1e-13 * scale
        if not np.any(bad) or n_panels > max_panels:
            rel = np.max(total_err / (np.abs(total) + 1e-300))
            raise NumericError(
                f"quadrature did not reach tol={tol:g} (estimated relative error {rel:.3g})",
                partial=total if total.ndim else float(total),
            )
        done_est = done_est + est[..., ~bad].sum(axis=-1)
        done_err = done_err + err[..., ~bad].sum(axis=-1)
        mid = 0.5 * (left[bad] + right[bad])
        left, right = np.concatenate([left[bad], mid]), np.concatenate([mid, right[bad]])
        n_panels += int(bad.sum())
        est, err = evaluate(left, right)
    return float(total) if np.ndim(total) == 0 else total


def integrate_radial(
    g: Callable[[np.ndarray], np.ndarray],
    a: float,
    tol: float = 1e-10,
    r_max: float | None = None,
):
    """``int_a^r_max g(z) z^2 dz`` (``r_max=None`` means infinity).

    Finite ranges start from panels that are geometrically refined towards
    ``a``, where channel integrands are concentrated.
    """
    if r_max is None or np.isinf(r_max):
        return integrate_adaptive(lambda z: np.asarray(g(z), dtype=float) * (z * z), a, np.inf, tol=tol)
    if r_max <= a:
        raise DomainError(f"r_max ({r_max}) must exceed a ({a})")
    breaks = a + (r_max - a) * 2.0 ** -np.arange(14, 0, -1)
    return integrate_adaptive(lambda z: np.asarray(g(z), dtype=float) * (z * z), a, r_max, tol=tol, breaks=breaks)
