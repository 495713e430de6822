"""Expected molecule counts at the receiver in one slot.

Steady state assumes every transmitter has been signalling forever; the
transient forms assume transmissions started ``K - 1`` slots before the
current one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import (
    SystemParams,
    absorb_fraction,
    absorb_fraction_inf,
    integrate_field,
)
from .exceptions import DivergenceError, DomainError, NumericError

__all__ = [
    "ExpectationBreakdown",
    "expected_signal",
    "expected_isi",
    "expected_cci",
    "expected_cci_numeric",
    "expected_cci_transient",
    "expected_isi_transient",
    "expected_total",
    "expected_total_transient",
]


@dataclass(frozen=True)
class ExpectationBreakdown:
    e_s: float
    e_i: float
    e_c: float
    e_t: float
    regime: str = "steady"
    K: int | None = None


def _check_rd(rd, p):
    if not rd > p.a:
        raise DomainError(f"rd must exceed a={p.a}, got {rd}")


def _check_K(K):
    if K < 1 or int(K) != K:
        raise DomainError(f"K must be a positive integer, got {K}")


def expected_signal(rd: float, p: SystemParams) -> float:
    _check_rd(rd, p)
    return p.p1 * p.N * absorb_fraction(p.ts, rd, p)


def expected_isi(rd: float, p: SystemParams) -> float:
    _check_rd(rd, p)
    return p.p1 * p.N * (absorb_fraction_inf(rd, p) - absorb_fraction(p.ts, rd, p))


def expected_isi_transient(rd: float, K: int, p: SystemParams) -> float:
    """ISI when only ``K - 1`` earlier slots carried transmissions."""
    _check_rd(rd, p)
    _check_K(K)
    return p.p1 * p.N * (absorb_fraction(K * p.ts, rd, p) - absorb_fraction(p.ts, rd, p))


def expected_cci(p: SystemParams) -> float:
    """Steady-state co-channel interference from the Poisson field."""
    if p.mu == 0:
        raise DivergenceError(
            "steady-state CCI diverges without degradation (mu = 0); "
            "use expected_cci_transient instead"
        )
    r = math.sqrt(p.D / p.mu)
    return 4.0 * math.pi * p.lam * p.p1 * p.N * p.a * (r * r + p.a * r)


def expected_cci_numeric(p: SystemParams, horizon: float = math.inf, tol: float = 1e-11) -> float:
    """CCI by direct radial integration of the absorbed fraction.

    ``horizon`` is the time since the field started transmitting
    (``K * ts`` in the transient regime).
    """
    if p.lam == 0 or p.p1 == 0 or p.N == 0:
        return 0.0
    integral = integrate_field(lambda z: absorb_fraction(horizon, z, p), p, horizon, tol=tol)
    return 4.0 * math.pi * p.lam * p.p1 * p.N * integral


def expected_cci_transient(K: int, p: SystemParams, numeric: bool = False) -> float:
    """CCI after ``K - 1`` earlier slots of transmissions.

    The closed form holds only without degradation; ``numeric=True``
    integrates the field numerically for any ``mu``.
    """
    _check_K(K)
    horizon = K * p.ts
    if numeric:
        return expected_cci_numeric(p, horizon)
    if p.mu != 0:
        raise DomainError("closed-form transient CCI requires mu = 0; pass numeric=True")
    return 4.0 * math.pi * p.lam * p.p1 * p.N * p.a * (
        p.D * horizon + p.a * math.sqrt(4.0 * p.D * horizon / math.pi)
    )


def expected_total(rd: float, p: SystemParams) -> ExpectationBreakdown:
    e_s = expected_signal(rd, p)
    e_i = expected_isi(rd, p)
    e_c = expected_cci(p)
    e_t = e_s + e_i + e_c
    r = math.sqrt(p.D / p.mu)
    closed = p.p1 * p.N * p.a * (
        math.exp(-(rd - p.a) / r) / rd + 4.0 * math.pi * p.lam * (r * r + p.a * r)
    )
    if abs(closed - e_t) > 1e-9 * max(abs(closed), 1e-300):
        raise NumericError(f"total expectation mismatch: {e_t} vs closed form {closed}", partial=e_t)
    return ExpectationBreakdown(e_s, e_i, e_c, e_t)


def expected_total_transient(rd: float, K: int, p: SystemParams) -> ExpectationBreakdown:
    """Transient breakdown; CCI uses the closed form at ``mu = 0`` and
    numeric integration otherwise."""
    e_s = expected_signal(rd, p)
    e_i = expected_isi_transient(rd, K, p)
    e_c = expected_cci_transient(K, p, numeric=p.mu != 0)
    return ExpectationBreakdown(e_s, e_i, e_c, e_s + e_i + e_c, regime="transient", K=int(K))
