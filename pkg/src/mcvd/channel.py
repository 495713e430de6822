"""Diffusive channel towards a fully-absorbing spherical receiver.

Units throughout: micrometres, seconds, molecules.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import DomainError, NumericError
from .mathkit import erfc, erfcx, integrate_radial

__all__ = [
    "SystemParams",
    "SlotResponse",
    "hitting_rate",
    "absorb_fraction",
    "absorb_fraction_inf",
    "slot_response",
    "slot_taps",
    "truncation_radius",
    "radial_tail_bound",
    "integrate_field",
]

#: Minimum radius of the interferer region used for truncating radial integrals.
REGION_RADIUS_UM = 150.0


@dataclass(frozen=True)
class SystemParams:
    """Physical and protocol constants of the link.

    ``lam`` is the interferer density in TBN per cubic micrometre and ``N``
    the number of molecules released for a 1 bit. ``mu = 0`` means no
    degradation.
    """

    D: float = 74.9
    mu: float = 1.0
    a: float = 4.0
    N: int = 100
    ts: float = 0.5
    lam: float = 1e-5
    p1: float = 0.5

    def __post_init__(self):
        if not self.D > 0:
            raise DomainError(f"D must be positive, got {self.D}")
        if not self.a > 0:
            raise DomainError(f"a must be positive, got {self.a}")
        if not self.ts > 0:
            raise DomainError(f"ts must be positive, got {self.ts}")
        if not (self.mu >= 0 and math.isfinite(self.mu)):
            raise DomainError(f"mu must be finite and >= 0, got {self.mu}")
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise DomainError(f"lam must be finite and >= 0, got {self.lam}")
        if not 0.0 <= self.p1 <= 1.0:
            raise DomainError(f"p1 must lie in [0, 1], got {self.p1}")
        if self.N < 0 or int(self.N) != self.N:
            raise DomainError(f"N must be a non-negative integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def p0(self) -> float:
        return 1.0 - self.p1

    def replace(self, **changes) -> "SystemParams":
        values = asdict(self)
        values.update(changes)
        return SystemParams(**values)

    def digest(self) -> str:
        """Short stable identifier of these parameter values."""
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class SlotResponse:
    """Channel taps ``h_r[0..L-1]`` for a transmitter at distance ``r``."""

    r: float
    taps: np.ndarray = field(repr=False)

    @property
    def L(self) -> int:
        return int(self.taps.size)


def _check_radius(r, a):
    r = np.asarray(r, dtype=float)
    if np.any(r < a) or np.any(np.isnan(r)):
        raise DomainError(f"distance must be >= receiver radius a={a}")
    return r


def hitting_rate(tau, r, p: SystemParams):
    """Rate (1/s) at which molecules released at distance ``r`` hit the
    receiver surface at time ``tau``. Degradation is not included."""
    r = _check_radius(r, p.a)
    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0):
        raise DomainError("tau must be positive")
    d = r - p.a
    out = (p.a / r) * d / np.sqrt(4.0 * np.pi * p.D * tau**3) * np.exp(-(d * d) / (4.0 * p.D * tau))
    return float(out) if out.ndim == 0 else out


def absorb_fraction_inf(r, p: SystemParams):
    """Fraction of released molecules eventually absorbed (before degrading)."""
    r = _check_radius(r, p.a)
    out = (p.a / r) * np.exp(-math.sqrt(p.mu / p.D) * (r - p.a))
    return float(out) if out.ndim == 0 else out


def _absorbed_positive(t, r, p: SystemParams):
    """Absorbed fraction for finite ``t > 0`` and ``r >= a``, no checks."""
    d = r - p.a
    x = d / np.sqrt(4.0 * p.D * t)
    if p.mu == 0:
        return (p.a / r) * erfc(x)
    s = np.sqrt(p.mu * t)
    k = math.sqrt(p.mu / p.D)
    # exp(+k d) erfc(x + s) == exp(-(x^2 + mu t)) erfcx(x + s) because k d == 2 x s
    damp = np.exp(-(x * x + s * s))
    xm = x - s
    first = np.where(
        xm >= 0,
        damp * erfcx(np.maximum(xm, 0.0)),
        np.exp(-k * d) * erfc(np.minimum(xm, 0.0)),
    )
    return (p.a / (2.0 * r)) * (first + damp * erfcx(x + s))


def absorb_fraction(t, r, p: SystemParams):
    """Fraction of molecules absorbed within ``t`` seconds of release.

    ``t`` may be ``inf``. Broadcasts over ``t`` and ``r``.
    """
    r = _check_radius(r, p.a)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(np.isnan(t)):
        raise DomainError("t must be >= 0")
    r, t = np.broadcast_arrays(r, t)
    out = np.zeros(r.shape)
    inf = np.isinf(t)
    pos = (t > 0) & ~inf
    if np.any(inf):
        out[inf] = absorb_fraction_inf(r[inf], p)
    if np.any(pos):
        out[pos] = _absorbed_positive(t[pos], r[pos], p)
    return float(out) if out.ndim == 0 else out


def slot_taps(r, L: int, p: SystemParams) -> np.ndarray:
    """Taps for an array of distances; returns shape ``r.shape + (L,)``."""
    if L < 1:
        raise DomainError(f"L must be >= 1, got {L}")
    r = _check_radius(r, p.a)
    return _taps_unchecked(r, L, p)


def _taps_unchecked(r: np.ndarray, L: int, p: SystemParams) -> np.ndarray:
    cum = _absorbed_positive(p.ts * np.arange(1, L + 1), r[..., None], p)
    taps = np.empty(cum.shape)
    taps[..., 0] = cum[..., 0]
    np.subtract(cum[..., 1:], cum[..., :-1], out=taps[..., 1:])
    return np.maximum(taps, 0.0, out=taps)


def slot_response(r: float, L: int, p: SystemParams) -> SlotResponse:
    """Fraction of molecules absorbed in each of the ``L`` slots following release."""
    if np.ndim(r) != 0:
        raise DomainError("slot_response takes a scalar distance; use slot_taps for arrays")
    return SlotResponse(r=float(r), taps=slot_taps(float(r), L, p))


def truncation_radius(p: SystemParams, horizon: float = math.inf) -> float:
    """Outer radius for radial integrals of channel quantities observed
    within ``horizon`` seconds of release.

    Beyond ``a + 20 * sqrt(D/mu)`` the degradation envelope is below
    ``exp(-20)``; beyond ``a + 20 * sqrt(D * horizon)`` the diffusion
    envelope is below ``erfc(10)``. Never smaller than the 150 um region.
    """
    scales = []
    if p.mu > 0:
        scales.append(math.sqrt(p.D / p.mu))
    if math.isfinite(horizon):
        scales.append(math.sqrt(p.D * horizon))
    if not scales:
        raise DomainError("mu = 0 with an infinite horizon has no finite truncation radius")
    return p.a + max(REGION_RADIUS_UM, 20.0 * min(scales))


def radial_tail_bound(p: SystemParams, r_max: float, horizon: float = math.inf) -> float:
    """Upper bound on ``int_{r_max}^inf f(horizon, z) z^2 dz``."""
    a = p.a
    u = r_max - a
    bounds = []
    if p.mu > 0:
        k = math.sqrt(p.mu / p.D)
        bounds.append(a * math.exp(-k * u) * (r_max / k + 1.0 / (k * k)))
    if math.isfinite(horizon):
        c = 4.0 * p.D * horizon
        bounds.append(a * (0.5 * c * math.exp(-u * u / c) + 0.5 * a * math.sqrt(math.pi * c) * math.erfc(u / math.sqrt(c))))
    if not bounds:
        return math.inf
    return min(bounds)


def integrate_field(g, p: SystemParams, horizon: float = math.inf, tol: float = 1e-10, envelope=1.0):
    """``int_a^inf g(z) z^2 dz`` for integrands dominated far out by
    ``envelope * f(horizon, z)``.

    Starts from :func:`truncation_radius` and appends outer shells until the
    analytic tail bound falls below ``tol`` times the running result.
    ``envelope`` may be an array matching the leading shape of ``g``.
    """
    r_lo = p.a
    r_hi = truncation_radius(p, horizon)
    total = integrate_radial(g, r_lo, tol=tol, r_max=r_hi)
    envelope = np.asarray(envelope, dtype=float)
    for _ in range(60):
        tail = envelope * radial_tail_bound(p, r_hi, horizon)
        if np.all(tail <= tol * np.abs(total)):
            return total
        r_lo, r_hi = r_hi, p.a + 1.5 * (r_hi - p.a)
        total = total + integrate_radial(g, r_lo, tol=tol, r_max=r_hi)
    raise NumericError("radial integral tail did not fall below tolerance", partial=total)
