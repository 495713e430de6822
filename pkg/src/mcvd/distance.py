"""Distribution of the tagged transmitter's distance from the receiver centre."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import DomainError
from .mathkit import integrate_adaptive

__all__ = ["DistanceDistribution"]


@dataclass(frozen=True)
class DistanceDistribution:
    """Point mass, uniform, or user-supplied density over ``(lo, hi)``.

    Build instances with :meth:`fixed`, :meth:`uniform` or :meth:`custom`.
    """

    kind: str
    lo: float
    hi: float
    pdf: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False, compare=False)
    _cdf_grid: tuple | None = field(default=None, repr=False, compare=False)

    @classmethod
    def fixed(cls, rd: float) -> "DistanceDistribution":
        return cls("fixed", float(rd), float(rd))

    @classmethod
    def uniform(cls, b: float, c: float) -> "DistanceDistribution":
        if not c > b:
            raise DomainError(f"uniform distance needs b < c, got b={b}, c={c}")
        return cls("uniform", float(b), float(c))

    @classmethod
    def custom(cls, pdf, lo: float, hi: float, tol: float = 1e-8) -> "DistanceDistribution":
        """Arbitrary density on ``[lo, hi]``; must integrate to one within ``tol``."""
        if not hi > lo:
            raise DomainError("custom support needs lo < hi")
        mass = integrate_adaptive(lambda r: np.asarray(pdf(r), dtype=float), lo, hi, tol=1e-12)
        if abs(mass - 1.0) > tol:
            raise DomainError(f"custom density integrates to {mass!r}, not 1")
        grid = np.linspace(lo, hi, 4097)
        dens = np.asarray(pdf(grid), dtype=float)
        if np.any(dens < 0):
            raise DomainError("custom density must be non-negative")
        cdf = np.concatenate(([0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))))
        cdf /= cdf[-1]
        return cls("custom", float(lo), float(hi), pdf, (grid, cdf))

    def validate(self, a: float) -> None:
        """Raise unless the support lies strictly outside the receiver."""
        if not self.lo > a:
            raise DomainError(f"distance support must lie beyond a={a}, starts at {self.lo}")

    @property
    def mean(self) -> float:
        if self.kind == "fixed":
            return self.lo
        if self.kind == "uniform":
            return 0.5 * (self.lo + self.hi)
        return self.expect(lambda r: r[None, :])[0]

    def expect(self, func, tol: float = 1e-12):
        """``E[func(R)]`` for a vectorized ``func`` (last axis over radii)."""
        if self.kind == "fixed":
            return np.asarray(func(np.array([self.lo])), dtype=float)[..., 0]
        if self.kind == "uniform":
            width = self.hi - self.lo
            return integrate_adaptive(
                lambda r: np.asarray(func(r), dtype=float) / width, self.lo, self.hi, tol=tol
            )
        return integrate_adaptive(
            lambda r: np.asarray(func(r), dtype=float) * np.asarray(self.pdf(r), dtype=float),
            self.lo,
            self.hi,
            tol=tol,
        )

    def sample(self, rng: np.random.Generator, size=None):
        if self.kind == "fixed":
            return self.lo if size is None else np.full(size, self.lo)
        if self.kind == "uniform":
            return rng.uniform(self.lo, self.hi, size)
        grid, cdf = self._cdf_grid
        u = rng.uniform(0.0, 1.0, size)
        return np.interp(u, cdf, grid)
