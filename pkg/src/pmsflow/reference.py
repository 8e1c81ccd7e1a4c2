"""Closed-form reference profiles used to check the solver.

Two families:

* ``QuarterCircleProfile``: two quarter circles on (0, 2) stacked with a
  vertical jump at x = 1.  Each branch is a unit-curvature graph meeting
  the boundary with zero slope, so while the jump persists the flow just
  translates the branches vertically at speed -1 (upper) and +1 (lower),
  the jump height is c - 2t, and the jump disappears at t = c/2.

* ``RadialSubsolution``: v(t, r) = a(t)/r with a(t) = max(1 - (N-1) t, 0)
  on the unit ball in ambient dimension N >= 3.  Its flow residual is
  nonpositive while a > 0, which is the comparison-principle ingredient
  behind steep gradients persisting near the origin until t = 1/(N-1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["QuarterCircleProfile", "RadialSubsolution"]


def _as_float_array(x):
    a = np.asarray(x, dtype=float)
    return a, a.ndim == 0


@dataclass(frozen=True)
class QuarterCircleProfile:
    """Stacked quarter circles on (0, 2) with a jump of height c at x = 1."""

    c: float

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError(f"offset c must be positive, got {self.c}")

    @property
    def extinction_time(self) -> float:
        """Time at which the jump height c - 2t reaches zero."""
        return 0.5 * self.c

    def jump_height(self, t: float) -> float:
        self._check_time(t)
        return self.c - 2.0 * float(t)

    def initial(self, x):
        """Initial profile: sqrt(1-x^2) + c on (0,1), -sqrt(1-(2-x)^2) on (1,2)."""
        return self.solution(0.0, x)

    def solution(self, t: float, x):
        """Profile at time t in [0, c/2): both branches translated by t.

        Raises:
            ValueError: x outside (0, 2) or exactly at the jump x = 1;
                t negative or past the extinction time c/2.
        """
        self._check_time(t)
        xa, scalar = _as_float_array(x)
        if np.any(xa <= 0.0) or np.any(xa >= 2.0) or np.any(xa == 1.0):
            raise ValueError("x must lie in (0, 2) and avoid the jump at x = 1")
        upper = xa < 1.0
        out = np.empty_like(xa)
        out[upper] = -t + np.sqrt(1.0 - xa[upper] ** 2) + self.c
        lower = ~upper
        out[lower] = t - np.sqrt(1.0 - (2.0 - xa[lower]) ** 2)
        return float(out) if scalar else out

    def _check_time(self, t: float):
        if t < 0.0:
            raise ValueError(f"time must be nonnegative, got {t}")
        if t >= self.extinction_time:
            raise ValueError(
                f"profile formula only asserted for t < c/2 = {self.extinction_time}, got {t}"
            )


@dataclass(frozen=True)
class RadialSubsolution:
    """v(t, r) = max(1 - (N-1) t, 0) / r on the unit ball, N >= 3."""

    dimension: int

    def __post_init__(self):
        if self.dimension < 3:
            raise ValueError(f"ambient dimension must be >= 3, got {self.dimension}")

    @property
    def extinction_time(self) -> float:
        return 1.0 / (self.dimension - 1)

    def coefficient(self, t: float) -> float:
        if t < 0.0:
            raise ValueError(f"time must be nonnegative, got {t}")
        return max(1.0 - (self.dimension - 1) * float(t), 0.0)

    def value(self, t: float, r):
        ra, scalar = _as_float_array(r)
        if np.any(ra <= 0.0):
            raise ValueError("radius must be positive")
        out = self.coefficient(t) / ra
        return float(out) if scalar else out

    def residual(self, t: float, r):
        """v_t minus the flow divergence term; nonpositive away from the kink.

        With a = a(t) and A = a^2 + r^4 the divergence of the saturating
        flux field of v is

            div z = -a * [ (N-3) / (r sqrt(A)) + 2 a^2 / (r A^(3/2)) ],

        and v_t = -(N-1)/r while a > 0.  Since a/sqrt(A) <= 1 the residual
        v_t - div z is <= 0.  Past the kink v vanishes identically and the
        residual is 0.

        Raises:
            ValueError: exactly at the kink t = 1/(N-1), where a(t) has no
                derivative.
        """
        n = self.dimension
        if t == self.extinction_time:
            raise ValueError(f"coefficient is not differentiable at t = {t}")
        ra, scalar = _as_float_array(r)
        if np.any(ra <= 0.0):
            raise ValueError("radius must be positive")
        a = self.coefficient(t)
        if a == 0.0:
            out = np.zeros_like(ra)
            return float(out) if scalar else out
        big_a = a * a + ra ** 4
        div_term = -a * ((n - 3) / (ra * np.sqrt(big_a)) + 2.0 * a * a / (ra * big_a ** 1.5))
        v_t = -(n - 1) / ra
        out = v_t - div_term
        return float(out) if scalar else out
