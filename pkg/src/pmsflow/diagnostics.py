"""Per-step measurements and the checks the flow is gated on.

A ``DiagnosticRecord`` is written at every time step; checks consume the
recorded series (or the stored states, for the contraction check) and
return ``Verdict`` objects whose ``passed`` flag is equivalent to
``worst_violation <= tolerance``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energy import area_energy
from .grid import CellField, cell_norm, colocated_magnitude, face_differences

__all__ = [
    "DiagnosticRecord",
    "Verdict",
    "measure",
    "jump_set",
    "default_jump_threshold",
    "regularization_time",
    "check_monotone",
    "check_ut_decay",
    "check_contraction",
]


@dataclass(frozen=True)
class DiagnosticRecord:
    """Scalar measurements of one stored time level."""

    t: float
    energy: float
    mean: float
    sup_norm: float
    lip: float
    ut_l2: float
    ut_sup: float
    max_face_diff: float
    jump_count: int

    FIELDS = ("t", "energy", "mean", "sup_norm", "lip", "ut_l2", "ut_sup",
              "max_face_diff", "jump_count")


@dataclass(frozen=True)
class Verdict:
    """Outcome of one check; ``passed`` iff ``worst_violation <= tolerance``."""

    name: str
    passed: bool
    worst_violation: float
    location: object
    tolerance: float
    detail: str = ""


def measure(
    u: CellField,
    u_prev: CellField | None,
    t: float,
    tau: float,
    kappa: float,
) -> DiagnosticRecord:
    """Measure one time level; velocity entries are 0 when u_prev is None."""
    g = u.grid
    if u_prev is None:
        ut_l2 = 0.0
        ut_sup = 0.0
    else:
        du = CellField(g, (u.values - u_prev.values) / tau)
        ut_l2 = cell_norm(du)
        ut_sup = float(np.max(np.abs(du.values)))
    diffs = face_differences(u)
    max_fd = max(float(np.max(np.abs(d))) if d.size else 0.0 for d in diffs)
    return DiagnosticRecord(
        t=float(t),
        energy=area_energy(u).total,
        mean=float(np.sum(g.cell_volumes * u.values)) / g.total_volume,
        sup_norm=float(np.max(np.abs(u.values))),
        lip=float(np.max(colocated_magnitude(u))),
        ut_l2=ut_l2,
        ut_sup=ut_sup,
        max_face_diff=max_fd,
        jump_count=len(jump_set(u, kappa)),
    )


def jump_set(u: CellField, kappa: float):
    """Faces whose raw value difference reaches the threshold kappa.

    Returns face indices (ints) on one-axis grids and (axis, i, j) tuples on
    rectangles.  The threshold applies to the difference, not the difference
    quotient, so it is a jump-height detector.
    """
    if kappa <= 0:
        raise ValueError(f"jump threshold must be positive, got {kappa}")
    diffs = face_differences(u)
    if u.grid.ndim == 1:
        return [int(i) for i in np.nonzero(np.abs(diffs[0]) >= kappa)[0]]
    out = []
    for axis, d in enumerate(diffs):
        for idx in zip(*np.nonzero(np.abs(d) >= kappa)):
            out.append((axis,) + tuple(int(i) for i in idx))
    return out


def default_jump_threshold(u0: CellField) -> float:
    """Threshold separating genuine jumps from resolved steep slopes.

    max(10 * sqrt(h * sup|u0|), 0.1 * initial max face difference), floored
    away from zero so constant data detects nothing rather than everything.
    """
    h = max(u0.grid.spacing)
    sup = float(np.max(np.abs(u0.values)))
    diffs = face_differences(u0)
    max_fd = max(float(np.max(np.abs(d))) if d.size else 0.0 for d in diffs)
    kappa = max(10.0 * np.sqrt(h * sup), 0.1 * max_fd)
    floor = 1e-12 * (1.0 + sup)
    return float(max(kappa, floor))


def regularization_time(traj, kappa: float | None = None):
    """First recorded time after which the jump set stays empty.

    With ``kappa=None`` the jump counts recorded during the run are used;
    passing a different kappa requires the trajectory to have stored states
    (``keep="all"``).  Returns ``times[0]`` when no record ever jumps and
    ``None`` when jumps persist through the final record.
    """
    if kappa is None or kappa == traj.kappa:
        counts = [rec.jump_count for rec in traj.records]
    else:
        if traj.states is None:
            raise ValueError("recomputing with a different kappa needs keep='all'")
        counts = [len(jump_set(s, kappa)) for s in traj.states]
    nonzero = [k for k, c in enumerate(counts) if c > 0]
    if not nonzero:
        return float(traj.times[0])
    last = nonzero[-1]
    if last == len(counts) - 1:
        return None
    return float(traj.times[last + 1])


def check_monotone(series, tolerance: float, name: str = "monotone") -> Verdict:
    """Pass iff no increment of the series exceeds the tolerance."""
    s = np.asarray(series, dtype=float)
    if s.size < 2:
        return Verdict(name, True, 0.0, None, float(tolerance))
    inc = np.diff(s)
    k = int(np.argmax(inc))
    worst = max(0.0, float(inc[k]))
    return Verdict(
        name=name,
        passed=worst <= tolerance,
        worst_violation=worst,
        location=k + 1,
        tolerance=float(tolerance),
        detail=f"largest increment {worst:.3e} at index {k + 1} of {s.size}",
    )


def check_ut_decay(traj, slack: float = 1.5) -> Verdict:
    """Velocity decay gate: ut_l2(t) <= slack * |u0|_w / t at every step."""
    worst = 0.0
    where = None
    for rec in traj.records:
        if rec.t <= 0.0:
            continue
        excess = rec.ut_l2 - slack * traj.u0_norm / rec.t
        if excess > worst:
            worst, where = excess, rec.t
    return Verdict(
        name="ut_decay",
        passed=worst <= 0.0,
        worst_violation=worst,
        location=where,
        tolerance=0.0,
        detail=f"slack {slack}, |u0|_w = {traj.u0_norm:.6g}",
    )


def check_contraction(traj_a, traj_b) -> Verdict:
    """Weighted-L2 distance between two runs may grow at most 2*inner_tol per step."""
    if not traj_a.grid.same_layout(traj_b.grid):
        raise ValueError("trajectories live on different grids")
    if traj_a.states is None or traj_b.states is None:
        raise ValueError("contraction check needs keep='all' trajectories")
    if len(traj_a.states) != len(traj_b.states) or not np.allclose(
        traj_a.times, traj_b.times
    ):
        raise ValueError("trajectories must share their time grid")
    dist = np.array(
        [
            cell_norm(CellField(traj_a.grid, a.values - b.values))
            for a, b in zip(traj_a.states, traj_b.states)
        ]
    )
    allowance = 2.0 * max(traj_a.config.inner_tol, traj_b.config.inner_tol)
    return check_monotone(dist, allowance, name="contraction")
