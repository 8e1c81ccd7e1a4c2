"""Staggered grids for zero-flux finite-volume calculus.

Scalars (cell fields) live at cell centers, fluxes (face fields) live on
interior faces only.  There are no ghost cells: a boundary face simply does
not exist, which is how the zero-flux condition enters the discrete
operators.  Three kinds share the layout:

* ``interval``: uniform cells on (a, b), spacing h, unit face areas.
* ``rectangle``: tensor product of two intervals, per-axis face arrays.
* ``radial``: radially symmetric profiles on a ball of radius R in ambient
  dimension N, reduced to one axis.  Cell centers sit at r_i = (i + 1/2) h
  so r = 0 is never a sample point; cells carry the measure weight
  r_i^(N-1) h and interior faces carry the area r_j^(N-1) and the control
  volume r_j^(N-1) h.  The absent face at r = 0 has zero area, which
  encodes regularity at the origin exactly like the absent boundary faces
  encode zero flux.  The solid-angle constant is dropped throughout.

``divergence`` is the exact negative adjoint of ``forward_gradient`` under
the weighted pairings ``cell_inner`` and ``face_inner``, so discrete
summation by parts holds to rounding and the weighted cell sum of any
divergence telescopes to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "CellField",
    "FaceField",
    "build_grid",
    "interval_grid",
    "rectangle_grid",
    "radial_grid",
    "forward_gradient",
    "divergence",
    "colocated_gradient",
    "colocated_magnitude",
    "face_differences",
    "cell_inner",
    "cell_norm",
    "face_inner",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Grid:
    """Immutable grid geometry.

    ``face_areas[k]`` holds the measure of each interior face normal to axis
    k and ``face_weights[k]`` the face control volume (area times spacing),
    which is the weight of the face inner product.  ``cell_volumes`` weights
    the cell inner product.
    """

    kind: str
    shape: tuple[int, ...]
    spacing: tuple[float, ...]
    lo: tuple[float, ...]
    radial_dim: int | None
    cell_volumes: np.ndarray
    face_areas: tuple[np.ndarray, ...]
    face_weights: tuple[np.ndarray, ...]
    cell_centers: tuple[np.ndarray, ...]

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def num_cells(self) -> int:
        return int(np.prod(self.shape))

    @property
    def total_volume(self) -> float:
        return float(self.cell_volumes.sum())

    def face_shape(self, axis: int) -> tuple[int, ...]:
        s = list(self.shape)
        s[axis] -= 1
        return tuple(s)

    def same_layout(self, other: "Grid") -> bool:
        return (
            self.kind == other.kind
            and self.shape == other.shape
            and self.spacing == other.spacing
            and self.lo == other.lo
            and self.radial_dim == other.radial_dim
        )


def interval_grid(lo: float, hi: float, cells: int) -> Grid:
    """Uniform cells on the open interval (lo, hi)."""
    if cells < 2:
        raise ValueError(f"need at least 2 cells, got {cells}")
    if not hi > lo:
        raise ValueError(f"empty interval ({lo}, {hi})")
    h = (hi - lo) / cells
    centers = lo + (np.arange(cells) + 0.5) * h
    return Grid(
        kind="interval",
        shape=(cells,),
        spacing=(h,),
        lo=(float(lo),),
        radial_dim=None,
        cell_volumes=_readonly(np.full(cells, h)),
        face_areas=(_readonly(np.ones(cells - 1)),),
        face_weights=(_readonly(np.full(cells - 1, h)),),
        cell_centers=(_readonly(centers),),
    )


def rectangle_grid(
    lo: tuple[float, float], hi: tuple[float, float], cells: tuple[int, int]
) -> Grid:
    """Tensor-product cells on the open rectangle (lo[0], hi[0]) x (lo[1], hi[1])."""
    nx, ny = int(cells[0]), int(cells[1])
    if nx < 2 or ny < 2:
        raise ValueError(f"need at least 2 cells per axis, got {cells}")
    if not (hi[0] > lo[0] and hi[1] > lo[1]):
        raise ValueError(f"empty rectangle {lo} .. {hi}")
    hx = (hi[0] - lo[0]) / nx
    hy = (hi[1] - lo[1]) / ny
    vol = hx * hy
    return Grid(
        kind="rectangle",
        shape=(nx, ny),
        spacing=(hx, hy),
        lo=(float(lo[0]), float(lo[1])),
        radial_dim=None,
        cell_volumes=_readonly(np.full((nx, ny), vol)),
        face_areas=(
            _readonly(np.full((nx - 1, ny), hy)),
            _readonly(np.full((nx, ny - 1), hx)),
        ),
        face_weights=(
            _readonly(np.full((nx - 1, ny), vol)),
            _readonly(np.full((nx, ny - 1), vol)),
        ),
        cell_centers=(
            _readonly(lo[0] + (np.arange(nx) + 0.5) * hx),
            _readonly(lo[1] + (np.arange(ny) + 0.5) * hy),
        ),
    )


def radial_grid(dimension: int, radius: float, cells: int) -> Grid:
    """Radial grid on the ball of the given radius in the given ambient dimension."""
    if dimension < 2:
        raise ValueError(f"ambient dimension must be >= 2, got {dimension}")
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if cells < 2:
        raise ValueError(f"need at least 2 cells, got {cells}")
    h = radius / cells
    centers = (np.arange(cells) + 0.5) * h
    faces = np.arange(1, cells) * h  # interior faces; none at r=0 or r=R
    areas = faces ** (dimension - 1)
    return Grid(
        kind="radial",
        shape=(cells,),
        spacing=(h,),
        lo=(0.0,),
        radial_dim=int(dimension),
        cell_volumes=_readonly(centers ** (dimension - 1) * h),
        face_areas=(_readonly(areas),),
        face_weights=(_readonly(areas * h),),
        cell_centers=(_readonly(centers),),
    )


def build_grid(spec: dict) -> Grid:
    """Build a grid from a plain mapping, as read from a config file.

    Recognized forms::

        {"kind": "interval", "lo": 0.0, "hi": 2.0, "cells": 400}
        {"kind": "rectangle", "lo": [0, 0], "hi": [1, 1], "cells": [32, 32]}
        {"kind": "radial", "dimension": 3, "radius": 1.0, "cells": 400}

    Raises:
        ValueError: unknown kind, missing keys, or degenerate geometry.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("grid spec must be a mapping with a 'kind' key")
    kind = spec["kind"]
    known = {
        "interval": {"kind", "lo", "hi", "cells"},
        "rectangle": {"kind", "lo", "hi", "cells"},
        "radial": {"kind", "dimension", "radius", "cells"},
    }
    if kind not in known:
        raise ValueError(f"unknown grid kind {kind!r}")
    extra = set(spec) - known[kind]
    if extra:
        raise ValueError(f"unknown grid keys for {kind}: {sorted(extra)}")
    try:
        if kind == "interval":
            return interval_grid(float(spec["lo"]), float(spec["hi"]), int(spec["cells"]))
        if kind == "rectangle":
            lo = tuple(float(v) for v in spec["lo"])
            hi = tuple(float(v) for v in spec["hi"])
            cells = tuple(int(v) for v in spec["cells"])
            if len(lo) != 2 or len(hi) != 2 or len(cells) != 2:
                raise ValueError("rectangle lo/hi/cells must be pairs")
            return rectangle_grid(lo, hi, cells)
        return radial_grid(int(spec["dimension"]), float(spec["radius"]), int(spec["cells"]))
    except KeyError as exc:
        raise ValueError(f"grid spec missing key {exc}") from exc


@dataclass
class CellField:
    """One real value per cell."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"cell values shape {v.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("cell values must be finite")
        self.values = v

    def copy(self) -> "CellField":
        return CellField(self.grid, self.values.copy())


@dataclass
class FaceField:
    """One real value per interior face, grouped by normal axis."""

    grid: Grid
    components: tuple[np.ndarray, ...]

    def __post_init__(self):
        comps = tuple(np.asarray(c, dtype=float) for c in self.components)
        if len(comps) != self.grid.ndim:
            raise ValueError(f"expected {self.grid.ndim} face components, got {len(comps)}")
        for axis, c in enumerate(comps):
            want = self.grid.face_shape(axis)
            if c.shape != want:
                raise ValueError(f"axis {axis} face shape {c.shape} != {want}")
            if not np.all(np.isfinite(c)):
                raise ValueError("face values must be finite")
        self.components = comps

    def copy(self) -> "FaceField":
        return FaceField(self.grid, tuple(c.copy() for c in self.components))


def forward_gradient(u: CellField) -> FaceField:
    """Difference quotient across each interior face; boundary faces do not exist."""
    g = u.grid
    comps = tuple(np.diff(u.values, axis=k) / g.spacing[k] for k in range(g.ndim))
    return FaceField(g, comps)


def divergence(p: FaceField) -> CellField:
    """Exact negative adjoint of ``forward_gradient`` under the weighted pairings.

    Per cell: sum over axes of (area * p at the right face minus area * p at
    the left face), divided by the cell volume; absent boundary faces
    contribute zero, so the weighted cell sum of the result telescopes to
    zero for every face field.
    """
    g = p.grid
    acc = np.zeros(g.shape)
    for axis in range(g.ndim):
        ap = g.face_areas[axis] * p.components[axis]
        front = [slice(None)] * g.ndim
        back = [slice(None)] * g.ndim
        front[axis] = slice(0, g.shape[axis] - 1)
        back[axis] = slice(1, g.shape[axis])
        acc[tuple(front)] += ap
        acc[tuple(back)] -= ap
    return CellField(g, acc / g.cell_volumes)


def colocated_gradient(u: CellField) -> tuple[np.ndarray, ...]:
    """Per-axis gradient averaged from the face pair onto each cell.

    Missing boundary faces enter as zero-slope samples, so a boundary cell
    sees half of its single interior face gradient.  Used for diagnostics
    and for the isotropic coupling of the two axes on rectangles.
    """
    g = u.grid
    out = []
    for axis in range(g.ndim):
        gf = np.diff(u.values, axis=axis) / g.spacing[axis]
        acc = np.zeros(g.shape)
        front = [slice(None)] * g.ndim
        back = [slice(None)] * g.ndim
        front[axis] = slice(0, g.shape[axis] - 1)
        back[axis] = slice(1, g.shape[axis])
        acc[tuple(front)] += gf
        acc[tuple(back)] += gf
        out.append(0.5 * acc)
    return tuple(out)


def colocated_magnitude(u: CellField) -> np.ndarray:
    """Euclidean norm over axes of the co-located gradient, one value per cell."""
    parts = colocated_gradient(u)
    mag2 = np.zeros(u.grid.shape)
    for c in parts:
        mag2 += c * c
    return np.sqrt(mag2)


def face_differences(u: CellField) -> tuple[np.ndarray, ...]:
    """Raw value differences across interior faces (no division by spacing)."""
    return tuple(np.diff(u.values, axis=k) for k in range(u.grid.ndim))


def _check_same_grid(a, b):
    if a.grid is not b.grid and not a.grid.same_layout(b.grid):
        raise ValueError("fields live on different grids")


def cell_inner(u: CellField, v: CellField) -> float:
    """Volume-weighted inner product of two cell fields."""
    _check_same_grid(u, v)
    return float(np.sum(u.grid.cell_volumes * u.values * v.values))


def cell_norm(u: CellField) -> float:
    """Volume-weighted L2 norm of a cell field."""
    return float(np.sqrt(np.sum(u.grid.cell_volumes * u.values * u.values)))


def face_inner(p: FaceField, q: FaceField) -> float:
    """Control-volume-weighted inner product of two face fields."""
    _check_same_grid(p, q)
    total = 0.0
    for axis in range(p.grid.ndim):
        total += float(np.sum(p.grid.face_weights[axis] * p.components[axis] * q.components[axis]))
    return total
