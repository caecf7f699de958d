"""Aperture partitioning, preset lattices, index mapping, and spacing checks.

The radiating aperture is a rectangle split into a grid of non-overlapping
subareas, one movable element per subarea. Every subarea carries the same
n_h x n_v grid of preset positions, laid out so that the union over all
subareas is a single uniform lattice spanning the whole aperture (endpoints
inclusive). Subareas and lattice rows/columns are numbered row-major and
1-based in the public index contract; internal array indices are 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SurfaceGeometry:
    """Immutable description of the aperture, its subareas, and the preset lattice."""

    a_h: float  # aperture width (m)
    a_v: float  # aperture height (m)
    n_subareas: int  # number of fluid elements (= subareas)
    grid_cols: int  # subarea grid shape, horizontal
    grid_rows: int  # subarea grid shape, vertical
    n_h: int  # presets per subarea row
    n_v: int  # presets per subarea column
    d_min: float  # minimum element spacing (m)
    wavelength: float  # carrier wavelength (m)

    def __post_init__(self):
        if self.a_h <= 0 or self.a_v <= 0:
            raise ValueError(f"aperture extents must be positive, got {self.a_h} x {self.a_v}")
        if self.n_subareas < 1:
            raise ValueError(f"need at least one subarea, got {self.n_subareas}")
        if self.grid_cols * self.grid_rows != self.n_subareas:
            raise ValueError(
                f"subarea grid {self.grid_cols} x {self.grid_rows} does not hold "
                f"{self.n_subareas} subareas"
            )
        if self.n_h < 1 or self.n_v < 1:
            raise ValueError(f"preset counts must be positive, got {self.n_h} x {self.n_v}")
        if self.d_min <= 0:
            raise ValueError(f"minimum spacing must be positive, got {self.d_min}")
        if self.wavelength <= 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")

    @property
    def lattice_cols(self) -> int:
        """Presets per row of the full aperture."""
        return self.grid_cols * self.n_h

    @property
    def lattice_rows(self) -> int:
        """Presets per column of the full aperture."""
        return self.grid_rows * self.n_v

    @property
    def n_presets(self) -> int:
        """Total preset count over the whole aperture."""
        return self.n_subareas * self.n_h * self.n_v

    @property
    def subarea_w(self) -> float:
        return self.a_h / self.grid_cols

    @property
    def subarea_h(self) -> float:
        return self.a_v / self.grid_rows

    def lattice_x(self) -> np.ndarray:
        """x coordinate of each lattice column, spanning [0, a_h] inclusive."""
        if self.lattice_cols == 1:
            return np.array([self.a_h / 2.0])
        return np.arange(self.lattice_cols) * (self.a_h / (self.lattice_cols - 1))

    def lattice_y(self) -> np.ndarray:
        """y coordinate of each lattice row, spanning [0, a_v] inclusive."""
        if self.lattice_rows == 1:
            return np.array([self.a_v / 2.0])
        return np.arange(self.lattice_rows) * (self.a_v / (self.lattice_rows - 1))


@dataclass(frozen=True, eq=False)
class Placement:
    """Candidate element positions, one (x, y) pair per subarea (meters).

    positions[i] belongs to subarea i + 1 (row-major numbering). A placement
    is allowed to violate the minimum-spacing constraint; feasibility is a
    queryable property so that optimizers can explore and penalize.
    """

    positions: np.ndarray  # (M, 2) float

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError(f"positions must be (M, 2), got {pos.shape}")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        object.__setattr__(self, "positions", pos)

    @property
    def n_elements(self) -> int:
        return self.positions.shape[0]


def _subarea_grid_shape(a_h: float, a_v: float, m: int) -> tuple[int, int]:
    """Infer a (cols, rows) factorization of m giving square subareas.

    cols/rows = a_h/a_v exactly, so cols^2 = m * a_h / a_v. At most one
    divisor pair qualifies; anything else is rejected rather than guessed.
    """
    target = m * a_h / a_v
    cols = round(math.sqrt(target))
    for c in {cols, cols - 1, cols + 1}:
        if c >= 1 and m % c == 0:
            r = m // c
            if math.isclose(c * a_v, r * a_h, rel_tol=1e-9):
                return c, r
    raise ValueError(
        f"no subarea grid with square cells tiles a {a_h} x {a_v} aperture with {m} "
        f"subareas; pass grid=(cols, rows) explicitly"
    )


def partition_surface(
    a_h: float,
    a_v: float,
    n_subareas: int,
    wavelength: float,
    *,
    n_h: int = 10,
    n_v: int = 10,
    d_min: float | None = None,
    grid: tuple[int, int] | None = None,
) -> SurfaceGeometry:
    """Partition an a_h x a_v aperture into n_subareas equal rectangles.

    Without an explicit `grid`, the factorization is inferred so that subareas
    come out square (perfect-square counts on square apertures); counts with
    no such factorization raise. `d_min` defaults to half a wavelength.
    """
    if a_h <= 0 or a_v <= 0:
        raise ValueError(f"aperture extents must be positive, got {a_h} x {a_v}")
    if n_subareas < 1:
        raise ValueError(f"need at least one subarea, got {n_subareas}")
    if grid is None:
        cols, rows = _subarea_grid_shape(a_h, a_v, n_subareas)
    else:
        cols, rows = grid
    return SurfaceGeometry(
        a_h=a_h,
        a_v=a_v,
        n_subareas=n_subareas,
        grid_cols=cols,
        grid_rows=rows,
        n_h=n_h,
        n_v=n_v,
        d_min=wavelength / 2.0 if d_min is None else d_min,
        wavelength=wavelength,
    )


def _check_subarea_index(geom: SurfaceGeometry, m: int) -> int:
    if not 1 <= m <= geom.n_subareas:
        raise ValueError(f"subarea index {m} out of range 1..{geom.n_subareas}")
    return m - 1


def subarea_bounds(geom: SurfaceGeometry, m: int) -> tuple[float, float, float, float]:
    """(x_lo, y_lo, x_hi, y_hi) of subarea m (1-based, row-major)."""
    i = _check_subarea_index(geom, m)
    row, col = divmod(i, geom.grid_cols)
    return (
        col * geom.subarea_w,
        row * geom.subarea_h,
        (col + 1) * geom.subarea_w,
        (row + 1) * geom.subarea_h,
    )


def subarea_corners(geom: SurfaceGeometry) -> tuple[np.ndarray, np.ndarray]:
    """Stacked (M, 2) lower and upper corners of every subarea, row-major."""
    idx = np.arange(geom.n_subareas)
    rows, cols = np.divmod(idx, geom.grid_cols)
    lo = np.stack([cols * geom.subarea_w, rows * geom.subarea_h], axis=-1)
    hi = np.stack([(cols + 1) * geom.subarea_w, (rows + 1) * geom.subarea_h], axis=-1)
    return lo, hi


def _block_ranges(geom: SurfaceGeometry, m: int) -> tuple[int, int, int, int]:
    """0-based inclusive lattice (col_lo, col_hi, row_lo, row_hi) of subarea m."""
    i = _check_subarea_index(geom, m)
    row, col = divmod(i, geom.grid_cols)
    return (
        col * geom.n_h,
        (col + 1) * geom.n_h - 1,
        row * geom.n_v,
        (row + 1) * geom.n_v - 1,
    )


def preset_grid(geom: SurfaceGeometry, m: int) -> np.ndarray:
    """(n_h * n_v, 2) preset coordinates of subarea m, ascending flat index."""
    c_lo, c_hi, r_lo, r_hi = _block_ranges(geom, m)
    xs = geom.lattice_x()[c_lo : c_hi + 1]
    ys = geom.lattice_y()[r_lo : r_hi + 1]
    xx, yy = np.meshgrid(xs, ys)  # row-major: y varies slowest
    return np.stack([xx.ravel(), yy.ravel()], axis=-1)


def preset_flat_indices(geom: SurfaceGeometry, m: int) -> np.ndarray:
    """1-based global flat indices of subarea m's presets, ascending."""
    c_lo, c_hi, r_lo, r_hi = _block_ranges(geom, m)
    cols = np.arange(c_lo, c_hi + 1)
    rows = np.arange(r_lo, r_hi + 1)
    return (rows[:, None] * geom.lattice_cols + cols[None, :] + 1).ravel()


def lattice_points(geom: SurfaceGeometry) -> np.ndarray:
    """(L, 2) coordinates of every preset, ordered by global flat index."""
    xx, yy = np.meshgrid(geom.lattice_x(), geom.lattice_y())
    return np.stack([xx.ravel(), yy.ravel()], axis=-1)


def map_index(n_h: int, n_v: int, l_h: int) -> int:
    """Row-major flat index of lattice column n_h, row n_v (all 1-based)."""
    if not 1 <= n_h <= l_h:
        raise ValueError(f"column index {n_h} out of range 1..{l_h}")
    if n_v < 1:
        raise ValueError(f"row index {n_v} must be >= 1")
    return (n_v - 1) * l_h + n_h


def unmap_index(n: int, l_h: int) -> tuple[int, int]:
    """Inverse of map_index: flat index -> (n_h, n_v), 1-based."""
    if n < 1:
        raise ValueError(f"flat index {n} must be >= 1")
    n_v, rem = divmod(n - 1, l_h)
    return rem + 1, n_v + 1


def project_to_subarea(pos, m: int, geom: SurfaceGeometry) -> np.ndarray:
    """Euclidean-nearest point of subarea m's rectangle (componentwise clamp)."""
    x_lo, y_lo, x_hi, y_hi = subarea_bounds(geom, m)
    pos = np.asarray(pos, dtype=float)
    return np.array([np.clip(pos[0], x_lo, x_hi), np.clip(pos[1], y_lo, y_hi)])


def clamp_to_subareas(positions: np.ndarray, geom: SurfaceGeometry) -> np.ndarray:
    """Clamp (..., M, 2) positions so element i stays inside subarea i + 1."""
    lo, hi = subarea_corners(geom)
    positions = np.asarray(positions, dtype=float)
    if positions.shape[-2] != geom.n_subareas:
        raise ValueError(
            f"expected {geom.n_subareas} element positions, got {positions.shape[-2]}"
        )
    return np.clip(positions, lo, hi)


def placement_in_subareas(placement: Placement, geom: SurfaceGeometry, tol: float = 1e-9) -> bool:
    """True when every element lies inside its own subarea."""
    if placement.n_elements != geom.n_subareas:
        return False
    lo, hi = subarea_corners(geom)
    pos = placement.positions
    return bool(np.all(pos >= lo - tol) and np.all(pos <= hi + tol))


def spacing_violations(placement: Placement, d_min: float) -> int:
    """Number of unordered element pairs closer than d_min (strictly)."""
    pos = placement.positions
    m = pos.shape[0]
    if m < 2:
        return 0
    diff = pos[:, None, :] - pos[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    iu, ju = np.triu_indices(m, k=1)
    return int(np.count_nonzero(d2[iu, ju] < d_min * d_min))


def is_spacing_feasible(placement: Placement, d_min: float) -> bool:
    return spacing_violations(placement, d_min) == 0


def _round_half_down(t: np.ndarray) -> np.ndarray:
    """Nearest integer, half-way cases toward the smaller index."""
    return np.ceil(np.asarray(t) - 0.5).astype(np.int64)


def snap_to_lattice(points: np.ndarray, geom: SurfaceGeometry) -> np.ndarray:
    """Nearest global preset for (..., 2) points -> 0-based flat indices.

    Ties resolve to the smaller flat index (smaller row, then column).
    """
    points = np.asarray(points, dtype=float)
    if geom.lattice_cols > 1:
        col = _round_half_down(points[..., 0] / (geom.a_h / (geom.lattice_cols - 1)))
        col = np.clip(col, 0, geom.lattice_cols - 1)
    else:
        col = np.zeros(points.shape[:-1], dtype=np.int64)
    if geom.lattice_rows > 1:
        row = _round_half_down(points[..., 1] / (geom.a_v / (geom.lattice_rows - 1)))
        row = np.clip(row, 0, geom.lattice_rows - 1)
    else:
        row = np.zeros(points.shape[:-1], dtype=np.int64)
    return row * geom.lattice_cols + col


def snap_to_subarea_presets(positions: np.ndarray, geom: SurfaceGeometry) -> np.ndarray:
    """Nearest preset of each element's own subarea for (..., M, 2) positions.

    Returns 0-based global flat indices, shape (..., M). Ties resolve to the
    smaller flat index. Clamping the unrestricted nearest column/row into the
    subarea's block range yields the nearest in-block preset because distance
    grows monotonically away from the unrestricted optimum.
    """
    positions = np.asarray(positions, dtype=float)
    if positions.shape[-2] != geom.n_subareas:
        raise ValueError(
            f"expected {geom.n_subareas} element positions, got {positions.shape[-2]}"
        )
    idx = np.arange(geom.n_subareas)
    srows, scols = np.divmod(idx, geom.grid_cols)
    c_lo, c_hi = scols * geom.n_h, (scols + 1) * geom.n_h - 1
    r_lo, r_hi = srows * geom.n_v, (srows + 1) * geom.n_v - 1

    if geom.lattice_cols > 1:
        col = _round_half_down(positions[..., 0] / (geom.a_h / (geom.lattice_cols - 1)))
    else:
        col = np.zeros(positions.shape[:-1], dtype=np.int64)
    if geom.lattice_rows > 1:
        row = _round_half_down(positions[..., 1] / (geom.a_v / (geom.lattice_rows - 1)))
    else:
        row = np.zeros(positions.shape[:-1], dtype=np.int64)
    col = np.clip(col, c_lo, c_hi)
    row = np.clip(row, r_lo, r_hi)
    return row * geom.lattice_cols + col
