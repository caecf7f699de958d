"""Channel synthesis over the preset lattice.

Each of the three links (feed hop into the surface, surface to the reflect
user, surface to the transmit user) is a Rician mix of a deterministic
plane-wave steering component and a spatially correlated scattered field,
scaled by a power-law path loss. The scattered field follows the isotropic
sinc correlation over the preset lattice: two presets a distance d apart have
correlation sinc(2 d / wavelength). One eigendecomposition of that matrix is
shared by all links (it depends only on geometry) and colors i.i.d. complex
Gaussian draws.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import Placement, SurfaceGeometry, lattice_points, placement_in_subareas, snap_to_subarea_presets

# above this lattice size the L x L eigendecomposition needs several GB
_EIG_WARN_PRESETS = 8000


@dataclass(frozen=True)
class LinkParams:
    """Propagation parameters of one link, surface-side angles in radians."""

    k_factor: float  # Rician factor, linear
    distance: float  # m
    alpha: float  # path-loss exponent
    azimuth: float
    elevation: float

    def __post_init__(self):
        if self.k_factor < 0:
            raise ValueError(f"Rician factor must be >= 0, got {self.k_factor}")
        if self.distance <= 0:
            raise ValueError(f"distance must be positive, got {self.distance}")
        if self.alpha <= 0:
            raise ValueError(f"path-loss exponent must be positive, got {self.alpha}")


@dataclass(frozen=True, eq=False)
class CorrelationModel:
    """Spatial correlation matrix with its clamped eigendecomposition.

    `coloring` maps i.i.d. unit-variance draws to draws with covariance
    `matrix`; it is the eigenvector matrix with columns scaled by the square
    roots of the (nonnegative-clamped) eigenvalues.
    """

    matrix: np.ndarray  # (L, L) real symmetric, unit diagonal
    eigvecs: np.ndarray  # (L, L)
    eigvals: np.ndarray  # (L,) clamped at zero
    coloring: np.ndarray  # (L, L) = eigvecs * sqrt(eigvals)

    @classmethod
    def from_matrix(cls, r: np.ndarray) -> "CorrelationModel":
        r = np.asarray(r, dtype=float)
        vals, vecs = np.linalg.eigh(r)
        vals = np.clip(vals, 0.0, None)  # PSD repair of numerical noise
        return cls(matrix=r, eigvecs=vecs, eigvals=vals, coloring=vecs * np.sqrt(vals))


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One draw of the three lattice-wide channel vectors (length L each)."""

    h_f: np.ndarray  # feed hop, BS to surface
    h_r: np.ndarray  # surface to reflect user
    h_t: np.ndarray  # surface to transmit user

    @property
    def n_presets(self) -> int:
        return self.h_f.shape[0]


def surface_steering(azimuth, elevation, positions, wavelength: float) -> np.ndarray:
    """Plane-wave phase response of the surface at the given positions.

    Entry for position (x, y) is exp(j 2 pi / wavelength *
    (x sin(azimuth) cos(elevation) + y sin(elevation))); unit modulus.
    """
    if wavelength <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    pos = np.asarray(positions, dtype=float)
    phase = (2.0 * np.pi / wavelength) * (
        pos[..., 0] * np.sin(azimuth) * np.cos(elevation) + pos[..., 1] * np.sin(elevation)
    )
    return np.exp(1j * phase)


def bs_steering(psi_b: float, n_antennas: int) -> np.ndarray:
    """Uniform-line-array response at the base station; entry k is
    exp(j (k - 1) pi sin(psi_b)). The pipeline runs a single-antenna BS,
    for which this degenerates to [1]."""
    if n_antennas < 1:
        raise ValueError(f"need at least one antenna, got {n_antennas}")
    k = np.arange(n_antennas)
    return np.exp(1j * k * np.pi * np.sin(psi_b))


def path_loss(distance: float, alpha: float) -> float:
    """Power scale factor distance**(-alpha)."""
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance}")
    return float(distance ** -alpha)


def correlation_matrix(geom: SurfaceGeometry) -> CorrelationModel:
    """Sinc spatial correlation over the full preset lattice.

    Entry for lattice points with index offsets (dc, dr) is
    sinc(2/wavelength * hypot(dc * a_h / (L_h - 1), dr * a_v / (L_v - 1))),
    i.e. sinc of twice the physical separation in wavelengths.
    """
    l_h, l_v = geom.lattice_cols, geom.lattice_rows
    if l_h < 2 or l_v < 2:
        raise ValueError(f"degenerate lattice {l_h} x {l_v}; need at least 2 presets per axis")
    if geom.n_presets > _EIG_WARN_PRESETS:
        est_gb = 4 * 8 * geom.n_presets**2 / 1e9
        warnings.warn(
            f"correlation model for L={geom.n_presets} presets needs roughly "
            f"{est_gb:.1f} GB; consider fewer presets per subarea",
            RuntimeWarning,
            stacklevel=2,
        )
    idx = np.arange(geom.n_presets)
    cols = idx % l_h
    rows = idx // l_h
    dx = (cols[:, None] - cols[None, :]) * (geom.a_h / (l_h - 1))
    dy = (rows[:, None] - rows[None, :]) * (geom.a_v / (l_v - 1))
    r = np.sinc(2.0 / geom.wavelength * np.hypot(dx, dy))
    return CorrelationModel.from_matrix(r)


def correlated_nlos(corr: CorrelationModel, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Scattered-field draw(s) with covariance corr.matrix.

    Returns shape (L,) or (size, L). Entries of the white draw are circularly
    symmetric complex Gaussian with unit variance.
    """
    l = corr.matrix.shape[0]
    shape = (l,) if size is None else (size, l)
    white = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return white @ corr.coloring.T


def synthesize_channel(
    geom: SurfaceGeometry,
    f_link: LinkParams,
    r_link: LinkParams,
    t_link: LinkParams,
    rng: np.random.Generator,
    corr: CorrelationModel | None = None,
) -> ChannelRealization:
    """Draw the three channel vectors over the full preset lattice.

    Each link mixes its steering component and a correlated scattered draw
    with Rician weights sqrt(K/(K+1)) and sqrt(1/(K+1)), then applies the
    square-root path loss. The feed hop's BS-side factor is scalar unity
    (single-antenna BS), so its lattice profile is the surface steering alone.
    Deterministic given the rng state; links are drawn in f, r, t order.
    """
    if corr is None:
        corr = correlation_matrix(geom)
    if corr.matrix.shape[0] != geom.n_presets:
        raise ValueError(
            f"correlation model covers {corr.matrix.shape[0]} presets, geometry has {geom.n_presets}"
        )
    coords = lattice_points(geom)

    def draw(link: LinkParams) -> np.ndarray:
        los = surface_steering(link.azimuth, link.elevation, coords, geom.wavelength)
        nlos = correlated_nlos(corr, rng)
        k = link.k_factor
        mixed = np.sqrt(k / (k + 1.0)) * los + np.sqrt(1.0 / (k + 1.0)) * nlos
        return np.sqrt(path_loss(link.distance, link.alpha)) * mixed

    return ChannelRealization(h_f=draw(f_link), h_r=draw(r_link), h_t=draw(t_link))


def channel_at(
    realization: ChannelRealization, placement: Placement, geom: SurfaceGeometry
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-element channels at a placement, shape (M,) each.

    Each element's continuous position snaps to the nearest preset of its own
    subarea (ties toward the smaller flat index) and the lattice vectors are
    read at the snapped points.
    """
    if realization.n_presets != geom.n_presets:
        raise ValueError(
            f"realization covers {realization.n_presets} presets, geometry has {geom.n_presets}"
        )
    if not placement_in_subareas(placement, geom):
        raise ValueError("placement does not match geometry: element outside its subarea")
    idx = snap_to_subarea_presets(placement.positions, geom)
    return realization.h_f[idx], realization.h_r[idx], realization.h_t[idx]


def _complex_to_lists(h: np.ndarray) -> dict:
    return {"re": h.real.tolist(), "im": h.imag.tolist()}


def _lists_to_complex(d: dict) -> np.ndarray:
    return np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)


def save_realization(path, realization: ChannelRealization, seed=None, params: dict | None = None) -> None:
    """JSON dump of a realization plus the seed/parameters that produced it."""
    doc = {
        "seed": seed,
        "params": params or {},
        "h_f": _complex_to_lists(realization.h_f),
        "h_r": _complex_to_lists(realization.h_r),
        "h_t": _complex_to_lists(realization.h_t),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_realization(path) -> tuple[ChannelRealization, dict]:
    """Inverse of save_realization; returns the realization and its metadata."""
    with open(path) as fh:
        doc = json.load(fh)
    realization = ChannelRealization(
        h_f=_lists_to_complex(doc["h_f"]),
        h_r=_lists_to_complex(doc["h_r"]),
        h_t=_lists_to_complex(doc["h_t"]),
    )
    return realization, {"seed": doc.get("seed"), "params": doc.get("params", {})}
