"""Spectral substrate: wavenumber lattice, transforms, projection, norms.

Conventions fixed here and used by every other module:

* forward transform: ``u_hat(kappa) = (1/n^dim) * sum_x u(x) exp(-i k.x)``,
  so a unit-amplitude cosine carries coefficient 1/2 at +/-kappa;
* Parseval: ``||u||_L2^2 = L^dim * sum_k |u_hat(k)|^2``;
* the mean mode u_hat(0) is pinned to zero;
* Nyquist rows (kappa_i = -n/2) are zeroed on construction of any
  velocity field;
* dealiasing keeps |kappa_i| <= floor(n/3) (two-thirds rule).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

DIV_TOL = 1e-12
HERMITIAN_TOL = 1e-12


def _reflect(a: np.ndarray, dim: int) -> np.ndarray:
    """Index negation kappa -> -kappa on the last `dim` axes."""
    out = a
    for ax in range(-dim, 0):
        out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
    return out


@dataclass(frozen=True)
class WavenumberLattice:
    """Discrete frequency grid of the periodic box [0, L)^dim.

    Integer modes kappa have components in [-n/2, n/2); the physical
    wavenumber is k = (2*pi/L) * kappa.
    """

    n_per_dim: int
    dim: int
    box_length: float = 2.0 * np.pi

    def __post_init__(self):
        if self.n_per_dim < 4 or self.n_per_dim % 2 != 0:
            raise ValueError(
                f"n_per_dim must be even and >= 4, got {self.n_per_dim}")
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if not self.box_length > 0:
            raise ValueError(f"box_length must be positive, got {self.box_length}")

    @property
    def k_unit(self) -> float:
        return 2.0 * np.pi / self.box_length

    @property
    def grid_shape(self) -> tuple:
        return (self.n_per_dim,) * self.dim

    @property
    def n_modes(self) -> int:
        return self.n_per_dim ** self.dim

    @cached_property
    def kappa(self) -> np.ndarray:
        """Integer wavevectors, shape (dim, n, ..., n)."""
        n = self.n_per_dim
        per_axis = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
        grids = np.meshgrid(*([per_axis] * self.dim), indexing="ij")
        return np.stack(grids)

    @cached_property
    def k(self) -> np.ndarray:
        """Physical wavevectors k = k_unit * kappa."""
        return self.k_unit * self.kappa

    @cached_property
    def k_sq(self) -> np.ndarray:
        return np.sum(self.k ** 2, axis=0)

    @cached_property
    def k_mag(self) -> np.ndarray:
        return np.sqrt(self.k_sq)

    @property
    def dealias_limit(self) -> int:
        """Largest kept |kappa_i| under the two-thirds rule."""
        return self.n_per_dim // 3

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        lim = self.dealias_limit
        return np.all(np.abs(self.kappa) <= lim, axis=0)

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        return np.any(self.kappa == -self.n_per_dim // 2, axis=0)

    @cached_property
    def shell_index(self) -> np.ndarray:
        """Integer shell of each mode: shell s holds s-1/2 < |kappa| <= s+1/2."""
        r = self.k_mag / self.k_unit
        return np.ceil(r - 0.5).astype(np.int64)

    @cached_property
    def x(self) -> np.ndarray:
        """Physical grid coordinates, shape (dim, n, ..., n)."""
        n = self.n_per_dim
        ax = np.arange(n) * (self.box_length / n)
        grids = np.meshgrid(*([ax] * self.dim), indexing="ij")
        return np.stack(grids)

    # -- transforms -------------------------------------------------------

    def _grid_axes(self, a: np.ndarray) -> tuple:
        if a.shape[-self.dim:] != self.grid_shape:
            raise ValueError(
                f"array shape {a.shape} does not match lattice grid {self.grid_shape}")
        return tuple(range(-self.dim, 0))

    def forward(self, phys: np.ndarray) -> np.ndarray:
        """Physical field -> spectral coefficients (1/n^dim normalization)."""
        axes = self._grid_axes(phys)
        return np.fft.fftn(phys, axes=axes) / self.n_modes

    def inverse(self, coeffs: np.ndarray) -> np.ndarray:
        """Spectral coefficients -> real physical field.

        The input must be Hermitian symmetric: an imaginary residue above
        1e-12 relative signals corrupted state and raises.
        """
        axes = self._grid_axes(coeffs)
        out = np.fft.ifftn(coeffs * self.n_modes, axes=axes)
        scale = np.max(np.abs(out))
        if scale > 0:
            imag = np.max(np.abs(out.imag))
            if imag > HERMITIAN_TOL * scale:
                raise ValueError(
                    f"non-Hermitian spectral input: imaginary residue "
                    f"{imag / scale:.3e} relative")
        return out.real


def hermitian_defect(coeffs: np.ndarray, dim: int) -> float:
    """Max deviation from u_hat(-kappa) = conj(u_hat(kappa)), relative."""
    scale = np.max(np.abs(coeffs))
    if scale == 0:
        return 0.0
    d = np.max(np.abs(coeffs - np.conj(_reflect(coeffs, dim))))
    return float(d / scale)


@dataclass
class SpectralVelocity:
    """Divergence-free velocity field stored as Fourier coefficients.

    ``coeffs`` has shape (dim, n, ..., n).  Construction pins the mean
    mode to zero and zeroes the Nyquist rows; it does not project, so
    divergence-freeness is the caller's responsibility (checked by
    :meth:`divergence_max`).
    """

    lattice: WavenumberLattice
    coeffs: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        lat = self.lattice
        expected = (lat.dim,) + lat.grid_shape
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != expected:
            raise ValueError(
                f"coefficient shape {c.shape} does not match lattice {expected}")
        if c is self.coeffs:
            c = c.copy()
        c[(slice(None),) + (0,) * lat.dim] = 0.0
        c[:, lat.nyquist_mask] = 0.0
        self.coeffs = c

    def copy(self) -> "SpectralVelocity":
        return SpectralVelocity(self.lattice, self.coeffs.copy(), self.t)

    def to_physical(self) -> np.ndarray:
        return self.lattice.inverse(self.coeffs)

    @classmethod
    def from_physical(cls, lattice: WavenumberLattice, phys: np.ndarray,
                      t: float = 0.0) -> "SpectralVelocity":
        return cls(lattice, lattice.forward(phys), t)

    def l2_norm(self) -> float:
        lat = self.lattice
        return float(np.sqrt(
            lat.box_length ** lat.dim * np.sum(np.abs(self.coeffs) ** 2)))

    def energy(self) -> float:
        return 0.5 * self.l2_norm() ** 2

    def divergence_max(self) -> float:
        """max over modes of |k.u_hat| / (|k| |u_hat|)."""
        lat = self.lattice
        num = np.abs(np.sum(lat.k * self.coeffs, axis=0))
        den = lat.k_mag * np.sqrt(np.sum(np.abs(self.coeffs) ** 2, axis=0))
        scale = np.max(den)
        if scale == 0:
            return 0.0
        mask = den > 1e-300
        if not np.any(mask):
            return 0.0
        return float(np.max(num[mask] / den[mask]))

    def hermitian_defect(self) -> float:
        return hermitian_defect(self.coeffs, self.lattice.dim)


@dataclass(frozen=True)
class SobolevIndex:
    """Regularity order for discrete Sobolev norms."""

    s: float
    variant: str = "homogeneous"

    def __post_init__(self):
        if self.variant not in ("homogeneous", "inhomogeneous"):
            raise ValueError(f"unknown Sobolev variant {self.variant!r}")
        if not np.isfinite(self.s):
            raise ValueError("Sobolev order must be finite")


def build_lattice(n_per_dim: int, dim: int,
                  box_length: float = 2.0 * np.pi) -> WavenumberLattice:
    return WavenumberLattice(n_per_dim, dim, box_length)


def leray_project(v: SpectralVelocity) -> SpectralVelocity:
    """Project onto divergence-free fields: u_hat -> u_hat - k (k.u_hat)/|k|^2."""
    lat = v.lattice
    k = lat.k
    ksq = lat.k_sq.copy()
    ksq[(0,) * lat.dim] = 1.0  # k=0 handled by the mean-mode pin
    kdotu = np.sum(k * v.coeffs, axis=0)
    out = v.coeffs - k * (kdotu / ksq)
    return SpectralVelocity(lat, out, v.t)


def dealias(v: SpectralVelocity) -> SpectralVelocity:
    """Zero all modes with any |kappa_i| > floor(n/3)."""
    return SpectralVelocity(v.lattice, v.coeffs * v.lattice.dealias_mask, v.t)


def sobolev_norm(u: SpectralVelocity, index: SobolevIndex) -> float:
    """Discrete H^s norm with the Parseval L^dim weight.

    homogeneous:   (sum_k |k|^{2s} |u_hat|^2 L^dim)^{1/2}, k=0 skipped;
    inhomogeneous: same with weight (1+|k|^2)^s.
    """
    lat = u.lattice
    mag2 = np.sum(np.abs(u.coeffs) ** 2, axis=0)
    if index.variant == "homogeneous":
        w = np.zeros(lat.grid_shape)
        nz = lat.k_sq > 0
        w[nz] = lat.k_sq[nz] ** index.s
    else:
        w = (1.0 + lat.k_sq) ** index.s
    return float(np.sqrt(lat.box_length ** lat.dim * np.sum(w * mag2)))


def inner_product(u: SpectralVelocity, v: SpectralVelocity) -> float:
    """L^2 inner product in the spectral Parseval convention."""
    if u.lattice != v.lattice:
        raise ValueError("lattice mismatch in inner product")
    lat = u.lattice
    return float(lat.box_length ** lat.dim
                 * np.sum((u.coeffs * np.conj(v.coeffs)).real))
