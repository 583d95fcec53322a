"""Truncated Fourier velocity fields on the unit torus.

State is stored as dense complex coefficient arrays in *centered* layout:
index ``i`` along each axis corresponds to the lattice mode ``m = i - N``
with ``m in [-N, N]``, and the physical wavevector is ``k = 2*pi*m``.  A
horizontal velocity field carries two components, shape ``(2, n, n, n)``
with ``n = 2N + 1``; scalars are ``(n, n, n)``.

Fields admitted by the solver satisfy four structural constraints:

* Hermitian symmetry (real-valued physical field),
* zero spatial mean,
* even parity in the vertical coordinate,
* divergence-free vertical average (modes with ``m3 = 0``).

Quadratic products are evaluated by zero-padded FFTs on a grid large
enough that the retained modes of the product are alias-free, so the
discrete transport term inherits the exact cancellation and symmetry
identities of the continuous bilinear form.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

__all__ = [
    "SpectralVelocity",
    "SpectralScalar",
    "ProjectionRequiredError",
    "TruncationMismatchError",
    "lattice",
    "abs_k",
    "project_constraints",
    "split_barotropic",
    "leray_horizontal",
    "hydrostatic_leray",
    "vertical_velocity",
    "transport_bilinear",
    "inner_product",
    "physical_samples",
    "random_coefficients",
]

# Relative tolerance distinguishing numerical drift from an unprojected state.
INCOMPRESSIBILITY_RTOL = 1e-8


class ProjectionRequiredError(ValueError):
    """Input violates the divergence-free vertical average beyond tolerance."""


class TruncationMismatchError(ValueError):
    """Operands carry different truncation parameters."""


@dataclass(frozen=True)
class SpectralVelocity:
    """Two horizontal velocity components as centered Fourier coefficients.

    ``coeffs[c, i1, i2, i3]`` is the coefficient of component ``c`` at
    lattice mode ``(i1 - N, i2 - N, i3 - N)``.
    """

    coeffs: np.ndarray
    N: int

    def __post_init__(self):
        n = 2 * self.N + 1
        if self.coeffs.shape != (2, n, n, n):
            raise ValueError(
                f"velocity coefficients must have shape (2, {n}, {n}, {n}), "
                f"got {self.coeffs.shape}"
            )

    @classmethod
    def zeros(cls, N: int) -> "SpectralVelocity":
        n = 2 * N + 1
        return cls(np.zeros((2, n, n, n), dtype=complex), N)

    def copy(self) -> "SpectralVelocity":
        return replace(self, coeffs=self.coeffs.copy())

    def __add__(self, other: "SpectralVelocity") -> "SpectralVelocity":
        _check_same_truncation(self, other)
        return replace(self, coeffs=self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralVelocity") -> "SpectralVelocity":
        _check_same_truncation(self, other)
        return replace(self, coeffs=self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "SpectralVelocity":
        return replace(self, coeffs=self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralVelocity":
        return replace(self, coeffs=-self.coeffs)


@dataclass(frozen=True)
class SpectralScalar:
    """Scalar field coefficients with a vertical parity tag ('even'|'odd')."""

    coeffs: np.ndarray
    N: int
    parity: str = "even"

    def __post_init__(self):
        n = 2 * self.N + 1
        if self.coeffs.shape != (n, n, n):
            raise ValueError(
                f"scalar coefficients must have shape ({n}, {n}, {n}), "
                f"got {self.coeffs.shape}"
            )
        if self.parity not in ("even", "odd"):
            raise ValueError(f"parity must be 'even' or 'odd', got {self.parity!r}")

    @classmethod
    def zeros(cls, N: int, parity: str = "even") -> "SpectralScalar":
        n = 2 * N + 1
        return cls(np.zeros((n, n, n), dtype=complex), N, parity)


def _check_same_truncation(a, b):
    if a.N != b.N:
        raise TruncationMismatchError(f"truncation mismatch: N={a.N} vs N={b.N}")


@lru_cache(maxsize=32)
def lattice(N: int):
    """Integer mode index grids ``(m1, m2, m3)``, each shaped ``(n, n, n)``."""
    m = np.arange(-N, N + 1)
    m1, m2, m3 = np.meshgrid(m, m, m, indexing="ij")
    for a in (m1, m2, m3):
        a.setflags(write=False)
    return m1, m2, m3


@lru_cache(maxsize=32)
def abs_k(N: int) -> np.ndarray:
    """Physical wavevector magnitudes ``|k| = 2*pi*|m|``, shape ``(n, n, n)``."""
    m1, m2, m3 = lattice(N)
    out = 2.0 * np.pi * np.sqrt((m1 * m1 + m2 * m2 + m3 * m3).astype(float))
    out.setflags(write=False)
    return out


@lru_cache(maxsize=32)
def _derivative_multipliers(N: int):
    """Spectral derivative factors (i*k1, i*k2, i*k3), read-only."""
    m1, m2, m3 = lattice(N)
    out = tuple(2j * np.pi * m for m in (m1, m2, m3))
    for a in out:
        a.setflags(write=False)
    return out


@lru_cache(maxsize=32)
def _slab_projector(N: int):
    """Per-mode 2x2 horizontal Leray matrices for the m3 = 0 slab."""
    m = np.arange(-N, N + 1)
    m1, m2 = np.meshgrid(m, m, indexing="ij")
    mag2 = (m1 * m1 + m2 * m2).astype(float)
    mag2[N, N] = 1.0  # zero mode handled separately
    p11 = 1.0 - m1 * m1 / mag2
    p12 = -m1 * m2 / mag2
    p22 = 1.0 - m2 * m2 / mag2
    for a in (p11, p12, p22):
        a.setflags(write=False)
    return p11, p12, p22


def _fast_len(n: int) -> int:
    """Smallest 5-smooth integer >= n (friendly FFT sizes)."""
    m = n
    while True:
        r = m
        for p in (2, 3, 5):
            while r % p == 0:
                r //= p
        if r == 1:
            return m
        m += 1


@lru_cache(maxsize=32)
def _pad_positions(N: int, M: int) -> np.ndarray:
    return np.arange(-N, N + 1) % M


def _to_grid(stack: np.ndarray, N: int, M: int) -> np.ndarray:
    """Embed centered coefficients into an M^3 FFT-layout array and transform
    to physical samples (complex; imaginary part is round-off for Hermitian
    input)."""
    p = _pad_positions(N, M)
    full = np.zeros(stack.shape[:-3] + (M, M, M), dtype=complex)
    full[..., p[:, None, None], p[None, :, None], p[None, None, :]] = stack
    return np.fft.ifftn(full, axes=(-3, -2, -1)) * (M ** 3)


def _from_grid(phys: np.ndarray, N_out: int, M: int) -> np.ndarray:
    """Transform physical samples back and extract modes with |m| <= N_out."""
    full = np.fft.fftn(phys, axes=(-3, -2, -1)) / (M ** 3)
    p = _pad_positions(N_out, M)
    return full[..., p[:, None, None], p[None, :, None], p[None, None, :]]


def dealias_pad_size(N_in: int, N_out: int) -> int:
    """Grid size making quadratic products exact on modes |m| <= N_out."""
    return _fast_len(2 * N_in + N_out + 1)


def project_constraints(f: SpectralVelocity) -> SpectralVelocity:
    """Orthogonal (coefficient-wise) projection onto the constraint space.

    Enforces Hermitian symmetry, zero mean, even vertical parity, and the
    divergence-free vertical average.  The four projections commute, so the
    composition is the nearest-point projection and is idempotent.
    """
    c = f.coeffs
    # real-valued physical field: average with the conjugate of the -m entry
    c = 0.5 * (c + np.conj(c[:, ::-1, ::-1, ::-1]))
    # even in z
    c = 0.5 * (c + c[:, :, :, ::-1])
    # zero mean
    N = f.N
    c[:, N, N, N] = 0.0
    # divergence-free vertical average on the m3 = 0 slab
    p11, p12, p22 = _slab_projector(N)
    u = c[0, :, :, N].copy()
    v = c[1, :, :, N].copy()
    c[0, :, :, N] = p11 * u + p12 * v
    c[1, :, :, N] = p12 * u + p22 * v
    return replace(f, coeffs=c)


def split_barotropic(f: SpectralVelocity):
    """Vertical average (modes with m3 = 0) and its complement."""
    N = f.N
    bar = np.zeros_like(f.coeffs)
    bar[:, :, :, N] = f.coeffs[:, :, :, N]
    return replace(f, coeffs=bar), replace(f, coeffs=f.coeffs - bar)


def leray_horizontal(g: SpectralVelocity) -> SpectralVelocity:
    """2D Leray projection of a field supported on the m3 = 0 slab."""
    N = g.N
    if np.any(np.delete(g.coeffs, N, axis=3)):
        raise ValueError("leray_horizontal expects a field supported on m3 = 0")
    c = g.coeffs.copy()
    p11, p12, p22 = _slab_projector(N)
    u = c[0, :, :, N].copy()
    v = c[1, :, :, N].copy()
    c[0, :, :, N] = p11 * u + p12 * v
    c[1, :, :, N] = p12 * u + p22 * v
    return replace(g, coeffs=c)


def hydrostatic_leray(f: SpectralVelocity) -> SpectralVelocity:
    """Leray projection of the vertical average plus the untouched remainder.

    Acts mode-by-mode with spectral matrices of norm <= 1, hence contracts
    every coefficient-weighted norm.
    """
    N = f.N
    c = f.coeffs.copy()
    p11, p12, p22 = _slab_projector(N)
    u = c[0, :, :, N].copy()
    v = c[1, :, :, N].copy()
    c[0, :, :, N] = p11 * u + p12 * v
    c[1, :, :, N] = p12 * u + p22 * v
    return replace(f, coeffs=c)


def _incompressibility_residual(f: SpectralVelocity):
    N = f.N
    m1, m2, _ = lattice(N)
    m1, m2 = m1[:, :, N], m2[:, :, N]
    u, v = f.coeffs[0, :, :, N], f.coeffs[1, :, :, N]
    div = m1 * u + m2 * v
    resid = np.sqrt(np.sum(np.abs(div) ** 2))
    mag = np.sqrt((m1 * m1 + m2 * m2).astype(float))
    scale = np.sqrt(np.sum((mag * np.abs(u)) ** 2 + (mag * np.abs(v)) ** 2))
    return resid, scale


def vertical_velocity(f: SpectralVelocity) -> SpectralScalar:
    """Vertical velocity determined by the divergence-free condition.

    Mode-wise exact antiderivative of minus the horizontal divergence,
    anchored at z = 0.  Requires the vertical-average divergence of the
    input to vanish (up to INCOMPRESSIBILITY_RTOL), otherwise the
    antiderivative is not periodic.
    """
    resid, scale = _incompressibility_residual(f)
    if resid > INCOMPRESSIBILITY_RTOL * max(scale, 1e-300):
        raise ProjectionRequiredError(
            "vertical average is not divergence-free "
            f"(residual {resid:.3e} vs scale {scale:.3e}); project first"
        )
    N = f.N
    m1, m2, m3 = lattice(N)
    s = m1 * f.coeffs[0] + m2 * f.coeffs[1]  # (m' . u_hat), divergence / (2*pi*i)
    w = np.zeros_like(s)
    nz = m3 != 0
    w[nz] = -s[nz] / m3[nz]
    # zero vertical mode fixed by w(., z=0) = 0
    w[:, :, N] = -np.sum(np.delete(w, N, axis=2), axis=2)
    return SpectralScalar(w, N, parity="odd")


def transport_bilinear(u_adv: SpectralVelocity, f: SpectralVelocity) -> SpectralVelocity:
    """Bilinear transport term: horizontal advection plus vertical transport
    by the induced vertical velocity.

    The product is evaluated on a zero-padded grid so the retained modes are
    the exact convolution; the result is *not* re-projected.
    """
    _check_same_truncation(u_adv, f)
    N = f.N
    ik1, ik2, ik3 = _derivative_multipliers(N)

    w = vertical_velocity(u_adv).coeffs
    stack = np.stack(
        [
            u_adv.coeffs[0],
            u_adv.coeffs[1],
            w,
            ik1 * f.coeffs[0],
            ik2 * f.coeffs[0],
            ik3 * f.coeffs[0],
            ik1 * f.coeffs[1],
            ik2 * f.coeffs[1],
            ik3 * f.coeffs[1],
        ]
    )
    M = dealias_pad_size(N, N)
    g = _to_grid(stack, N, M)
    q1 = g[0] * g[3] + g[1] * g[4] + g[2] * g[5]
    q2 = g[0] * g[6] + g[1] * g[7] + g[2] * g[8]
    out = _from_grid(np.stack([q1, q2]), N, M)
    return SpectralVelocity(out, N)


def scalar_product(f: SpectralScalar, g: SpectralScalar, N_out: int | None = None) -> SpectralScalar:
    """Alias-free pointwise product of two scalar fields, truncated to N_out
    (defaults to the full product support 2N)."""
    _check_same_truncation(f, g)
    N = f.N
    if N_out is None:
        N_out = 2 * N
    M = dealias_pad_size(N, N_out)
    a = _to_grid(f.coeffs[None], N, M)[0]
    b = _to_grid(g.coeffs[None], N, M)[0]
    out = _from_grid((a * b)[None], N_out, M)[0]
    parity = "even" if f.parity == g.parity else "odd"
    return SpectralScalar(out, N_out, parity)


def inner_product(f, g) -> float:
    """Real L2 pairing of two fields of the same kind and truncation."""
    _check_same_truncation(f, g)
    return float(np.sum(f.coeffs * np.conj(g.coeffs)).real)


def physical_samples(field, M: int | None = None) -> np.ndarray:
    """Real-space samples on a uniform M^3 grid (x_j = j / M)."""
    if M is None:
        M = 2 * field.N + 2
    c = field.coeffs if field.coeffs.ndim == 4 else field.coeffs[None]
    out = _to_grid(c, field.N, M).real
    return out if field.coeffs.ndim == 4 else out[0]


def random_coefficients(N: int, seed, decay: float = 3.0, amplitude: float = 1.0) -> SpectralVelocity:
    """Unprojected random velocity coefficients with power-law decay |k|^-decay."""
    rng = np.random.default_rng(seed)
    n = 2 * N + 1
    c = rng.standard_normal((2, n, n, n)) + 1j * rng.standard_normal((2, n, n, n))
    kk = abs_k(N).copy()
    kk[N, N, N] = 2.0 * np.pi
    c *= amplitude * (2.0 * np.pi / kk) ** decay
    return SpectralVelocity(c, N)
