"""Fourier multiplier calculus: fractional derivative powers, exponential
weights, the noise conjugation multiplier, and the weighted norms used for
radius tracking.

All operations are coefficient-wise and pure.  Exponentially weighted sums
span many orders of magnitude, so norms accumulate the squared terms sorted
by decreasing wavenumber magnitude (pairwise summation on that ordering).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .spectral import abs_k

__all__ = [
    "GevreyParams",
    "ExponentCapError",
    "EXPONENT_CAP",
    "check_exponent_cap",
    "frac_laplacian",
    "exp_multiplier",
    "noise_transform",
    "norm",
]

# Just below the double-precision overflow threshold of exp(x); a radius /
# truncation combination exceeding it fails loudly instead of returning inf.
EXPONENT_CAP = 700.0


class ExponentCapError(OverflowError):
    """Requested exponential weight exceeds the configured cap."""


@dataclass(frozen=True)
class GevreyParams:
    """Norm parameters: differentiability weight exponent sigma*s, weight
    order s in [0, 1], and radius phi >= 0."""

    sigma: float
    s: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.s <= 1.0:
            raise ValueError(f"s must lie in [0, 1], got {self.s}")
        if self.sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.phi < 0.0:
            raise ValueError(f"phi must be non-negative, got {self.phi}")


def max_abs_k(N: int) -> float:
    """Largest wavevector magnitude on the truncated lattice, 2*pi*N*sqrt(3)."""
    return 2.0 * np.pi * N * np.sqrt(3.0)


def check_exponent_cap(phi: float, s: float, N: int, cap: float = EXPONENT_CAP) -> None:
    """Reject exponential weights that would overflow at the grid corner."""
    if phi * max_abs_k(N) ** s > cap:
        raise ExponentCapError(
            f"exponent phi*|k|_max^s = {phi * max_abs_k(N) ** s:.3g} exceeds "
            f"cap {cap:.3g} (phi={phi:.6g}, s={s:.3g}, N={N})"
        )


def _mult(field, factor: np.ndarray):
    return replace(field, coeffs=field.coeffs * factor)


def frac_laplacian(field, s: float):
    """Multiply each coefficient by |k|^s (the zero mode is unaffected)."""
    if s < 0.0:
        raise ValueError(f"s must be non-negative, got {s}")
    if s == 0.0:
        return replace(field, coeffs=field.coeffs.copy())
    return _mult(field, abs_k(field.N) ** s)


def exp_multiplier(field, phi: float, s: float, cap: float = EXPONENT_CAP):
    """Multiply each coefficient by exp(phi * |k|^s); phi may be negative."""
    check_exponent_cap(phi, s, field.N, cap)
    return _mult(field, np.exp(phi * abs_k(field.N) ** s))


def noise_transform(field, nu: float, w: float, s: float, direction: str = "forward",
                    cap: float = EXPONENT_CAP):
    """Apply the noise conjugation multiplier exp(-nu*W*|k|^s) or its inverse.

    'forward' damps with exponent -nu*w, 'inverse' undoes it; for s = 0 both
    degenerate to scalar multiplication by exp(-/+ nu*w).
    """
    if direction == "forward":
        phi = -nu * w
    elif direction == "inverse":
        phi = nu * w
    else:
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    return exp_multiplier(field, phi, s, cap)


@lru_cache(maxsize=32)
def _desc_order(N: int) -> np.ndarray:
    """Flat indices of the mode lattice sorted by decreasing |k|."""
    order = np.argsort(abs_k(N), axis=None, kind="stable")[::-1]
    order.setflags(write=False)
    return order


def _ordered_sum(terms: np.ndarray, N: int) -> float:
    order = _desc_order(N)
    if terms.ndim == 4:  # leading component axis
        return float(sum(np.sum(t.ravel()[order]) for t in terms))
    return float(np.sum(terms.ravel()[order]))


def norm(field, kind: str, params: GevreyParams, cap: float = EXPONENT_CAP) -> float:
    """Weighted coefficient norm of a field.

    Kinds: 'L2', 'Hs' / 'Hs_dot' (Sobolev with exponent sigma*s), and
    'Gevrey' / 'Gevrey_dot' with weight exp(2*phi*|k|^s) |k|^(2*sigma*s).
    """
    N = field.N
    a = np.abs(field.coeffs)
    if kind == "L2":
        return float(np.sqrt(_ordered_sum(a * a, N)))
    kk = abs_k(N)
    r = params.sigma * params.s
    if kind in ("Hs", "Hs_dot"):
        hom = (kk ** r) * a
        total = _ordered_sum(hom * hom, N)
        if kind == "Hs":
            total += _ordered_sum(a * a, N)
        return float(np.sqrt(total))
    if kind in ("Gevrey", "Gevrey_dot"):
        check_exponent_cap(params.phi, params.s, N, cap)
        weighted = np.exp(params.phi * kk ** params.s) * (kk ** r) * a
        total = _ordered_sum(weighted * weighted, N)
        if kind == "Gevrey":
            total += _ordered_sum(a * a, N)
        return float(np.sqrt(total))
    raise ValueError(f"unknown norm kind {kind!r}")
