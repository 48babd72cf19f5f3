"""Truncated tensor-product Hilbert space and single-mode operators.

Mode 1 is the 2pi-periodic coordinate and always lives in a charge basis
``n1 = -n_max..n_max``. Modes 2 and 3 are extended coordinates represented
either by a truncated harmonic-oscillator basis or by a uniform phase grid.

Operators on the full space are kept as sums of Kronecker products
(:class:`KronSum`), which can be densified for moderate dimensions or applied
matrix-free when the grid basis makes the dense matrix too large.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as la
from scipy.sparse.linalg import LinearOperator

BASIS_KINDS = ("oscillator", "grid")


@dataclass(frozen=True)
class HilbertSpace:
    """Truncation of the three circuit modes.

    Parameters
    ----------
    n_max : int
        Charge cutoff of mode 1; the basis has ``2 n_max + 1`` states.
    d2, d3 : int
        Number of basis functions of modes 2 and 3.
    basis : {"oscillator", "grid"}
        Representation of modes 2 and 3.
    grid_half_width : float
        Half width (radians) of the periodic phase box used by the grid basis.
    """

    n_max: int = 5
    d2: int = 11
    d3: int = 11
    basis: str = "oscillator"
    grid_half_width: float = 4 * np.pi

    def __post_init__(self):
        if self.basis not in BASIS_KINDS:
            raise ValueError(f"basis must be one of {BASIS_KINDS}, got {self.basis!r}")
        if self.n_max < 1 or self.d2 < 2 or self.d3 < 2:
            raise ValueError("each mode needs at least two basis states")
        if self.dim < 8:
            raise ValueError(f"total dimension {self.dim} is below the minimum of 8")
        if self.grid_half_width <= 0:
            raise ValueError("grid_half_width must be positive")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (2 * self.n_max + 1, self.d2, self.d3)

    @property
    def dim(self) -> int:
        d1, d2, d3 = self.dims
        return d1 * d2 * d3

    def as_dict(self) -> dict:
        return {
            "n_max": self.n_max,
            "d2": self.d2,
            "d3": self.d3,
            "basis": self.basis,
            "grid_half_width": self.grid_half_width,
        }


# ----------------------------------------------------------------------------
# single-mode operators

def charge_operator(n_max: int) -> np.ndarray:
    return np.diag(np.arange(-n_max, n_max + 1)).astype(complex)


def charge_shift(n_max: int) -> np.ndarray:
    """Truncated exp(i phi1): maps |n> to |n+1>."""
    d = 2 * n_max + 1
    return np.diag(np.ones(d - 1), -1).astype(complex)


def oscillator_operators(d: int, xi: float) -> tuple[np.ndarray, np.ndarray]:
    """Charge and phase operators on ``d`` oscillator states.

    ``n = i/(2 sqrt(xi)) (a^dag - a)`` and its conjugate
    ``phi = sqrt(xi) (a + a^dag)`` so that ``[phi, n] = i`` away from the
    truncation edge.
    """
    if d < 2:
        raise ValueError("oscillator mode needs at least two states")
    a = np.diag(np.sqrt(np.arange(1, d)), 1).astype(complex)
    ad = a.conj().T
    n = 1j / (2 * np.sqrt(xi)) * (ad - a)
    phi = np.sqrt(xi) * (a + ad)
    return n, phi


def grid_operators(d: int, half_width: float) -> tuple[np.ndarray, np.ndarray]:
    """Charge and phase operators on a periodic grid of ``d`` points.

    The phase is diagonal; the charge is the exact Fourier conjugate
    ``-i d/dphi`` of the box, so ``n @ n`` is the spectral second derivative.
    """
    if d < 2:
        raise ValueError("grid mode needs at least two points")
    dx = 2 * half_width / d
    x = dx * (np.arange(d) - (d - 1) / 2)
    k = 2 * np.pi * np.fft.fftfreq(d, d=dx)
    if d % 2 == 0:
        k[d // 2] = 0.0  # drop the unpaired Nyquist mode so n stays odd under parity
    F = np.fft.fft(np.eye(d), axis=0) / np.sqrt(d)
    n = F.conj().T @ np.diag(k) @ F
    n = 0.5 * (n + n.conj().T)
    return n.astype(complex), np.diag(x).astype(complex)


def hermitian_function(op: np.ndarray, func) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its eigenbasis."""
    w, v = la.eigh(op)
    return (v * func(w)) @ v.conj().T


def expi(op: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """exp(i * scale * op) for Hermitian ``op``."""
    return hermitian_function(op, lambda w: np.exp(1j * scale * w))


@dataclass(frozen=True)
class ModeOperators:
    """Single-mode building blocks for one :class:`HilbertSpace`."""

    n1: np.ndarray
    shift1: np.ndarray
    n2: np.ndarray
    phi2: np.ndarray
    n3: np.ndarray
    phi3: np.ndarray
    eye: tuple[np.ndarray, np.ndarray, np.ndarray]

    @property
    def exp_phi2(self) -> np.ndarray:
        return expi(self.phi2)

    @property
    def exp_phi3(self) -> np.ndarray:
        return expi(self.phi3)


def mode_operators(space: HilbertSpace, xi_osc: float) -> ModeOperators:
    d1, d2, d3 = space.dims
    if space.basis == "oscillator":
        n2, phi2 = oscillator_operators(d2, xi_osc)
        n3, phi3 = oscillator_operators(d3, xi_osc)
    else:
        n2, phi2 = grid_operators(d2, space.grid_half_width)
        n3, phi3 = grid_operators(d3, space.grid_half_width)
    return ModeOperators(
        n1=charge_operator(space.n_max),
        shift1=charge_shift(space.n_max),
        n2=n2,
        phi2=phi2,
        n3=n3,
        phi3=phi3,
        eye=(np.eye(d1, dtype=complex), np.eye(d2, dtype=complex), np.eye(d3, dtype=complex)),
    )


# ----------------------------------------------------------------------------
# Kronecker-sum operators

class KronSum:
    """Operator ``sum_k c_k  A_k (x) B_k (x) C_k`` on a three-mode space.

    ``None`` factors stand for the identity on that mode.
    """

    def __init__(self, dims: Sequence[int], terms: Iterable | None = None):
        self.dims = tuple(int(d) for d in dims)
        self.terms: list[tuple[complex, tuple]] = []
        for coef, factors in terms or ():
            self.add(coef, factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def add(self, coef: complex, factors: Sequence) -> KronSum:
        if coef != 0:
            if len(factors) != 3:
                raise ValueError("need exactly three factors")
            self.terms.append((complex(coef), tuple(factors)))
        return self

    def __add__(self, other: KronSum) -> KronSum:
        if self.dims != other.dims:
            raise ValueError("dimension mismatch")
        return KronSum(self.dims, self.terms + other.terms)

    def __mul__(self, scalar) -> KronSum:
        return KronSum(self.dims, [(c * scalar, f) for c, f in self.terms])

    __rmul__ = __mul__

    def adjoint(self) -> KronSum:
        return KronSum(
            self.dims,
            [(np.conj(c), tuple(None if f is None else f.conj().T for f in fs)) for c, fs in self.terms],
        )

    def hermitian_part(self) -> KronSum:
        return (self + self.adjoint()) * 0.5

    def dense(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for coef, factors in self.terms:
            mats = [np.eye(d, dtype=complex) if f is None else f for f, d in zip(factors, self.dims)]
            out += coef * np.kron(np.kron(mats[0], mats[1]), mats[2])
        return out

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """Matrix-free product with a vector or a (dim, k) block."""
        psi = np.asarray(psi, dtype=complex)
        single = psi.ndim == 1
        block = psi.reshape(self.dims + (-1,))
        out = np.zeros_like(block)
        for coef, (f1, f2, f3) in self.terms:
            y = block
            if f1 is not None:
                y = np.einsum("ia,ajkm->ijkm", f1, y)
            if f2 is not None:
                y = np.einsum("ja,iakm->ijkm", f2, y)
            if f3 is not None:
                y = np.einsum("ka,ijam->ijkm", f3, y)
            out += coef * y
        out = out.reshape(self.dim, -1)
        return out[:, 0] if single else out

    def linear_operator(self) -> LinearOperator:
        return LinearOperator(
            (self.dim, self.dim),
            matvec=self.apply,
            matmat=self.apply,
            dtype=complex,
        )

    def diagonal_trace(self) -> complex:
        total = 0j
        for coef, factors in self.terms:
            tr = coef
            for f, d in zip(factors, self.dims):
                tr *= d if f is None else np.trace(f)
            total += tr
        return total


def hermiticity_defect(H: np.ndarray) -> float:
    """max|H - H^dag| relative to max|H|."""
    scale = np.abs(H).max()
    if scale == 0:
        return 0.0
    return float(np.abs(H - H.conj().T).max() / scale)


def check_hermitian(H: np.ndarray, tol: float = 1e-10, what: str = "operator") -> np.ndarray:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"{what} must be a square matrix, got shape {H.shape}")
    defect = hermiticity_defect(H)
    if defect > tol:
        raise ValueError(f"{what} is not Hermitian (relative defect {defect:.3e})")
    return H
