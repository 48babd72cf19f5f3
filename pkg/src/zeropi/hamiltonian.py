"""Gauge-invariant 0-pi Hamiltonian on a truncated basis.

The static part reads

    H0 = n^T K n - 2 E_J cos(phi2 - phi3) cos(phi1 + phi2 + xi_cap s13)
         + E_L/2 [4 phi2^2 + 2 phi3^2 - 4 phi2 phi3 + d13^2/4 - phi3 d13
                  + s123^2/4 + (2 phi2 - phi3) s123]

with the flux combinations s13 = phi_e1 + phi_e3, d13 = phi_e1 - phi_e3 and
s123 = phi_e1 + 2 phi_e2 + phi_e3. The drive term is the second-order
expansion of the same expression in the flux deviations, plus the scalar
kinetic shift from the flux velocities.

The products cos(x) cos(y) are split as 1/2 [cos(x + y) + cos(y - x)], and
every cosine is written through exp(+-i phi): a unit charge shift on mode 1
and a Hermitian matrix exponential on modes 2 and 3.
"""
from __future__ import annotations

import warnings

import numpy as np

from .basis import HilbertSpace, KronSum, ModeOperators, check_hermitian, expi, mode_operators
from .parameters import FluxConfiguration, ParameterSet, combine, kinetic_coefficients

# (C_C C_J / 4 C_sigma) (dphi/dt)^2 with C in 1/(h GHz) units (e^2/2 = 1) and
# dphi/dt in rad/ns is an energy of (hbar/2e)^2 (e^2/2) / h per unit, i.e.
# 1/(32 pi^2) GHz.
FLUX_VELOCITY_ENERGY = 1.0 / (32 * np.pi**2)


class PhaseRepresentationWarning(UserWarning):
    """The truncated phase operator cannot resolve a full 2pi period."""


def _ops(space: HilbertSpace, params: ParameterSet) -> ModeOperators:
    ops = mode_operators(space, params.xi_osc)
    for label, phi in (("phi2", ops.phi2), ("phi3", ops.phi3)):
        w = np.linalg.eigvalsh(phi)
        if w[-1] - w[0] < 2 * np.pi:
            warnings.warn(
                f"{label} spans only {w[-1] - w[0]:.3f} rad; exp(i {label}) is not faithful "
                "to the periodic junction potential",
                PhaseRepresentationWarning,
                stacklevel=3,
            )
    return ops


def build_charge_operators(space: HilbertSpace, params: ParameterSet):
    """Dense charge operators (n1, n2, n3) on the full space."""
    ops = mode_operators(space, params.xi_osc)
    d = space.dims
    return (
        KronSum(d, [(1, (ops.n1, None, None))]).dense(),
        KronSum(d, [(1, (None, ops.n2, None))]).dense(),
        KronSum(d, [(1, (None, None, ops.n3))]).dense(),
    )


def kinetic_terms(space: HilbertSpace, params: ParameterSet, ops: ModeOperators | None = None) -> KronSum:
    ops = ops or _ops(space, params)
    A, B, C, D, E, F = kinetic_coefficients(params).as_tuple()
    n1, n2, n3 = ops.n1, ops.n2, ops.n3
    return KronSum(
        space.dims,
        [
            (A, (n1 @ n1, None, None)),
            (B, (None, n2 @ n2, None)),
            (C, (None, None, n3 @ n3)),
            (D, (n1, n2, None)),
            (E, (None, n2, n3)),
            (F, (n1, None, n3)),
        ],
    )


def _junction_exponentials(ops: ModeOperators, shift: float):
    """exp(i(x + y + c)) and exp(i(y - x + c)) for x = phi2 - phi3, y = phi1 + phi2."""
    e2, e3 = ops.exp_phi2, ops.exp_phi3
    phase = np.exp(1j * shift)
    w_sum = (phase, (ops.shift1, e2 @ e2, e3.conj().T))
    w_diff = (phase, (ops.shift1, None, e3))
    return w_sum, w_diff


def junction_cos_cos(space: HilbertSpace, ops: ModeOperators, shift: float = 0.0) -> KronSum:
    """cos(phi2 - phi3) cos(phi1 + phi2 + shift)."""
    w_sum, w_diff = _junction_exponentials(ops, shift)
    half = KronSum(space.dims, [w_sum, w_diff]) * 0.25
    return half + half.adjoint()


def junction_cos_sin(space: HilbertSpace, ops: ModeOperators, shift: float = 0.0) -> KronSum:
    """cos(phi2 - phi3) sin(phi1 + phi2 + shift)."""
    w_sum, w_diff = _junction_exponentials(ops, shift)
    half = KronSum(space.dims, [w_sum, w_diff]) * (0.25 / 1j)
    return half + half.adjoint()


def inductive_terms(space, params, ops, d13: float, s123: float) -> KronSum:
    p2, p3 = ops.phi2, ops.phi3
    h = 0.5 * params.E_L
    return KronSum(
        space.dims,
        [
            (4 * h, (None, p2 @ p2, None)),
            (2 * h, (None, None, p3 @ p3)),
            (-4 * h, (None, p2, p3)),
            (h * (d13**2 / 4 + s123**2 / 4), (None, None, None)),
            (-h * d13, (None, None, p3)),
            (2 * h * s123, (None, p2, None)),
            (-h * s123, (None, None, p3)),
        ],
    )


def potential_terms(space, params, combos, ops=None) -> KronSum:
    s13, d13, s123 = combos
    ops = ops or _ops(space, params)
    junction = junction_cos_cos(space, ops, params.xi_cap * s13) * (-2 * params.E_J)
    return junction + inductive_terms(space, params, ops, d13, s123)


def build_potential(space: HilbertSpace, params: ParameterSet, flux: FluxConfiguration, at_time=None) -> np.ndarray:
    """Potential energy operator for static offsets or at an instant of the drive.

    With ``at_time=None`` only the static offsets enter; otherwise the full
    loop phases ``phi_e0 + delta(t)`` are used in the exact potential.
    """
    phases = np.asarray(flux.phi_e0)
    if at_time is not None:
        phases = phases + flux.delta(at_time)
    H = potential_terms(space, params, combine(phases)).dense()
    return check_hermitian(H, what="potential")


def h0_terms(space, params, flux: FluxConfiguration | None = None, combos=None, ops=None) -> KronSum:
    if combos is None:
        combos = (flux or FluxConfiguration()).combinations
    ops = ops or _ops(space, params)
    return kinetic_terms(space, params, ops) + potential_terms(space, params, combos, ops)


def build_H0(space: HilbertSpace, params: ParameterSet, flux: FluxConfiguration | None = None) -> np.ndarray:
    H = h0_terms(space, params, flux).dense()
    return check_hermitian(H, what="H0")


def kinetic_shift(params: ParameterSet, flux: FluxConfiguration, t: float) -> float:
    """Scalar G(t) from the velocities of the loop-1 and loop-3 fluxes, h*GHz."""
    rate = flux.delta_rate(t)
    kappa = params.C_C * params.C_J / (4 * params.C_sigma)
    return float(kappa * FLUX_VELOCITY_ENERGY * (rate[0] + rate[2]) ** 2)


DRIVE_CHANNELS = ("identity", "cos_cos", "cos_sin", "phi2", "phi3")


def drive_operators(space: HilbertSpace, ops: ModeOperators) -> dict[str, KronSum]:
    """Fixed operators whose time-dependent combination forms the drive term."""
    return {
        "identity": KronSum(space.dims, [(1.0, (None, None, None))]),
        "cos_cos": junction_cos_cos(space, ops),
        "cos_sin": junction_cos_sin(space, ops),
        "phi2": KronSum(space.dims, [(1.0, (None, ops.phi2, None))]),
        "phi3": KronSum(space.dims, [(1.0, (None, None, ops.phi3))]),
    }


def drive_coefficients(params: ParameterSet, flux: FluxConfiguration, t: float) -> dict[str, float]:
    """Scalar weights of :func:`drive_operators` at time ``t``.

    The junction weights come from expanding cos(y + a + b) to second order
    in the deviation b; the inductive weights are exact.
    """
    s13, d13, s123 = flux.combinations
    ds13, dd13, ds123 = combine(flux.delta(t))
    xi = params.xi_cap
    a = xi * s13
    b = xi * ds13
    two_ej = 2 * params.E_J
    h = 0.5 * params.E_L
    scalar = 0.5 * dd13 * d13 + 0.25 * dd13**2 + 0.5 * ds123 * s123 + 0.25 * ds123**2
    return {
        "identity": kinetic_shift(params, flux, t) + h * scalar,
        "cos_cos": two_ej * (b * np.sin(a) + 0.5 * b**2 * np.cos(a)),
        "cos_sin": two_ej * (b * np.cos(a) - 0.5 * b**2 * np.sin(a)),
        "phi2": 2 * h * ds123,
        "phi3": -h * (dd13 + ds123),
    }


def ht_terms(space, params, flux: FluxConfiguration, t: float, ops=None) -> KronSum:
    """Drive Hamiltonian, second order in the flux deviations."""
    ops = ops or _ops(space, params)
    operators = drive_operators(space, ops)
    out = KronSum(space.dims)
    for name, coef in drive_coefficients(params, flux, t).items():
        out = out + operators[name] * coef
    return out


def build_Ht(space: HilbertSpace, params: ParameterSet, flux: FluxConfiguration, t: float) -> np.ndarray:
    H = ht_terms(space, params, flux, t).dense()
    return check_hermitian(H, what="H(t)")


def scalar_potential(params: ParameterSet, phi1, phi2, phi3, phases=(0.0, 0.0, 0.0)):
    """Classical potential energy at reduced phases (broadcasting)."""
    s13, d13, s123 = combine(phases)
    phi1, phi2, phi3 = np.broadcast_arrays(*(np.asarray(p, dtype=float) for p in (phi1, phi2, phi3)))
    junction = -2 * params.E_J * np.cos(phi2 - phi3) * np.cos(phi1 + phi2 + params.xi_cap * s13)
    first = 0.5 * d13 - phi3
    second = 2 * phi2 - phi3 + 0.5 * s123
    return junction + 0.5 * params.E_L * (first**2 + second**2)


class ZeroPiModel:
    """Cached single-mode operators for repeated Hamiltonian builds."""

    def __init__(self, params: ParameterSet, space: HilbertSpace | None = None):
        self.params = params
        self.space = space or HilbertSpace()
        self.ops = _ops(self.space, params)
        self._kinetic = kinetic_terms(self.space, params, self.ops)

    @property
    def dim(self) -> int:
        return self.space.dim

    def h0_terms(self, combos) -> KronSum:
        return self._kinetic + potential_terms(self.space, self.params, combos, self.ops)

    def h0(self, flux: FluxConfiguration | None = None, combos=None) -> np.ndarray:
        if combos is None:
            combos = (flux or FluxConfiguration()).combinations
        return self.h0_terms(combos).dense()

    def ht(self, flux: FluxConfiguration, t: float) -> np.ndarray:
        return ht_terms(self.space, self.params, flux, t, self.ops).dense()

    def ht_terms(self, flux: FluxConfiguration, t: float) -> KronSum:
        return ht_terms(self.space, self.params, flux, t, self.ops)

    def drive_operators(self) -> dict[str, KronSum]:
        return drive_operators(self.space, self.ops)
