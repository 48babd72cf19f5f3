"""Circuit parameter sets, drive configuration and kinetic coefficients.

Unit convention used throughout the package: energies in h*GHz, times in ns,
phases in radians, and capacitances expressed with e^2/2 = 1 so that a
charging energy E_X corresponds to the capacitance C_X = 1/E_X.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ParameterSet:
    """Symmetric 0-pi circuit energies in h*GHz.

    Parameters
    ----------
    E_C : float
        Charging energy of the shunt capacitors.
    E_CJ : float
        Charging energy of the junction capacitance.
    E_J : float
        Josephson energy of each junction.
    E_L : float
        Inductive energy of each inductor.

    The charging energies must be positive; ``E_J`` and ``E_L`` may be zero
    to switch the junction or inductive terms off.
    """

    E_C: float
    E_CJ: float
    E_J: float
    E_L: float

    def __post_init__(self):
        for name in ("E_C", "E_CJ"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        for name in ("E_J", "E_L"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be non-negative, got {value!r}")

    @property
    def C_C(self) -> float:
        return 1.0 / self.E_C

    @property
    def C_J(self) -> float:
        return 1.0 / self.E_CJ

    @property
    def C_sigma(self) -> float:
        return self.C_C + self.C_J

    @property
    def E_Csigma(self) -> float:
        return 1.0 / self.C_sigma

    @property
    def xi_cap(self) -> float:
        """Flux weight C_C / 2C_sigma entering the junction cosine."""
        return self.C_C / (2.0 * self.C_sigma)

    @property
    def xi_osc(self) -> float:
        """Oscillator length parameter sqrt(2 E_Csigma / E_J) of the ladder basis.

        Without a junction there is no natural length and 1 is returned.
        """
        if self.E_J == 0:
            return 1.0
        return float(np.sqrt(2.0 * self.E_Csigma / self.E_J))

    def as_dict(self) -> dict:
        return {"E_C": self.E_C, "E_CJ": self.E_CJ, "E_J": self.E_J, "E_L": self.E_L}


SET1 = ParameterSet(E_C=1.2, E_CJ=4.0, E_J=6.0, E_L=0.038)
SET2 = ParameterSet(E_C=0.15, E_CJ=10.0, E_J=5.0, E_L=0.13)
SET3 = ParameterSet(E_C=0.65, E_CJ=1.75, E_J=10.8, E_L=0.79)
PARAMETER_SETS = {1: SET1, 2: SET2, 3: SET3}

# Published kinetic coefficients (A, B, C, D, E, F) for the three sets above.
TABLE1 = {
    1: (8.329, 4.661, 17.969, -9.323, 8.400, -8.506),
    2: (1.190, 0.600, 35.488, -1.198, 1.050, -1.051),
    3: (4.390, 2.512, 8.281, -5.024, 4.550, -4.614),
}


@dataclass(frozen=True)
class KineticCoefficients:
    """Coefficients of A n1^2 + B n2^2 + C n3^2 + D n1 n2 + E n2 n3 + F n3 n1.

    ``raw`` holds the unscaled polynomial values in capacitance units and
    ``prefactor`` the overall E_Csigma / (4 C_C C_J C_sigma^2) factor; the
    named fields are the scaled values in h*GHz.
    """

    A: float
    B: float
    C: float
    D: float
    E: float
    F: float
    prefactor: float
    raw: tuple[float, float, float, float, float, float]

    def as_tuple(self) -> tuple[float, float, float, float, float, float]:
        return (self.A, self.B, self.C, self.D, self.E, self.F)

    def matrix(self) -> np.ndarray:
        """Symmetric 3x3 matrix K with H_k0 = n^T K n."""
        A, B, C, D, E, F = self.as_tuple()
        return np.array(
            [
                [A, D / 2, F / 2],
                [D / 2, B, E / 2],
                [F / 2, E / 2, C],
            ]
        )


def kinetic_coefficients(params: ParameterSet) -> KineticCoefficients:
    CC, CJ, CS = params.C_C, params.C_J, params.C_sigma
    raw = (
        2 * CJ * (16 * CC**3 + 39 * CC**2 * CJ + 29 * CC * CJ**2 + 7 * CJ**3),
        2 * CJ * CS**2 * (CC + 7 * CS),
        CS**2 * (14 * CC**2 + 27 * CC * CJ + 14 * CJ**2),
        -4 * CJ * CS**2 * (CC + 7 * CS),
        28 * CJ * CS**3,
        -2 * CJ * CS * (14 * CC**2 + 29 * CC * CJ + 14 * CJ**2),
    )
    prefactor = params.E_Csigma / (4 * CC * CJ * CS**2)
    scaled = [prefactor * r for r in raw]
    return KineticCoefficients(*scaled, prefactor=prefactor, raw=raw)


@dataclass(frozen=True)
class FluxConfiguration:
    """Static offsets and sinusoidal drive of the three loop fluxes.

    The reduced phase of loop ``i`` is
    ``phi_e0[i] + a[i] * cos(2 pi omega[i] t)``; ``omega`` is an ordinary
    frequency in GHz so that a drive at ``omega = E_1 - E_0`` is resonant.
    ``epsilon`` (1/ns) sets the adiabatic ramp rate used by
    :func:`zeropi.dynamics.adiabatic_flux_ramp`.
    """

    phi_e0: tuple[float, float, float] = (0.0, 0.0, 0.0)
    a: tuple[float, float, float] = (0.0, 0.0, 0.0)
    omega: tuple[float, float, float] = (0.0, 0.0, 0.0)
    epsilon: float = 0.0

    def __post_init__(self):
        for name in ("phi_e0", "a", "omega"):
            value = tuple(float(v) for v in getattr(self, name))
            if len(value) != 3:
                raise ValueError(f"{name} needs three entries, got {len(value)}")
            object.__setattr__(self, name, value)
        if min(self.omega) < 0:
            raise ValueError("drive frequencies must be non-negative")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")

    @classmethod
    def uniform(cls, phi: float = 0.0, a: float = 0.0, omega: float = 0.0, epsilon: float = 0.0):
        """All three loops share the same offset and drive."""
        return cls((phi,) * 3, (a,) * 3, (omega,) * 3, epsilon)

    @property
    def driven(self) -> bool:
        return any(v != 0.0 for v in self.a)

    @property
    def combinations(self) -> tuple[float, float, float]:
        """Static (phi+_13, phi-_13, phi+_123)."""
        return combine(self.phi_e0)

    def delta(self, t: float) -> np.ndarray:
        """Drive deviations delta phi_e,i(t)."""
        a, w = np.asarray(self.a), np.asarray(self.omega)
        return a * np.cos(2 * np.pi * w * t)

    def delta_rate(self, t: float) -> np.ndarray:
        """Time derivatives of the drive deviations, rad/ns."""
        a, w = np.asarray(self.a), np.asarray(self.omega)
        return -2 * np.pi * w * a * np.sin(2 * np.pi * w * t)

    def with_offsets(self, phi_e0) -> FluxConfiguration:
        return FluxConfiguration(tuple(phi_e0), self.a, self.omega, self.epsilon)

    def as_dict(self) -> dict:
        return {
            "phi_e0": list(self.phi_e0),
            "a": list(self.a),
            "omega": list(self.omega),
            "epsilon": self.epsilon,
        }


def combine(phases) -> tuple[float, float, float]:
    """Map three loop phases to (phi1 + phi3, phi1 - phi3, phi1 + 2 phi2 + phi3)."""
    p1, p2, p3 = (float(p) for p in phases)
    return (p1 + p3, p1 - p3, p1 + 2 * p2 + p3)


# d(s13, d13, s123) / d(phi_e1, phi_e2, phi_e3); column i belongs to loop i.
COMBINATION_JACOBIAN = np.array(
    [
        [1.0, 0.0, 1.0],
        [1.0, 0.0, -1.0],
        [1.0, 2.0, 1.0],
    ]
)
