"""Flux-noise transition rates and qubit relaxation.

Rates follow the golden-rule form

    Gamma_mn = |<m| sum_i dH/dphi_ext,i |n>|^2 S(omega_mn) / hbar^2

for white flux noise, S(omega) = S0. With energies in h*GHz a matrix element
``g`` corresponds to ``g / hbar = 2 pi g`` rad/ns, hence the single
conversion factor ``(2 pi)^2`` below; ``S0`` carries units of ns (rad^2 of
reduced flux per unit angular bandwidth).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .basis import HilbertSpace, KronSum, check_hermitian
from .hamiltonian import ZeroPiModel, junction_cos_sin
from .parameters import COMBINATION_JACOBIAN, FluxConfiguration, ParameterSet
from .spectrum import eigensolve, map_points

RATE_CONVERSION = (2 * np.pi) ** 2


@dataclass(frozen=True)
class NoiseModel:
    """White Gaussian flux noise with flat spectral density ``S0`` (ns)."""

    S0: float
    kind: str = "white"

    def __post_init__(self):
        if not self.S0 > 0:
            raise ValueError("S0 must be positive")
        if self.kind != "white":
            raise ValueError("only white flux noise is supported")

    def spectral_density(self, omega) -> np.ndarray | float:
        return np.full_like(np.asarray(omega, dtype=float), self.S0) if np.ndim(omega) else self.S0


def combination_derivatives(model: ZeroPiModel, combos) -> tuple[KronSum, KronSum, KronSum]:
    """dH0/ds13, dH0/dd13 and dH0/ds123 at the static point ``combos``."""
    space, params, ops = model.space, model.params, model.ops
    s13, d13, s123 = combos
    xi = params.xi_cap
    ds13 = junction_cos_sin(space, ops, xi * s13) * (2 * params.E_J * xi)
    h = 0.5 * params.E_L
    p2, p3 = ops.phi2, ops.phi3
    dd13 = KronSum(space.dims, [(h * d13 / 2, (None, None, None)), (-h, (None, None, p3))])
    ds123 = KronSum(
        space.dims,
        [(h * s123 / 2, (None, None, None)), (2 * h, (None, p2, None)), (-h, (None, None, p3))],
    )
    return ds13, dd13, ds123


def flux_derivative_terms(model: ZeroPiModel, flux: FluxConfiguration, loop_index=None) -> KronSum:
    """dH0/dphi_ext,i; ``loop_index=None`` sums over the three loops."""
    parts = combination_derivatives(model, flux.combinations)
    loops = range(3) if loop_index is None else [loop_index]
    out = KronSum(model.space.dims)
    for i in loops:
        if i not in (0, 1, 2):
            raise ValueError("loop_index must be 0, 1 or 2")
        for c, part in enumerate(parts):
            weight = COMBINATION_JACOBIAN[c, i]
            if weight:
                out = out + part * weight
    return out


def flux_derivative_operator(
    space: HilbertSpace,
    params: ParameterSet,
    flux: FluxConfiguration,
    loop_index: int | None = None,
) -> np.ndarray:
    model = ZeroPiModel(params, space)
    op = flux_derivative_terms(model, flux, loop_index).dense()
    return check_hermitian(op, what="flux derivative")


def transition_rate(m: int, n: int, energies, vectors, coupling: np.ndarray, noise: NoiseModel) -> float:
    """Golden-rule rate from |n> to |m> in 1/ns.

    ``coupling`` is the noise operator (dense or :class:`KronSum`), typically the summed flux
    derivative. Degenerate pairs use S(0), which is finite for white noise.
    """
    if m == n:
        raise ValueError("a transition needs two distinct levels")
    applied = coupling.apply(vectors[:, n]) if isinstance(coupling, KronSum) else coupling @ vectors[:, n]
    element = np.vdot(vectors[:, m], applied)
    omega = 2 * np.pi * (energies[m] - energies[n])
    return float(RATE_CONVERSION * abs(element) ** 2 * noise.spectral_density(omega))


def rate_matrix(energies, vectors, coupling, noise: NoiseModel) -> np.ndarray:
    """All pairwise rates among the supplied eigenvectors (diagonal zero).

    ``coupling`` may be a dense array or a :class:`KronSum`.
    """
    applied = coupling.apply(vectors) if isinstance(coupling, KronSum) else coupling @ vectors
    g = vectors.conj().T @ applied
    rates = RATE_CONVERSION * np.abs(g) ** 2 * noise.S0
    np.fill_diagonal(rates, 0.0)
    return rates


def relaxation_curve(gamma_10: float, t_grid) -> np.ndarray:
    """Noise-averaged return probability 1 - Gamma_10 t, clamped to [0, 1]."""
    if gamma_10 < 0:
        raise ValueError("rate must be non-negative")
    t = np.asarray(t_grid, dtype=float)
    if t.size and (t[0] != 0 or np.any(np.diff(t) < 0)):
        raise ValueError("t_grid must ascend from 0")
    return np.clip(1.0 - gamma_10 * t, 0.0, 1.0)


@dataclass
class RelaxationResult:
    rates: np.ndarray
    curve: np.ndarray
    t_grid: np.ndarray
    S0: float

    @property
    def gamma_10(self) -> float:
        return float(self.rates[1, 0])

    @property
    def T1(self) -> float:
        """1/Gamma_10 in ns."""
        return np.inf if self.gamma_10 == 0 else 1.0 / self.gamma_10


def relaxation(
    params: ParameterSet,
    flux: FluxConfiguration,
    noise: NoiseModel,
    t_grid,
    space: HilbertSpace | None = None,
    levels: int = 3,
) -> RelaxationResult:
    model = ZeroPiModel(params, space or HilbertSpace())
    energies, vectors = eigensolve(model.h0_terms(flux.combinations), levels)
    coupling = flux_derivative_terms(model, flux)
    rates = rate_matrix(energies, vectors, coupling, noise)
    t = np.asarray(t_grid, dtype=float)
    return RelaxationResult(rates, relaxation_curve(rates[1, 0], t), t, noise.S0)


@dataclass
class RateSweep:
    """Unit-S0 rates versus a uniform static flux offset."""

    flux_grid: np.ndarray
    levels: np.ndarray
    unit_rates: np.ndarray  # (points, levels, levels) at S0 = 1 ns
    S0: float = 1.0
    meta: dict = field(default_factory=dict)

    def gamma(self, m: int, n: int) -> np.ndarray:
        return self.S0 * self.unit_rates[:, m, n]

    def with_S0(self, S0: float) -> RateSweep:
        return RateSweep(self.flux_grid, self.levels, self.unit_rates, S0, dict(self.meta))

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["phi_e0", "Gamma_10", "Gamma_21", "Gamma_20"])
            for i, phi in enumerate(self.flux_grid):
                r = self.S0 * self.unit_rates[i]
                w.writerow([f"{phi:.9g}", f"{r[1, 0]:.9g}", f"{r[2, 1]:.9g}", f"{r[2, 0]:.9g}"])
        return path


def _rate_point(args):
    params, space, phi, levels = args
    model = ZeroPiModel(params, space)
    flux = FluxConfiguration.uniform(phi)
    energies, vectors = eigensolve(model.h0_terms(flux.combinations), levels)
    coupling = flux_derivative_terms(model, flux)
    return energies, rate_matrix(energies, vectors, coupling, NoiseModel(1.0))


def rate_sweep(
    params: ParameterSet,
    space: HilbertSpace | None = None,
    phi_range=(-np.pi, np.pi),
    points: int = 201,
    levels: int = 3,
    workers: int = 1,
) -> RateSweep:
    """Rates among the lowest ``levels`` states with phi_e0 equal on all loops."""
    space = space or HilbertSpace()
    grid = np.linspace(phi_range[0], phi_range[1], points)
    if workers <= 1:
        model = ZeroPiModel(params, space)
        results = []
        for phi in grid:
            flux = FluxConfiguration.uniform(phi)
            energies, vectors = eigensolve(model.h0_terms(flux.combinations), levels)
            coupling = flux_derivative_terms(model, flux)
            results.append((energies, rate_matrix(energies, vectors, coupling, NoiseModel(1.0))))
    else:
        results = map_points(_rate_point, [(params, space, p, levels) for p in grid], workers)
    energies = np.array([r[0] for r in results])
    rates = np.array([r[1] for r in results])
    return RateSweep(grid, energies, rates, 1.0, {"params": params.as_dict(), "space": space.as_dict()})


def calibrate_S0(unit_gamma_10, target_T1_us: float = 10.0) -> float:
    """S0 (ns) giving T1 = target at the geometric mean of the supplied unit-S0 rates."""
    g = np.asarray(unit_gamma_10, dtype=float)
    if np.any(g <= 0):
        raise ValueError("calibration points need a non-zero Gamma_10")
    mean_rate = float(np.exp(np.mean(np.log(g))))
    return 1.0 / (mean_rate * target_T1_us * 1e3)


def unit_gamma_10(params: ParameterSet, phis, space: HilbertSpace | None = None) -> np.ndarray:
    """Gamma_10 at S0 = 1 ns for each uniform static offset in ``phis``."""
    model = ZeroPiModel(params, space or HilbertSpace())
    out = []
    for phi in phis:
        flux = FluxConfiguration.uniform(phi)
        energies, vectors = eigensolve(model.h0_terms(flux.combinations), 2)
        coupling = flux_derivative_terms(model, flux)
        out.append(transition_rate(1, 0, energies, vectors, coupling, NoiseModel(1.0)))
    return np.array(out)
