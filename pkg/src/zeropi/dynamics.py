"""Driven evolution with a Magnus propagator, survival and transition records.

Time runs in ns and energies in h*GHz, so the propagator is
``U = T exp(-2 pi i int H dt)``. Each step uses two Gauss-Legendre nodes
``t + dt (1/2 -+ sqrt(3)/6)``; order 1 keeps the quadrature of the first
Magnus term and order 2 adds the two-node commutator correction, which makes
the scheme fourth order in ``dt``.

Drive runs work in a truncated eigenbasis of the static Hamiltonian: the
drive operators are projected once and every step handles ``K x K`` matrices.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.linalg as la
from scipy import stats

from .basis import HilbertSpace, check_hermitian
from .hamiltonian import ZeroPiModel, drive_coefficients
from .parameters import FluxConfiguration, ParameterSet
from .spectrum import DENSE_LIMIT, eigensolve

GAUSS_OFFSETS = (0.5 - np.sqrt(3) / 6, 0.5 + np.sqrt(3) / 6)
COMMUTATOR_WEIGHT = np.sqrt(3) / 12 * (2 * np.pi) ** 2
RECORD_PAIRS = ((0, 1), (0, 2), (1, 2), (1, 3))


class NormDriftError(RuntimeError):
    """Raised when the propagated states lose orthonormality."""


def unitarity_defect(U: np.ndarray) -> float:
    """max |U^dagger U - I|."""
    return float(np.abs(U.conj().T @ U - np.eye(U.shape[1])).max())


def unitary_from_hermitian(A: np.ndarray) -> np.ndarray:
    """exp(-i A) for Hermitian ``A`` via eigendecomposition."""
    w, v = la.eigh(A)
    return (v * np.exp(-1j * w)) @ v.conj().T


@dataclass
class Propagator:
    U: np.ndarray
    t0: float
    t1: float

    @property
    def defect(self) -> float:
        return unitarity_defect(self.U)

    def then(self, later: Propagator) -> Propagator:
        """Compose with a propagator that starts where this one ends."""
        if not np.isclose(later.t0, self.t1, rtol=0, atol=1e-9 * max(1.0, abs(self.t1))):
            raise ValueError("propagators are not contiguous in time")
        return Propagator(later.U @ self.U, self.t0, later.t1)


def magnus_exponent(h_provider: Callable[[float], np.ndarray], t: float, dt: float, order: int = 2) -> np.ndarray:
    """Hermitian ``A = i Omega`` for one step, so that ``U = exp(-i A)``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    H1 = check_hermitian(np.asarray(h_provider(t + GAUSS_OFFSETS[0] * dt)), what="H(t)")
    H2 = check_hermitian(np.asarray(h_provider(t + GAUSS_OFFSETS[1] * dt)), what="H(t)")
    A = np.pi * dt * (H1 + H2)
    if order == 2:
        A = A - 1j * COMMUTATOR_WEIGHT * dt**2 * (H2 @ H1 - H1 @ H2)
    return 0.5 * (A + A.conj().T)


def magnus_step(h_provider, t: float, dt: float, order: int = 2) -> Propagator:
    return Propagator(unitary_from_hermitian(magnus_exponent(h_provider, t, dt, order)), t, t + dt)


def _time_steps(t0: float, t1: float, dt: float) -> tuple[int, float]:
    if not dt > 0:
        raise ValueError("dt must be positive")
    if t1 < t0:
        raise ValueError("t1 must not precede t0")
    n = max(1, int(round((t1 - t0) / dt)))
    return n, (t1 - t0) / n


def propagate(h_provider, t0: float, t1: float, dt: float, order: int = 2) -> Propagator:
    """Composed propagator over [t0, t1] with steps no longer than about ``dt``."""
    n, h = _time_steps(t0, t1, dt)
    U = None
    for k in range(n):
        step = unitary_from_hermitian(magnus_exponent(h_provider, t0 + k * h, h, order))
        U = step if U is None else step @ U
    return Propagator(U, t0, t1)


def adiabatic_flux_ramp(flux: FluxConfiguration | np.ndarray, epsilon: float, t) -> np.ndarray:
    """Offsets phi0 (1 - exp(-epsilon t)); broadcasts over an array of times."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    phi0 = np.asarray(flux.phi_e0 if isinstance(flux, FluxConfiguration) else flux, dtype=float)
    ramp = 1.0 - np.exp(-epsilon * np.asarray(t, dtype=float))
    return np.multiply.outer(ramp, phi0)


@dataclass
class DrivenSystem:
    """Static spectrum plus drive operators expressed in its eigenbasis."""

    params: ParameterSet
    flux: FluxConfiguration
    energies: np.ndarray
    operators: dict[str, np.ndarray]

    @classmethod
    def build(
        cls,
        params: ParameterSet,
        flux: FluxConfiguration,
        space: HilbertSpace | None = None,
        levels: int | None = 32,
    ) -> DrivenSystem:
        """``levels=None`` keeps the whole basis."""
        model = ZeroPiModel(params, space or HilbertSpace())
        if levels is None and model.dim > DENSE_LIMIT:
            raise ValueError(f"full basis of dimension {model.dim} exceeds the dense limit {DENSE_LIMIT}")
        energies, vectors = eigensolve(model.h0_terms(flux.combinations), levels)
        ops = {}
        for name, op in model.drive_operators().items():
            ops[name] = vectors.conj().T @ op.apply(vectors)
        return cls(params, flux, energies, ops)

    @property
    def levels(self) -> int:
        return self.energies.size

    def truncate(self, levels: int) -> DrivenSystem:
        if not 1 <= levels <= self.levels:
            raise ValueError("cannot truncate to more levels than available")
        ops = {k: v[:levels, :levels] for k, v in self.operators.items()}
        return DrivenSystem(self.params, self.flux, self.energies[:levels], ops)

    def hamiltonian(self, t: float) -> np.ndarray:
        H = np.diag(self.energies).astype(complex)
        if self.flux.driven:
            for name, coef in drive_coefficients(self.params, self.flux, t).items():
                H += coef * self.operators[name]
        return H

    def __call__(self, t: float) -> np.ndarray:
        return self.hamiltonian(t)


@dataclass
class EvolutionRecord:
    t_grid: np.ndarray
    survival_amplitude: np.ndarray
    populations: np.ndarray  # (len(t_grid), levels) from the initial state
    transitions: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def survival_probability(self) -> np.ndarray:
        return np.abs(self.survival_amplitude) ** 2

    def to_csv(self, path) -> Path:
        path = Path(path)
        cols = [self.transitions.get(p) for p in RECORD_PAIRS]
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t_ns", "Re_S", "Im_S", "survival", "P01", "P02", "P12", "P13"])
            for i, t in enumerate(self.t_grid):
                s = self.survival_amplitude[i]
                row = [t, s.real, s.imag, abs(s) ** 2] + [np.nan if c is None else c[i] for c in cols]
                w.writerow([f"{v:.9g}" for v in row])
        return path


def evolve(
    system: DrivenSystem,
    T: float,
    dt: float,
    initial: int | np.ndarray = 0,
    pairs=RECORD_PAIRS,
    order: int = 2,
    record_every: int = 1,
    norm_tol: float = 1e-8,
) -> EvolutionRecord:
    """Step the initial state (and the eigenstates named in ``pairs``) to ``T``.

    Transition probabilities are ``P_ij(t) = |<j|U(t)|i>|^2`` with ``i, j``
    labelling static eigenstates. Orthonormality of the propagated block is
    checked at every record point.
    """
    K = system.levels
    if isinstance(initial, (int, np.integer)):
        psi0 = np.zeros(K, dtype=complex)
        psi0[int(initial)] = 1.0
    else:
        psi0 = np.asarray(initial, dtype=complex)
        if psi0.shape != (K,):
            raise ValueError(f"initial state must have length {K}")
    if abs(np.linalg.norm(psi0) - 1) > 1e-10:
        raise ValueError("initial state must be normalized")
    for i, j in pairs:
        if not (0 <= i < K and 0 <= j < K):
            raise ValueError(f"pair {(i, j)} outside the {K}-level basis")

    sources = sorted({i for i, _ in pairs})
    block = np.column_stack([psi0] + [np.eye(K, dtype=complex)[:, i] for i in sources])
    gram0 = block.conj().T @ block

    n, h = _time_steps(0.0, T, dt)
    times, amps, pops = [0.0], [1.0 + 0j], [np.abs(psi0) ** 2]
    trans = {p: [abs(block[p[1], 1 + sources.index(p[0])]) ** 2] for p in pairs}
    for k in range(n):
        t = k * h
        block = unitary_from_hermitian(magnus_exponent(system, t, h, order)) @ block
        if (k + 1) % record_every and k + 1 != n:
            continue
        drift = float(np.abs(block.conj().T @ block - gram0).max())
        if drift > norm_tol:
            raise NormDriftError(f"norm drift {drift:.3e} exceeds {norm_tol:.1e} at t = {t + h:.6g} ns")
        psi = block[:, 0]
        times.append(t + h)
        amps.append(np.vdot(psi0, psi))
        pops.append(np.abs(psi) ** 2)
        for p in pairs:
            trans[p].append(abs(block[p[1], 1 + sources.index(p[0])]) ** 2)

    meta = {"T": T, "dt": h, "order": order, "levels": K, "flux": system.flux.as_dict()}
    return EvolutionRecord(
        np.array(times),
        np.array(amps),
        np.array(pops),
        {p: np.array(v) for p, v in trans.items()},
        meta,
    )


def survival_lifetime(record: EvolutionRecord, threshold: float = 0.5) -> float:
    """First time the survival probability falls below ``threshold``.

    Linear interpolation between samples; ``inf`` when it never does.
    """
    s = record.survival_probability
    below = np.nonzero(s < threshold)[0]
    if below.size == 0:
        return np.inf
    i = below[0]
    if i == 0:
        return float(record.t_grid[0])
    t0, t1 = record.t_grid[i - 1], record.t_grid[i]
    return float(t0 + (s[i - 1] - threshold) / (s[i - 1] - s[i]) * (t1 - t0))


def eigenphase_amplitude(energies, weights, t_grid) -> np.ndarray:
    """Survival amplitude sum_k |c_k|^2 exp(-2 pi i E_k t) for a static Hamiltonian."""
    p = np.abs(np.asarray(weights)) ** 2
    E = np.asarray(energies, dtype=float)
    t = np.asarray(t_grid, dtype=float)
    out = np.empty(t.size, dtype=complex)
    for start in range(0, t.size, 2048):
        chunk = t[start:start + 2048]
        out[start:start + 2048] = np.exp(-2j * np.pi * np.outer(chunk, E)) @ p
    return out


def random_phase_variance(weights) -> float:
    """Long-time variance of Re S for a non-degenerate spectrum."""
    p = np.abs(np.asarray(weights)) ** 2
    return float(0.5 * np.sum(p**2))


@dataclass
class AmplitudeStatistics:
    samples: np.ndarray
    mu: float
    sigma: float
    bin_centers: np.ndarray
    density: np.ndarray
    fit_residual: float  # L1 distance between histogram and fitted normal density
    ks_statistic: float
    poor_fit_threshold: float = 0.1

    @property
    def n_samples(self) -> int:
        return self.samples.size

    @property
    def gaussian(self) -> bool:
        return self.fit_residual < self.poor_fit_threshold

    def to_csv(self, path) -> tuple[Path, Path]:
        """Histogram to ``path`` and the fit summary beside it."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bin_center", "density"])
            for c, d in zip(self.bin_centers, self.density):
                w.writerow([f"{c:.9g}", f"{d:.9g}"])
        summary = path.with_name(path.stem + "_summary.csv")
        with summary.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["mu", "sigma", "n_samples"])
            w.writerow([f"{self.mu:.9g}", f"{self.sigma:.9g}", self.n_samples])
        return path, summary


def amplitude_statistics(samples, bins: int = 60, min_samples: int = 1000) -> AmplitudeStatistics:
    """Histogram of Re S with a moment-matched normal fit."""
    x = np.real(np.asarray(samples)).ravel()
    if x.size < min_samples:
        raise ValueError(f"need at least {min_samples} samples, got {x.size}")
    sigma = float(x.std())
    if sigma <= 1e-14 * max(1.0, float(np.abs(x).max())):
        raise ValueError("samples are constant; no distribution to fit")
    mu = float(x.mean())
    density, edges = np.histogram(x, bins=bins, density=True)
    centers = 0.5 * (edges[1:] + edges[:-1])
    model = stats.norm.pdf(centers, mu, sigma)
    residual = float(np.sum(np.abs(density - model) * np.diff(edges)))
    ks = float(stats.kstest(x, "norm", args=(mu, sigma)).statistic)
    return AmplitudeStatistics(x, mu, sigma, centers, density, residual, ks)


def record_window(record: EvolutionRecord, window) -> np.ndarray:
    """Survival amplitudes with ``t`` inside ``window``."""
    t_a, t_b = window
    if not (record.t_grid[0] <= t_a < t_b <= record.t_grid[-1]):
        raise ValueError("window must lie inside the record")
    mask = (record.t_grid >= t_a) & (record.t_grid <= t_b)
    return record.survival_amplitude[mask]


def trace_distance(psi: np.ndarray, phi: np.ndarray) -> float:
    """Trace distance between two pure states."""
    overlap = abs(np.vdot(psi, phi)) ** 2 / (np.vdot(psi, psi).real * np.vdot(phi, phi).real)
    return float(np.sqrt(max(0.0, 1.0 - overlap)))


def propagator_distance(U: np.ndarray, V: np.ndarray) -> float:
    """Largest pure-state trace distance over basis initial states."""
    return max(trace_distance(U[:, k], V[:, k]) for k in range(U.shape[1]))


def reference_propagator(system: DrivenSystem, T: float, rtol: float = 1e-12, atol: float = 1e-13) -> np.ndarray:
    """Propagator from an adaptive Runge-Kutta solve of the Schrodinger equation."""
    from scipy.integrate import solve_ivp

    K = system.levels

    def rhs(t, y):
        return (-2j * np.pi * system(t) @ y.reshape(K, K)).ravel()

    sol = solve_ivp(rhs, (0.0, T), np.eye(K, dtype=complex).ravel(), method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(sol.message)
    return sol.y[:, -1].reshape(K, K)


__all__ = [
    "AmplitudeStatistics",
    "DrivenSystem",
    "EvolutionRecord",
    "NormDriftError",
    "Propagator",
    "adiabatic_flux_ramp",
    "amplitude_statistics",
    "eigenphase_amplitude",
    "evolve",
    "magnus_exponent",
    "magnus_step",
    "propagate",
    "propagator_distance",
    "random_phase_variance",
    "record_window",
    "reference_propagator",
    "survival_lifetime",
    "trace_distance",
    "unitarity_defect",
    "unitary_from_hermitian",
]
