"""Eigensolves, flux sweeps, avoided crossings and potential landscapes."""
from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg as la
from scipy.sparse.linalg import eigsh

from .basis import HilbertSpace, KronSum, check_hermitian
from .hamiltonian import ZeroPiModel, scalar_potential
from .parameters import FluxConfiguration, ParameterSet, combine

# Beyond this dimension a dense matrix is not formed and Lanczos is used.
DENSE_LIMIT = 4096
LANCZOS_PAD = 4


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude component is real positive."""
    vectors = np.array(vectors, dtype=complex, copy=True)
    idx = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[idx, np.arange(vectors.shape[1])]
    return vectors * (np.abs(pivots) / pivots)[None, :]


def eigensolve(H, K: int | None = None, vectors: bool = True, tol: float = 1e-10):
    """Lowest ``K`` eigenpairs of a Hermitian operator, ascending.

    ``H`` may be a dense array or a :class:`KronSum`; the latter is solved
    matrix-free with Lanczos when its dimension exceeds ``DENSE_LIMIT``.
    """
    if isinstance(H, KronSum):
        if H.dim <= DENSE_LIMIT:
            H = H.dense()
        else:
            return _lanczos(H, K or 6, vectors)
    H = check_hermitian(H, tol=tol, what="Hamiltonian")
    D = H.shape[0]
    K = D if K is None else int(K)
    if not 1 <= K <= D:
        raise ValueError(f"K must be in [1, {D}], got {K}")
    subset = None if K == D else [0, K - 1]
    if vectors:
        w, v = la.eigh(H, subset_by_index=subset)
        return w, fix_phases(v)
    return la.eigh(H, eigvals_only=True, subset_by_index=subset)


def _lanczos(H: KronSum, K: int, vectors: bool):
    # A few extra Ritz pairs guard the K-th level against slow convergence;
    # single-vector Lanczos may still under-count exactly degenerate levels.
    rng = np.random.default_rng(0)
    v0 = rng.standard_normal(H.dim) + 1j * rng.standard_normal(H.dim)
    k = min(K + LANCZOS_PAD, H.dim - 1)
    w, v = eigsh(H.linear_operator(), k=k, which="SA", tol=1e-10, v0=v0, ncv=max(2 * k + 1, 30))
    order = np.argsort(w)[:K]
    w, v = w[order], v[:, order]
    return (w, fix_phases(v)) if vectors else w


@dataclass
class SpectrumSweep:
    """Lowest eigenvalues along a one-parameter flux sweep."""

    flux_grid: np.ndarray
    levels: np.ndarray
    jump_factor: float = 10.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.flux_grid = np.asarray(self.flux_grid, dtype=float)
        self.levels = np.asarray(self.levels, dtype=float)
        if self.levels.shape[0] != self.flux_grid.size:
            raise ValueError("one row of levels per flux point is required")
        if np.any(np.diff(self.levels, axis=1) < -1e-9):
            raise ValueError("levels must be ascending at every flux point")

    @property
    def n_levels(self) -> int:
        return self.levels.shape[1]

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.levels, axis=1)

    def gap(self, pair=(0, 1)) -> np.ndarray:
        k, l = pair
        return self.levels[:, l] - self.levels[:, k]

    def discontinuities(self) -> list[tuple[int, int]]:
        """(point, level) pairs whose step exceeds ``jump_factor`` x the median step."""
        steps = np.abs(np.diff(self.levels, axis=0))
        flagged = []
        for k in range(self.n_levels):
            med = np.median(steps[:, k])
            if med == 0:
                continue
            for i in np.nonzero(steps[:, k] > self.jump_factor * med)[0]:
                flagged.append((int(i + 1), k))
        return flagged

    def to_csv(self, path) -> Path:
        path = Path(path)
        header = ["phi_ext"] + [f"E{k}" for k in range(self.n_levels)]
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for phi, row in zip(self.flux_grid, self.levels):
                w.writerow([f"{phi:.9g}"] + [f"{e:.9g}" for e in row])
        return path

    @classmethod
    def from_csv(cls, path) -> SpectrumSweep:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1:])


def _uniform_point(args):
    params, space, phi, K = args
    model = ZeroPiModel(params, space)
    return eigensolve(model.h0_terms(combine((phi, phi, phi))), K, vectors=False)


def map_points(func, items, workers: int = 1):
    """Ordered map, optionally over a process pool."""
    items = list(items)
    if workers <= 1:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def sweep_flux(
    params: ParameterSet,
    space: HilbertSpace | None = None,
    phi_range=(-np.pi, np.pi),
    points: int = 201,
    K: int = 6,
    workers: int = 1,
) -> SpectrumSweep:
    """Eigenvalues with all three loop phases set to the same value."""
    if points < 2:
        raise ValueError("a sweep needs at least two points")
    space = space or HilbertSpace()
    grid = np.linspace(phi_range[0], phi_range[1], points)
    if workers <= 1:
        model = ZeroPiModel(params, space)
        levels = [eigensolve(model.h0_terms(combine((p, p, p))), K, vectors=False) for p in grid]
    else:
        levels = map_points(_uniform_point, [(params, space, p, K) for p in grid], workers)
    return SpectrumSweep(grid, np.array(levels), meta={"params": params.as_dict(), "space": space.as_dict()})


@dataclass(frozen=True)
class AvoidedCrossing:
    flux_location: float
    level_pair: tuple[int, int]
    min_gap: float


def _parabola_vertex(x, y):
    """Vertex of the parabola through three points."""
    (x0, x1, x2), (y0, y1, y2) = x, y
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2**2 * (y0 - y1) + x1**2 * (y2 - y0) + x0**2 * (y1 - y2)) / denom
    c = (x1 * x2 * (x1 - x2) * y0 + x2 * x0 * (x2 - x0) * y1 + x0 * x1 * (x0 - x1) * y2) / denom
    if a <= 0:
        return x1, y1
    xv = -b / (2 * a)
    return xv, c - b**2 / (4 * a)


def find_avoided_crossings(sweep: SpectrumSweep, pair=(0, 1), rtol: float = 1e-9) -> list[AvoidedCrossing]:
    """Interior local minima of the gap between ``pair``, refined by a 3-point parabola.

    Plateaus flatter than ``rtol`` relative to the gap scale are not minima.
    """
    x = sweep.flux_grid
    if x.size < 3:
        raise ValueError("need at least three sweep points")
    g = sweep.gap(pair)
    tol = rtol * max(np.abs(g).max(), 1e-300)
    found = []
    for i in range(1, x.size - 1):
        left, right = g[i - 1] - g[i], g[i + 1] - g[i]
        if left > tol and right >= -tol and (right > tol or _rises_later(g, i, tol)):
            xv, gv = _parabola_vertex(x[i - 1:i + 2], g[i - 1:i + 2])
            xv = float(np.clip(xv, x[i - 1], x[i + 1]))
            found.append(AvoidedCrossing(xv, tuple(pair), float(max(min(gv, g[i]), 0.0))))
    return found


def _rises_later(g, i, tol):
    for j in range(i + 1, g.size):
        if g[j] - g[i] > tol:
            return True
        if g[j] - g[i] < -tol:
            return False
    return False


@dataclass(frozen=True)
class OperatingPoint:
    flux: float
    gap_01: float
    gap_12: float
    mismatch: float


def locate_operating_point(sweep: SpectrumSweep, targets=(0.0919945, 0.74615)) -> OperatingPoint:
    """Grid point whose lowest two gaps best match ``targets`` (summed relative error)."""
    if sweep.n_levels < 3:
        raise ValueError("need at least three levels")
    g01, g12 = sweep.gap((0, 1)), sweep.gap((1, 2))
    mismatch = np.abs(g01 / targets[0] - 1) + np.abs(g12 / targets[1] - 1)
    i = int(np.argmin(mismatch))
    return OperatingPoint(float(sweep.flux_grid[i]), float(g01[i]), float(g12[i]), float(mismatch[i]))


PLANES = {"12": (0, 1), "13": (0, 2), "23": (1, 2)}


def sample_potential_plane(
    params: ParameterSet,
    flux: FluxConfiguration | None = None,
    plane: str = "13",
    n: int = 101,
    fixed_coord: float = 0.0,
    extent=(-2 * np.pi, 2 * np.pi),
):
    """Classical potential on a plane of two reduced phases.

    Returns ``(x, y, V)`` with ``V[i, j] = V(x[i], y[j])``; the remaining
    phase is held at ``fixed_coord``.
    """
    if n < 2:
        raise ValueError("grid needs at least two points per axis")
    if plane not in PLANES:
        raise ValueError(f"plane must be one of {sorted(PLANES)}")
    flux = flux or FluxConfiguration()
    x = np.linspace(extent[0], extent[1], n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    coords = [np.full_like(X, fixed_coord) for _ in range(3)]
    a, b = PLANES[plane]
    coords[a], coords[b] = X, Y
    V = scalar_potential(params, *coords, phases=flux.phi_e0)
    return x, x.copy(), V


def potential_to_csv(path, x, y, V) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "V"])
        for i, xi in enumerate(x):
            for j, yj in enumerate(y):
                w.writerow([f"{xi:.9g}", f"{yj:.9g}", f"{V[i, j]:.9g}"])
    return path
