"""Loop constraints and irrotational coordinates of a multi-loop circuit.

Given the branch capacitances ``C`` and the mesh matrix ``R`` (one signed row
per loop), the irrotational degrees of freedom ``phi~ = M phi`` satisfy

    R C^-1 M^T = 0,

which removes every term linear in the external-flux velocities from the
kinetic Lagrangian. Stacking ``M_plus = (M; R)`` maps branch fluxes to
(coordinates, external fluxes) and the capacitance seen by those variables is
``C_eff = M_plus^-T C M_plus^-1``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

BRANCH_KINDS = ("junction", "inductor", "capacitor")


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Branch:
    label: str
    kind: str
    capacitance: float
    loop_free: bool = False

    def __post_init__(self):
        if self.kind not in BRANCH_KINDS:
            raise CircuitError(f"branch {self.label!r}: unknown kind {self.kind!r}")
        if not self.capacitance > 0:
            raise CircuitError(f"branch {self.label!r}: capacitance must be positive")


@dataclass(frozen=True)
class CircuitTopology:
    """Ordered branches plus signed loop incidences.

    ``loops[f][k]`` is +1 when branch ``k`` runs along the orientation of the
    external flux of loop ``f``, -1 against it and 0 when absent.
    """

    branches: tuple[Branch, ...]
    loops: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        object.__setattr__(self, "loops", tuple(tuple(int(s) for s in row) for row in self.loops))
        n = len(self.branches)
        if not self.loops:
            raise CircuitError("at least one loop is required")
        for f, row in enumerate(self.loops):
            if len(row) != n:
                raise CircuitError(f"loop {f} has {len(row)} signs for {n} branches")
            if any(s not in (-1, 0, 1) for s in row):
                raise CircuitError(f"loop {f}: signs must be -1, 0 or +1")
        signs = np.array(self.loops)
        for k, branch in enumerate(self.branches):
            if not branch.loop_free and not np.any(signs[:, k]):
                raise CircuitError(f"branch {branch.label!r} belongs to no loop")

    @property
    def n_branches(self) -> int:
        return len(self.branches)

    @property
    def n_loops(self) -> int:
        return len(self.loops)

    @property
    def labels(self) -> list[str]:
        return [b.label for b in self.branches]

    def capacitance_matrix(self) -> np.ndarray:
        return np.diag([b.capacitance for b in self.branches])

    def reversed(self) -> CircuitTopology:
        """Same circuit with every loop orientation flipped."""
        return CircuitTopology(self.branches, [[-s for s in row] for row in self.loops])

    def to_dict(self) -> dict:
        return {
            "branches": [
                {"label": b.label, "kind": b.kind, "capacitance": b.capacitance}
                | ({"loop_free": True} if b.loop_free else {})
                for b in self.branches
            ],
            "loops": [{"signs": list(row)} for row in self.loops],
        }


def topology_from_dict(doc: dict) -> CircuitTopology:
    try:
        branches = [
            Branch(
                label=str(b["label"]),
                kind=str(b["kind"]),
                capacitance=float(b["capacitance"]),
                loop_free=bool(b.get("loop_free", False)),
            )
            for b in doc["branches"]
        ]
        loops = [loop["signs"] for loop in doc["loops"]]
    except (KeyError, TypeError) as exc:
        raise CircuitError(f"malformed topology document: {exc}") from exc
    return CircuitTopology(branches, loops)


def load_topology(path) -> CircuitTopology:
    """Read a topology from a JSON or YAML document."""
    text = Path(path).read_text()
    if str(path).endswith((".yaml", ".yml")):
        import yaml

        doc = yaml.safe_load(text)
    else:
        doc = json.loads(text)
    return topology_from_dict(doc)


ZERO_PI_LOOPS = (
    (1, 0, 1, 0, 0, -1),
    (0, -1, 0, -1, 0, 1),
    (0, 1, -1, 0, 1, 0),
)


def zero_pi_topology(C_J: float, C_C: float, C_L: float) -> CircuitTopology:
    """Symmetric 0-pi circuit, branch order (J1, J2, L1, L2, C1, C2).

    ``C_L`` is the auxiliary capacitance across each inductor; use a small
    positive value (e.g. ``1e-9 * C_J``) to stand in for the C_L -> 0 limit.
    """
    branches = (
        Branch("J1", "junction", C_J),
        Branch("J2", "junction", C_J),
        Branch("L1", "inductor", C_L),
        Branch("L2", "inductor", C_L),
        Branch("C1", "capacitor", C_C),
        Branch("C2", "capacitor", C_C),
    )
    return CircuitTopology(branches, ZERO_PI_LOOPS)


# ----------------------------------------------------------------------------
# reduction steps

def build_mesh_matrix(topology: CircuitTopology) -> np.ndarray:
    R = np.array(topology.loops, dtype=int)
    if np.linalg.matrix_rank(R) < R.shape[0]:
        raise CircuitError("degenerate loop system: mesh matrix is rank deficient")
    return R


def _row_echelon(basis: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Reduced row echelon form of a full-row-rank matrix (deterministic basis)."""
    A = np.array(basis, dtype=float)
    rows, cols = A.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(A[r:, c])))
        if abs(A[p, c]) <= tol * max(1.0, np.abs(A).max()):
            continue
        A[[r, p]] = A[[p, r]]
        A[r] /= A[r, c]
        for i in range(rows):
            if i != r:
                A[i] -= A[i, c] * A[r]
        r += 1
    return A


def solve_irrotational(
    topology_or_R,
    C: np.ndarray | None = None,
    gauge: np.ndarray | None = None,
    reference: np.ndarray | None = None,
) -> np.ndarray:
    """Irrotational coordinate map ``M`` with ``R C^-1 M^T = 0``.

    The allowed rows are ``y C`` for ``y`` in the null space of ``R``; that
    null space is taken from the SVD of ``R`` and brought to reduced row
    echelon form so the basis does not depend on LAPACK sign choices. When a
    ``reference`` matrix is given, the basis is instead its orthogonal
    projection onto the solution row space. The optional ``gauge`` (any
    nonsingular (N-F) x (N-F) matrix) multiplies the basis from the left.
    """
    if isinstance(topology_or_R, CircuitTopology):
        R = build_mesh_matrix(topology_or_R).astype(float)
        if C is None:
            C = topology_or_R.capacitance_matrix()
    else:
        R = np.asarray(topology_or_R, dtype=float)
        if np.linalg.matrix_rank(R) < R.shape[0]:
            raise CircuitError("degenerate loop system: mesh matrix is rank deficient")
    if C is None:
        raise CircuitError("capacitance matrix required")
    C = np.asarray(C, dtype=float)
    c = np.diag(C)
    if np.any(c <= 0):
        raise CircuitError("all branch capacitances must be strictly positive")
    F, N = R.shape

    _, s, vt = np.linalg.svd(R)
    rank = int(np.sum(s > s[0] * N * np.finfo(float).eps))
    null = vt[rank:]
    if null.shape[0] != N - F:
        raise CircuitError(f"constraint solve failed: null space has dimension {null.shape[0]}, expected {N - F}")
    echelon = _row_echelon(null)
    coef = np.eye(N - F)
    if reference is not None:
        reference = np.asarray(reference, dtype=float)
        if reference.shape != echelon.shape:
            raise CircuitError(f"reference must be {echelon.shape}, got {reference.shape}")
        # least-squares coordinates of the reference in the solution basis
        coef = np.linalg.lstsq((echelon * c[None, :]).T, reference.T, rcond=None)[0].T
        if np.linalg.cond(coef) > 1e12:
            raise CircuitError("constraint solve failed: reference is degenerate on the solution space")

    if gauge is None:
        gauge = np.eye(N - F)
    gauge = np.asarray(gauge, dtype=float)
    if gauge.shape != (N - F, N - F):
        raise CircuitError(f"gauge must be {(N - F, N - F)}, got {gauge.shape}")
    if np.linalg.cond(gauge) > 1e12:
        raise CircuitError("gauge matrix is singular")
    # scale by C last so entries of the small-capacitance columns keep full relative precision
    return ((gauge @ coef) @ echelon) * c[None, :]


def constraint_residual(R: np.ndarray, C: np.ndarray, M: np.ndarray) -> float:
    """max|R C^-1 M^T| / max|M|."""
    c = np.diag(np.asarray(C, dtype=float))
    res = np.asarray(R, dtype=float) @ (np.asarray(M, dtype=float) / c[None, :]).T
    return float(np.abs(res).max() / np.abs(M).max())


def row_space_residual(M: np.ndarray, reference: np.ndarray) -> float:
    """Largest relative distance of a row of ``reference`` from the row space of ``M``."""
    q, _ = np.linalg.qr(np.asarray(M, dtype=float).T)
    ref = np.asarray(reference, dtype=float)
    proj = ref @ q @ q.T
    return float(np.max(np.linalg.norm(ref - proj, axis=1) / np.linalg.norm(ref, axis=1)))


def augment_and_invert(M: np.ndarray, R: np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    M_plus = np.vstack([np.asarray(M, dtype=float), np.asarray(R, dtype=float)])
    if M_plus.shape[0] != M_plus.shape[1]:
        raise CircuitError(f"stacked matrix is {M_plus.shape}, not square")
    if np.linalg.matrix_rank(M_plus) < M_plus.shape[0]:
        raise CircuitError("augmented matrix singular; check the gauge choice")
    M_plus_inv = np.linalg.inv(M_plus)
    defect = np.abs(M_plus @ M_plus_inv - np.eye(len(M_plus))).max()
    if defect > tol:
        raise CircuitError(f"augmented matrix singular (inversion defect {defect:.2e})")
    return M_plus, M_plus_inv


def effective_capacitance(M_plus_inv: np.ndarray, C: np.ndarray) -> np.ndarray:
    C_eff = M_plus_inv.T @ np.asarray(C, dtype=float) @ M_plus_inv
    scale = max(np.abs(C_eff).max(), np.finfo(float).tiny)
    if np.abs(C_eff - C_eff.T).max() > 1e-10 * scale:
        raise CircuitError("effective capacitance is not symmetric")
    return 0.5 * (C_eff + C_eff.T)


def quadratic_form_coefficients(C_eff: np.ndarray, names: Sequence[str]) -> dict:
    """Monomial coefficients of 1/2 v^T C_eff v, e.g. {('v1', 'v2'): 2 C_12}."""
    out = {}
    n = len(names)
    for i in range(n):
        out[(names[i], names[i])] = 0.5 * C_eff[i, i]
        for j in range(i + 1, n):
            out[(names[i], names[j])] = C_eff[i, j]
    return out


@dataclass(frozen=True)
class ReductionResult:
    R: np.ndarray
    M: np.ndarray
    M_plus: np.ndarray
    M_plus_inv: np.ndarray
    C_eff: np.ndarray
    residual: float
    xi_cap: float | None = None
    C_sigma: float | None = None
    notes: dict = field(default_factory=dict)

    @property
    def n_dof(self) -> int:
        return self.M.shape[0]

    def cross_block(self) -> np.ndarray:
        k = self.n_dof
        return self.C_eff[:k, k:]


def reduce_circuit(
    topology: CircuitTopology,
    gauge: np.ndarray | None = None,
    reference: np.ndarray | None = None,
) -> ReductionResult:
    R = build_mesh_matrix(topology)
    C = topology.capacitance_matrix()
    M = solve_irrotational(topology, C, gauge, reference)
    M_plus, M_plus_inv = augment_and_invert(M, R)
    C_eff = effective_capacitance(M_plus_inv, C)
    xi = sigma = None
    kinds = [b.kind for b in topology.branches]
    if "junction" in kinds and "capacitor" in kinds:
        C_J = topology.branches[kinds.index("junction")].capacitance
        C_C = topology.branches[kinds.index("capacitor")].capacitance
        sigma = C_C + C_J
        xi = C_C / (2 * sigma)
    return ReductionResult(R, M, M_plus, M_plus_inv, C_eff, constraint_residual(R, C, M), xi, sigma)


# ----------------------------------------------------------------------------
# closed-form 0-pi matrices (symmetric circuit)

def zero_pi_particular_solution(C_J: float, C_C: float, C_L: float) -> np.ndarray:
    """Closed-form irrotational solution of the symmetric 0-pi circuit.

    Entry (1, 5) carries the prefactor C_C; with C_J in its place the first
    row violates the loop-3 constraint.
    """
    K = C_L * C_J + C_J * C_C + C_C * C_L
    rows = [
        [C_J * (C_L + C_C), C_J * (C_L + C_C), C_L * (C_J + C_C), C_L * (C_J + C_C),
         C_C * (C_J - C_L), C_C * (C_L + C_J + 2 * C_C)],
        [-C_J * (C_L + C_C), C_J * (C_L + C_C), -C_L * (C_J + C_C), -C_L * (C_J + 2 * C_L + 3 * C_C),
         -C_C * (C_J + C_L + 2 * C_C), -C_C * (C_J + C_L + 2 * C_C)],
        [C_J * (C_C - C_L), -C_J * (C_L + C_C), -C_L * (C_J + C_C), -C_L * (C_J - C_C),
         C_C * (C_L - C_J), -C_C * (C_J + C_L)],
    ]
    return np.array(rows) / K


def zero_pi_gauge(C_J: float, C_C: float) -> np.ndarray:
    """Gauge that makes the coordinate block of M_plus^-1 integer."""
    s = C_C + C_J
    return np.array(
        [
            [C_J / (2 * s), 0.0, 0.0],
            [0.0, C_J / (4 * s), C_J / (4 * s)],
            [0.0, 0.0, 0.5],
        ]
    )


def zero_pi_coordinate_map(C_J: float, C_C: float) -> np.ndarray:
    """Coordinate map M of the 0-pi circuit in the C_L -> 0 limit."""
    s = C_C + C_J
    return np.array(
        [
            [C_J / (2 * s), C_J / (2 * s), 0, 0, C_J / (2 * s), (2 * C_C + C_J) / (2 * s)],
            [0, 0, 0, 0, -0.5, -0.5],
            [0.5, -0.5, 0, 0, -0.5, -0.5],
        ]
    )


def zero_pi_augmented_map(C_J: float, C_C: float) -> np.ndarray:
    return np.vstack([zero_pi_coordinate_map(C_J, C_C), np.array(ZERO_PI_LOOPS, dtype=float)])


def zero_pi_effective_capacitance(C_J: float, C_C: float) -> np.ndarray:
    """Closed-form C_eff of the 0-pi circuit at C_L = 0."""
    s = C_C + C_J
    kappa = C_C * C_J / (2 * s)
    out = np.zeros((6, 6))
    out[:3, :3] = [[2 * s, 2 * s, 0], [2 * s, 4 * s, -2 * C_J], [0, -2 * C_J, 2 * C_J]]
    out[3, 3] = out[3, 5] = out[5, 3] = out[5, 5] = kappa
    return out


def zero_pi_reduction(C_J: float, C_C: float, ratio: float = 1e-9) -> ReductionResult:
    """Reduce the 0-pi circuit at C_L = ratio * C_J in the integer-friendly gauge."""
    C_L = ratio * C_J
    return reduce_circuit(
        zero_pi_topology(C_J, C_C, C_L),
        gauge=zero_pi_gauge(C_J, C_C),
        reference=zero_pi_particular_solution(C_J, C_C, C_L),
    )
