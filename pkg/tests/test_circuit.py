from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zeropi.circuit import (
    Branch,
    CircuitError,
    CircuitTopology,
    augment_and_invert,
    build_mesh_matrix,
    constraint_residual,
    effective_capacitance,
    load_topology,
    quadratic_form_coefficients,
    reduce_circuit,
    row_space_residual,
    solve_irrotational,
    topology_from_dict,
    zero_pi_augmented_map,
    zero_pi_coordinate_map,
    zero_pi_effective_capacitance,
    zero_pi_gauge,
    zero_pi_particular_solution,
    zero_pi_reduction,
    zero_pi_topology,
)

C_J, C_C = 0.25, 1 / 1.2
R_CANONICAL = np.array([[1, 0, 1, 0, 0, -1], [0, -1, 0, -1, 0, 1], [0, 1, -1, 0, 1, 0]])

positive = st.floats(min_value=0.05, max_value=20.0, allow_nan=False)


def nullspace_rows(A, k):
    """Right singular vectors of ``A`` with vanishing singular value."""
    return np.linalg.svd(A)[2][-k:]


def test_mesh_matrix_canonical():
    R = build_mesh_matrix(zero_pi_topology(C_J, C_C, 1e-3))
    assert R.shape == (3, 6)
    np.testing.assert_array_equal(R, R_CANONICAL)


def test_mesh_matrix_single_loop():
    topo = CircuitTopology([Branch("a", "capacitor", 1.0), Branch("b", "capacitor", 2.0)], [[1, 1]])
    np.testing.assert_array_equal(build_mesh_matrix(topo), [[1, 1]])


def test_reversed_loops_negate_R():
    topo = zero_pi_topology(C_J, C_C, 1e-3)
    np.testing.assert_array_equal(build_mesh_matrix(topo.reversed()), -R_CANONICAL)


def test_degenerate_loops_rejected():
    branches = [Branch(k, "capacitor", 1.0) for k in "abc"]
    topo = CircuitTopology(branches, [[1, 1, 0], [0, 1, 1], [1, 1, 0]])
    with pytest.raises(CircuitError, match="degenerate loop system"):
        build_mesh_matrix(topo)


def test_invalid_signs_and_orphans():
    branches = [Branch("a", "capacitor", 1.0), Branch("b", "capacitor", 1.0)]
    with pytest.raises(CircuitError):
        CircuitTopology(branches, [[2, 0]])
    with pytest.raises(CircuitError):
        CircuitTopology(branches, [[1, 0]])
    branches[1] = Branch("b", "capacitor", 1.0, loop_free=True)
    CircuitTopology(branches, [[1, 0]])


def test_topology_document_roundtrip(tmp_path):
    topo = zero_pi_topology(C_J, C_C, 1e-3)
    path = tmp_path / "circuit.json"
    path.write_text(json.dumps(topo.to_dict()))
    loaded = load_topology(path)
    np.testing.assert_array_equal(build_mesh_matrix(loaded), R_CANONICAL)
    assert loaded.labels == topo.labels
    yaml_path = tmp_path / "circuit.yaml"
    import yaml

    yaml_path.write_text(yaml.safe_dump(topo.to_dict()))
    assert load_topology(yaml_path).labels == topo.labels
    with pytest.raises(CircuitError):
        topology_from_dict({"branches": [], "loops": []})


@pytest.mark.parametrize("ratio", [1e-6, 1e-9, 1e-12])
def test_irrotational_residual(ratio):
    topo = zero_pi_topology(C_J, C_C, ratio * C_J)
    M = solve_irrotational(topo)
    assert constraint_residual(R_CANONICAL, topo.capacitance_matrix(), M) < 1e-12


def test_row_space_matches_corrected_particular_solution():
    C_L = 1e-9 * C_J
    topo = zero_pi_topology(C_J, C_C, C_L)
    M = solve_irrotational(topo)
    reference = zero_pi_particular_solution(C_J, C_C, C_L)
    assert row_space_residual(M, reference) < 1e-6
    # independent oracle: null space of R C^-1 from its SVD
    Cinv = np.diag(1 / np.diag(topo.capacitance_matrix()))
    oracle = nullspace_rows(R_CANONICAL @ Cinv, 3)
    assert row_space_residual(oracle, reference) < 1e-6


def test_uncorrected_entry_breaks_constraint():
    C_L = 1e-3 * C_J
    K = C_L * C_J + C_J * C_C + C_C * C_L
    bad = zero_pi_particular_solution(C_J, C_C, C_L)
    bad[0, 4] = C_J * (C_J - C_L) / K
    C = zero_pi_topology(C_J, C_C, C_L).capacitance_matrix()
    assert constraint_residual(R_CANONICAL, C, bad) > 1e-3
    assert constraint_residual(R_CANONICAL, C, zero_pi_particular_solution(C_J, C_C, C_L)) < 1e-12


def test_canonical_gauge_approaches_closed_form_map():
    diffs = []
    for ratio in (1e-6, 1e-9, 1e-12):
        red = zero_pi_reduction(C_J, C_C, ratio)
        diffs.append(np.abs(red.M - zero_pi_coordinate_map(C_J, C_C)).max())
        assert red.residual < 1e-12
    assert diffs[0] > diffs[1] > diffs[2]
    assert diffs[2] < 1e-10


def test_closed_form_map_residual_is_reported():
    # the closed-form map only satisfies the constraint in row space; its residual is finite
    C = zero_pi_topology(C_J, C_C, 1e-9 * C_J).capacitance_matrix()
    M = zero_pi_coordinate_map(C_J, C_C)
    assert np.isfinite(constraint_residual(R_CANONICAL, C, M))
    red = zero_pi_reduction(C_J, C_C, 1e-12)
    assert row_space_residual(M, red.M) < 1e-9


def test_singular_gauge_rejected():
    topo = zero_pi_topology(C_J, C_C, 1e-6)
    with pytest.raises(CircuitError, match="singular"):
        solve_irrotational(topo, gauge=np.zeros((3, 3)))
    with pytest.raises(CircuitError):
        solve_irrotational(topo, C=np.diag([1, 1, 0, 1, 1, 1.0]))


def test_augment_and_invert_closed_form():
    M_plus, M_inv = augment_and_invert(zero_pi_coordinate_map(0.5, 0.5), R_CANONICAL)
    np.testing.assert_allclose(M_plus[0, [0, 5]], [0.25, 0.75])
    assert np.abs(M_plus @ M_inv - np.eye(6)).max() < 1e-12


def test_augment_identity_and_singular():
    _, inv = augment_and_invert(np.eye(6)[:3], np.eye(6)[3:])
    np.testing.assert_array_equal(inv, np.eye(6))
    M = zero_pi_coordinate_map(C_J, C_C)
    dup = np.vstack([M[:2], M[1]])
    with pytest.raises(CircuitError, match="augmented matrix singular"):
        augment_and_invert(dup, R_CANONICAL)


def test_effective_capacitance_closed_form():
    C = np.diag([C_J, C_J, 0.0, 0.0, C_C, C_C])
    M_inv = np.linalg.inv(zero_pi_augmented_map(C_J, C_C))
    C_eff = effective_capacitance(M_inv, C)
    np.testing.assert_allclose(C_eff, zero_pi_effective_capacitance(C_J, C_C), atol=1e-12)
    np.testing.assert_array_equal(effective_capacitance(np.eye(6), C), C)


def test_quadratic_form_terms():
    C_eff = zero_pi_effective_capacitance(C_J, C_C)
    names = ["v1", "v2", "v3", "e1", "e2", "e3"]
    q = quadratic_form_coefficients(C_eff, names)
    sigma = C_J + C_C
    assert q[("v1", "v2")] == pytest.approx(2 * sigma)
    assert q[("v2", "v3")] == pytest.approx(-2 * C_J)
    # kappa (e1 + e3)^2 expands to kappa on each square and 2 kappa on the cross term
    kappa = C_C * C_J / (4 * sigma)
    assert q[("e1", "e1")] == pytest.approx(kappa)
    assert q[("e3", "e3")] == pytest.approx(kappa)
    assert q[("e1", "e3")] == pytest.approx(2 * kappa)


def test_reduction_result_fields():
    red = zero_pi_reduction(C_J, C_C, 1e-9)
    assert red.n_dof == 3
    assert red.xi_cap == pytest.approx(C_C / (2 * (C_C + C_J)))
    assert red.C_sigma == pytest.approx(C_C + C_J)
    assert np.linalg.det(red.M_plus) != 0
    assert np.abs(red.C_eff - red.C_eff.T).max() < 1e-10
    assert np.linalg.eigvalsh(red.C_eff[:3, :3]).min() > -1e-12


@settings(max_examples=40, deadline=None)
@given(st.lists(positive, min_size=6, max_size=6), st.integers(0, 2**31 - 1))
def test_effective_capacitance_symmetric(caps, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(6, 6)) + 3 * np.eye(6)
    C_eff = effective_capacitance(np.linalg.inv(A), np.diag(caps))
    np.testing.assert_allclose(C_eff, C_eff.T, atol=1e-10 * np.abs(C_eff).max())


@settings(max_examples=40, deadline=None)
@given(positive, positive, st.floats(min_value=1e-9, max_value=1e-2), st.integers(0, 2**31 - 1))
def test_constraint_and_gauge_covariance(cj, cc, ratio, seed):
    topo = zero_pi_topology(cj, cc, ratio * cj)
    C = topo.capacitance_matrix()
    M = solve_irrotational(topo)
    assert constraint_residual(R_CANONICAL, C, M) < 1e-12
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(3, 3)) + 2 * np.eye(3)
    if np.linalg.cond(A) > 1e6:
        return
    M2 = solve_irrotational(topo, gauge=A)
    assert constraint_residual(R_CANONICAL, C, M2) < 1e-12
    assert row_space_residual(M2, M) < 1e-9


def test_cross_block_vanishes_for_solved_map():
    for r in (1e-3, 1e-6, 1e-9, 1e-12):
        assert np.abs(zero_pi_reduction(C_J, C_C, r).cross_block()).max() < 1e-14


def test_cross_block_shrinks_with_regulator_for_closed_form_map():
    M_inv = np.linalg.inv(zero_pi_augmented_map(C_J, C_C))
    sizes = []
    for r in (1e-3, 1e-6, 1e-9, 1e-12):
        C_eff = effective_capacitance(M_inv, np.diag([C_J, C_J, r * C_J, r * C_J, C_C, C_C]))
        sizes.append(np.abs(C_eff[:3, 3:]).max())
    assert all(b < a for a, b in zip(sizes, sizes[1:]))
    assert sizes[-1] < 1e-10


def test_reduce_circuit_generic_gauge():
    red = reduce_circuit(zero_pi_topology(C_J, C_C, 1e-6), gauge=zero_pi_gauge(C_J, C_C))
    assert red.residual < 1e-12
