from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zeropi.basis import HilbertSpace, KronSum
from zeropi.hamiltonian import build_H0, scalar_potential
from zeropi.parameters import SET1, FluxConfiguration, ParameterSet, combine
from zeropi.spectrum import (
    DENSE_LIMIT,
    SpectrumSweep,
    eigensolve,
    find_avoided_crossings,
    fix_phases,
    locate_operating_point,
    potential_to_csv,
    sample_potential_plane,
    sweep_flux,
)

SMALL = HilbertSpace(n_max=2, d2=9, d3=9)


def random_hermitian(rng, d):
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (A + A.conj().T) / 2


def charpoly_coefficients(H):
    """Faddeev-LeVerrier recursion: coefficients of det(lambda I - H), highest first."""
    d = H.shape[0]
    coeffs = [1.0 + 0j]
    M = np.zeros_like(H)
    for k in range(1, d + 1):
        M = H @ M + coeffs[-1] * np.eye(d)
        coeffs.append(-np.trace(H @ M) / k)
    return np.array(coeffs)


def avoided_toy(x, delta, x0=0.0):
    half = np.sqrt((x - x0) ** 2 + delta**2)
    return SpectrumSweep(x, np.column_stack([-half, half]))


def test_diagonal_case():
    w, v = eigensolve(np.diag([3.0, 1.0, 2.0]).astype(complex))
    np.testing.assert_allclose(w, [1, 2, 3])
    np.testing.assert_allclose(np.abs(v), np.eye(3)[:, [1, 2, 0]])


def test_two_level_case():
    delta = 0.37
    w = eigensolve(np.array([[0, delta], [delta, 0]], dtype=complex), vectors=False)
    np.testing.assert_allclose(w, [-delta, delta], atol=1e-15)


def test_input_validation():
    with pytest.raises(ValueError, match="Hermitian"):
        eigensolve(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(ValueError):
        eigensolve(np.eye(3, dtype=complex), K=4)
    with pytest.raises(ValueError):
        eigensolve(np.eye(3, dtype=complex), K=0)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 64), st.integers(0, 2**31 - 1), st.booleans())
def test_residual_and_orthonormality(d, seed, partial):
    H = random_hermitian(np.random.default_rng(seed), d)
    K = max(1, d // 2) if partial else d
    w, v = eigensolve(H, K)
    assert np.all(np.diff(w) >= 0)
    norm = np.linalg.norm(H, 2)
    assert np.linalg.norm(H @ v - v * w, axis=0).max() < 1e-8 * norm
    assert np.abs(v.conj().T @ v - np.eye(K)).max() < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31 - 1))
def test_against_characteristic_polynomial(d, seed):
    H = random_hermitian(np.random.default_rng(seed), d)
    roots = np.sort(np.roots(charpoly_coefficients(H)).real)
    w = eigensolve(H, vectors=False)
    np.testing.assert_allclose(w, roots, atol=1e-8 * max(1.0, np.abs(roots).max()))


def test_phase_convention_is_deterministic():
    rng = np.random.default_rng(4)
    H = random_hermitian(rng, 6)
    _, v = eigensolve(H)
    rotated = fix_phases(v * np.exp(1j * rng.uniform(0, 2 * np.pi, 6)))
    np.testing.assert_allclose(rotated, v, atol=1e-12)
    pivots = v[np.argmax(np.abs(v), axis=0), np.arange(6)]
    assert np.all(pivots.real > 0) and np.allclose(pivots.imag, 0)


def test_matrix_free_path_above_dense_limit():
    d = 17
    assert d**3 > DENSE_LIMIT
    x = np.diag(np.arange(d, dtype=float)).astype(complex)
    weights = (1.0, 0.5 * np.sqrt(2), 0.25 * np.sqrt(3))
    ks = KronSum((d, d, d), [(weights[0], (x, None, None)), (weights[1], (None, x, None)), (weights[2], (None, None, x))])
    ks = ks + KronSum((d, d, d), [(0.3, (None, None, None))])
    exact = np.sort((np.arange(d)[:, None, None] * weights[0] + np.arange(d)[None, :, None] * weights[1]
                     + np.arange(d)[None, None, :] * weights[2]).ravel() + 0.3)[:4]
    w, v = eigensolve(ks, 4)
    np.testing.assert_allclose(w, exact, atol=1e-8)
    assert np.abs(v.conj().T @ v - np.eye(4)).max() < 1e-8
    Hv = ks.apply(v)
    assert np.linalg.norm(Hv - v * w, axis=0).max() < 1e-6


def test_trace_identity_full_spectrum():
    H = build_H0(SMALL, SET1, FluxConfiguration.uniform(0.7))
    w = eigensolve(H, vectors=False)
    assert w.sum() == pytest.approx(np.trace(H).real, rel=1e-6)


def test_sweep_is_bit_deterministic(tmp_path):
    kwargs = dict(space=SMALL, phi_range=(-np.pi, np.pi), points=7, K=4)
    a = sweep_flux(SET1, **kwargs).to_csv(tmp_path / "a.csv")
    b = sweep_flux(SET1, **kwargs).to_csv(tmp_path / "b.csv")
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "phi_ext,E0,E1,E2,E3"
    assert len(lines) == 8
    back = SpectrumSweep.from_csv(a)
    np.testing.assert_allclose(back.levels, sweep_flux(SET1, **kwargs).levels, rtol=1e-8)


def test_parallel_sweep_matches_serial():
    kwargs = dict(space=SMALL, phi_range=(-1.0, 1.0), points=4, K=3)
    serial = sweep_flux(SET1, **kwargs)
    parallel = sweep_flux(SET1, workers=2, **kwargs)
    np.testing.assert_array_equal(serial.levels, parallel.levels)


def test_sweep_gaps_nonnegative_and_validation():
    sweep = sweep_flux(SET1, SMALL, (-np.pi, np.pi), points=9, K=5)
    assert np.all(sweep.gaps >= 0)
    assert sweep.n_levels == 5
    with pytest.raises(ValueError):
        sweep_flux(SET1, SMALL, points=1)
    with pytest.raises(ValueError):
        SpectrumSweep([0.0, 1.0], [[1.0, 0.0], [0.0, 1.0]])


def test_discontinuity_guard():
    x = np.linspace(0, 1, 11)
    levels = np.column_stack([0.1 * x, 1 + 0.1 * x])
    levels[6:, 1] += 5.0
    flagged = SpectrumSweep(x, levels).discontinuities()
    assert flagged == [(6, 1)]


def test_parallel_levels_have_no_crossings():
    x = np.linspace(-1, 1, 21)
    sweep = SpectrumSweep(x, np.column_stack([x, x + 0.5]))
    assert find_avoided_crossings(sweep) == []
    with pytest.raises(ValueError):
        find_avoided_crossings(SpectrumSweep(x[:2], np.zeros((2, 2))))


@pytest.mark.parametrize("points", [20, 41, 101])
def test_symmetric_avoided_crossing(points):
    delta = 0.05
    x = np.linspace(-1, 1, points)
    found = find_avoided_crossings(avoided_toy(x, delta))
    assert len(found) == 1
    c = found[0]
    spacing = x[1] - x[0]
    assert abs(c.flux_location) < spacing
    assert c.level_pair == (0, 1)
    assert 0 < c.min_gap
    # the refined gap lies between the exact minimum and the sampled minimum
    assert 2 * delta - 1e-12 <= c.min_gap + 0.5 * spacing**2 / delta
    assert c.min_gap <= avoided_toy(x, delta).gap().min() + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.6, 0.6), st.floats(0.02, 0.3), st.integers(15, 60))
def test_crossing_location_stable_under_refinement(x0, delta, points):
    coarse = np.linspace(-1, 1, points)
    fine = np.linspace(-1, 1, 2 * points - 1)
    a = find_avoided_crossings(avoided_toy(coarse, delta, x0))
    b = find_avoided_crossings(avoided_toy(fine, delta, x0))
    assert len(a) == len(b) == 1
    assert abs(a[0].flux_location - b[0].flux_location) < coarse[1] - coarse[0]


def test_operating_point_picks_best_match():
    x = np.linspace(-1, 1, 5)
    levels = np.column_stack([np.zeros(5), [0.5, 0.2, 0.1, 0.3, 0.4], [2.0, 1.0, 0.85, 1.2, 1.4]])
    op = locate_operating_point(SpectrumSweep(x, levels), targets=(0.1, 0.75))
    assert op.flux == 0.0
    assert op.gap_01 == pytest.approx(0.1) and op.gap_12 == pytest.approx(0.75)
    assert op.mismatch == pytest.approx(0.0)


def test_potential_plane_staggered_minima():
    x, y, V = sample_potential_plane(SET1, plane="13", n=121, extent=(-np.pi, np.pi))
    i0, ipi = np.argmin(np.abs(x)), np.argmin(np.abs(x - np.pi))
    assert abs(y[np.argmin(V[i0])]) < 0.1
    assert abs(abs(y[np.argmin(V[ipi])]) - np.pi) < 0.2


def test_potential_plane_periodic():
    flux = FluxConfiguration((0.3, -0.2, 0.5))
    x, y, V = sample_potential_plane(SET1, flux, "12", n=33, fixed_coord=0.4, extent=(-2, 2))
    X, Y = np.meshgrid(x, y, indexing="ij")
    shifted = scalar_potential(SET1, X + 2 * np.pi, Y, 0.4, flux.phi_e0)
    np.testing.assert_allclose(shifted, V, atol=1e-11)


def test_potential_quadratic_bowl():
    p = ParameterSet(1.0, 1.0, 0.0, 1.0)
    phases = (0.4, 0.2, -0.6)
    _, d13, s123 = combine(phases)
    x, y, V = sample_potential_plane(p, FluxConfiguration(phases), "23", n=201, extent=(-3, 3))
    i, j = np.unravel_index(np.argmin(V), V.shape)
    phi3 = d13 / 2
    phi2 = (phi3 - s123 / 2) / 2
    spacing = x[1] - x[0]
    assert abs(x[i] - phi2) <= spacing and abs(y[j] - phi3) <= spacing
    assert V.min() >= -1e-12


def test_potential_csv(tmp_path):
    x, y, V = sample_potential_plane(SET1, n=3)
    path = potential_to_csv(tmp_path / "v.csv", x, y, V)
    lines = path.read_text().splitlines()
    assert lines[0] == "x,y,V" and len(lines) == 10
    with pytest.raises(ValueError):
        sample_potential_plane(SET1, plane="14")
    with pytest.raises(ValueError):
        sample_potential_plane(SET1, n=1)
