"""Coupled oscillators: system assembly, energies, state embedding, estimation."""

import numpy as np
import pytest

from glsim import (LocalityError, OscillatorState, PreconditionError, build_system,
                   chain, dense_from_oracle, estimate_energy, estimate_observable,
                   extended_dimension, grid, inner_product_estimate, load_system,
                   pair_decode, pair_index, psi0, read_state_csv, save_system,
                   sparse_vector_oracle, spectral_norm, total_energy,
                   write_state_csv)


def _random_chain_system(rng, n: int):
    masses = rng.uniform(0.5, 2.0, size=n)
    springs = {(i, i + 1): float(rng.uniform(0.5, 2.0)) for i in range(n - 1)}
    springs[(0, 0)] = float(rng.uniform(0.5, 2.0))
    return build_system(chain(n), masses, springs, 1)


def _dense_b(sys) -> np.ndarray:
    """B as an n x (extended_dim - n) dense block, columns indexed by spring pairs."""
    n = sys.n_sites
    b = np.zeros((n, sys.extended_dim - n), dtype=np.complex128)
    for (a, c) in sorted(sys.springs):
        col = pair_index(a, c, n) - n
        for i in range(n):
            b[i, col] = sys.b_entry(i, lambda pr: 1.0 if pr == (a, c) else 0.0)
    return b


# =====================================================================
# index bookkeeping
# =====================================================================


def test_pair_index_round_trip():
    n = 7
    seen = set()
    for i in range(n):
        for j in range(i, n):
            idx = pair_index(i, j, n)
            assert n <= idx < extended_dimension(n)
            assert pair_decode(idx, n) == (i, j)
            seen.add(idx)
    assert len(seen) == n * (n + 1) // 2


def test_extended_dimension_formula():
    for n in (1, 2, 5, 12):
        assert extended_dimension(n) == n + n * (n + 1) // 2


# =====================================================================
# system assembly
# =====================================================================


def test_single_mass_wall_spring_system():
    sys = build_system(chain(1), [1.0], {(0, 0): 1.0}, 1)
    assert np.allclose(dense_from_oracle(sys.a_oracle()).entries, [[1.0]])
    assert sys.bdag_entry(0, 0, lambda k: {0: 1.0}[k]) == pytest.approx(1.0)


def test_two_mass_pair_matrix():
    sys = build_system(chain(2), [1.0, 1.0], {(0, 1): 1.0}, 1)
    dense = dense_from_oracle(sys.a_oracle()).entries
    assert np.allclose(dense, [[1.0, -1.0], [-1.0, 1.0]], atol=1e-14)


def test_b_times_b_dagger_reconstructs_a():
    rng = np.random.default_rng(101)
    sys = _random_chain_system(rng, 32)
    b = _dense_b(sys)
    dense_a = dense_from_oracle(sys.a_oracle()).entries
    assert np.abs(b @ b.conj().T - dense_a).max() <= 1e-10


def test_nonlocal_spring_rejected():
    with pytest.raises(LocalityError):
        build_system(chain(5), np.ones(5), {(0, 4): 1.0}, 1)


def test_nonpositive_mass_rejected():
    with pytest.raises(PreconditionError):
        build_system(chain(2), [1.0, 0.0], {(0, 1): 1.0}, 1)


def test_negative_spring_rejected():
    with pytest.raises(PreconditionError):
        build_system(chain(2), [1.0, 1.0], {(0, 1): -2.0}, 1)


# =====================================================================
# norm bounds
# =====================================================================


def test_norm_bound_dominates_dense_norm_on_chains():
    rng = np.random.default_rng(102)
    for _ in range(5):
        sys = _random_chain_system(rng, 12)
        dense = dense_from_oracle(sys.a_oracle()).entries
        assert spectral_norm(dense) <= sys.a_norm_bound + 1e-12
        assert sys.h_norm_bound == pytest.approx(np.sqrt(sys.a_norm_bound))


def test_norm_bound_dominates_dense_norm_on_uniform_grid():
    """Uniform springs on a 2D grid drive ||A|| past N(r0) kappa/m; the bound must cover it."""
    g = grid([5, 4])
    springs = {}
    for i in range(20):
        for j in g.ball(i, 1):
            if j > i:
                springs[(i, j)] = 1.0
    sys = build_system(g, np.ones(20), springs, 1)
    dense = dense_from_oracle(sys.a_oracle()).entries
    nrm = spectral_norm(dense)
    assert nrm > g.locality_function(1) * 1.0  # the naive bound is genuinely exceeded
    assert nrm <= sys.a_norm_bound + 1e-12


# =====================================================================
# energy and the embedded state
# =====================================================================


def test_two_mass_stretch_energy():
    sys = build_system(chain(2), [1.0, 1.0], {(0, 1): 1.0}, 1)
    assert total_energy(sys, OscillatorState([1.0, -1.0], [0.0, 0.0])) == 2.0


def test_wall_spring_energy():
    sys = build_system(chain(1), [1.0], {(0, 0): 1.0}, 1)
    assert total_energy(sys, OscillatorState([1.0], [0.0])) == 0.5


def test_energy_matches_dense_quadratic_forms():
    rng = np.random.default_rng(103)
    sys = _random_chain_system(rng, 10)
    state = OscillatorState(rng.normal(size=10), rng.normal(size=10))
    b = _dense_b(sys)
    sqm = np.sqrt(sys.masses)
    kinetic = 0.5 * np.linalg.norm(sqm * state.xdot) ** 2
    potential = 0.5 * np.linalg.norm(b.conj().T @ (sqm * state.x)) ** 2
    assert total_energy(sys, state) == pytest.approx(kinetic + potential, abs=1e-12)


def test_single_oscillator_initial_state_is_pinned():
    sys = build_system(chain(1), [1.0], {(0, 0): 1.0}, 1)
    psi = psi0(sys, OscillatorState([1.0], [0.0]))
    assert psi.dimension == 2
    assert psi.query(0) == 0.0
    assert psi.query(1) == pytest.approx(1j)


def test_initial_state_is_unit_and_matches_dense_assembly():
    rng = np.random.default_rng(104)
    sys = _random_chain_system(rng, 9)
    state = OscillatorState(rng.normal(size=9), rng.normal(size=9))
    psi = psi0(sys, state)
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)
    e = total_energy(sys, state)
    sqm = np.sqrt(sys.masses)
    dense = np.zeros(sys.extended_dim, dtype=np.complex128)
    dense[:9] = sqm * state.xdot / np.sqrt(2.0 * e)
    dense[9:] = 1j * (_dense_b(sys).conj().T @ (sqm * state.x)) / np.sqrt(2.0 * e)
    for idx in range(sys.extended_dim):
        assert abs(psi.query(idx) - dense[idx]) <= 1e-12


def test_rest_state_has_no_unit_embedding():
    sys = build_system(chain(2), [1.0, 1.0], {(0, 1): 1.0}, 1)
    with pytest.raises(PreconditionError):
        psi0(sys, OscillatorState([0.0, 0.0], [0.0, 0.0]))


# =====================================================================
# estimation
# =====================================================================


def test_observable_at_t_zero_matches_plain_inner_product():
    rng = np.random.default_rng(105)
    sys = _random_chain_system(rng, 6)
    state = OscillatorState(rng.normal(size=6), rng.normal(size=6))
    v = sparse_vector_oracle(sys.extended_dim, {2: 0.8, 7: 0.6j})
    eps = 0.05
    est = estimate_observable(sys, state, v, 0.0, eps, 0.05, seed=106)
    plain = inner_product_estimate(psi0(sys, state), v, eps, 0.05, seed=106)
    assert abs(est.value - plain.value) <= eps


def test_energy_estimate_full_subsets_is_one():
    rng = np.random.default_rng(107)
    sys = _random_chain_system(rng, 8)
    state = OscillatorState(rng.normal(size=8), rng.normal(size=8))
    est = estimate_energy(sys, state, range(8), list(sys.springs), 1.3,
                          eps=0.1, delta=0.05, seed=108)
    assert abs(est.value - 1.0) <= 0.1


def test_energy_estimate_empty_subsets_is_zero():
    rng = np.random.default_rng(109)
    sys = _random_chain_system(rng, 8)
    state = OscillatorState(rng.normal(size=8), rng.normal(size=8))
    est = estimate_energy(sys, state, [], [], 0.9, eps=0.1, delta=0.05, seed=110)
    assert est.value == 0.0


def test_energy_estimate_validates_index_ranges():
    sys = build_system(chain(3), np.ones(3), {(0, 1): 1.0, (1, 2): 1.0}, 1)
    state = OscillatorState([1.0, 0.0, 0.0], [0.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        estimate_energy(sys, state, [5], [], 1.0, 0.1, 0.05, seed=111)
    with pytest.raises(ValueError):
        estimate_energy(sys, state, [], [(0, 7)], 1.0, 0.1, 0.05, seed=111)
    # a pair that is no spring of the system is legal and contributes nothing
    est = estimate_energy(sys, state, [], [(0, 2)], 1.0, 0.1, 0.05, seed=111)
    assert abs(est.value) <= 0.1


# =====================================================================
# persistence
# =====================================================================


def test_system_json_round_trip(tmp_path):
    rng = np.random.default_rng(112)
    sys = _random_chain_system(rng, 7)
    path = tmp_path / "system.json"
    save_system(sys, path)
    back = load_system(path)
    assert back.n_sites == sys.n_sites
    assert np.allclose(back.masses, sys.masses)
    assert back.springs == sys.springs
    assert back.r0 == sys.r0
    assert np.array_equal(dense_from_oracle(back.a_oracle()).entries,
                          dense_from_oracle(sys.a_oracle()).entries)


def test_state_csv_round_trip(tmp_path):
    rng = np.random.default_rng(113)
    state = OscillatorState(rng.normal(size=5), rng.normal(size=5))
    path = tmp_path / "state.csv"
    write_state_csv(path, state)
    back = read_state_csv(path)
    assert np.allclose(back.x, state.x, atol=1e-12)
    assert np.allclose(back.xdot, state.xdot, atol=1e-12)
