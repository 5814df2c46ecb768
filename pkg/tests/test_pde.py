"""Discretized PDE generators: wave, advection, Schrodinger."""

import numpy as np
import pytest

from glsim import (DenseMatrix, advection_hamiltonian, chain, dense_evolve,
                   dense_from_oracle, graph_laplacian_oracle, grid,
                   schrodinger_hamiltonian, spectral_norm, wave_to_oscillators)


def _dense(oracle) -> np.ndarray:
    return dense_from_oracle(oracle).entries


# =====================================================================
# graph Laplacians
# =====================================================================


def test_laplacian_row_sums_vanish_and_offdiagonals_are_minus_one():
    for g in (chain(6), grid([3, 4]), chain(5, "periodic")):
        lap = _dense(graph_laplacian_oracle(g))
        assert np.allclose(lap.sum(axis=1), 0.0, atol=1e-14)
        assert np.allclose(lap, lap.T, atol=1e-14)
        for i in range(g.n_sites):
            for j in range(g.n_sites):
                if i != j and g.distance(i, j) == 1:
                    assert lap[i, j] == -1.0
        evals = np.linalg.eigvalsh(lap)
        assert evals.min() >= -1e-12


# =====================================================================
# wave equation -> oscillator system
# =====================================================================


def test_unit_chain_wave_springs():
    lap = graph_laplacian_oracle(chain(4))
    sys = wave_to_oscillators(lap, c=1.0, a=1.0)
    for i in range(3):
        assert sys.kappa(i, i + 1) == pytest.approx(1.0)
    for i in range(4):
        assert sys.kappa(i, i) == 0.0


def test_wave_system_matrix_is_scaled_laplacian():
    g = grid([4, 3])
    lap = graph_laplacian_oracle(g)
    c, a = 1.3, 0.4
    sys = wave_to_oscillators(lap, c=c, a=a)
    lhs = _dense(sys.a_oracle())
    rhs = (c / a) ** 2 * _dense(graph_laplacian_oracle(g))
    assert np.abs(lhs - rhs).max() <= 1e-12


def test_wave_springs_symmetric_nonnegative_local():
    g = grid([3, 3])
    sys = wave_to_oscillators(graph_laplacian_oracle(g), c=0.7, a=0.5)
    for (i, j), kap in sys.springs.items():
        assert i <= j
        assert kap > 0.0
        assert g.distance(i, j) <= 1


# =====================================================================
# advection
# =====================================================================


def test_small_periodic_advection_matrix():
    h = _dense(advection_hamiltonian([1.0], 1.0, 4, 1))
    assert np.allclose(h, h.conj().T, atol=1e-14)
    assert np.allclose(np.diag(h), 0.0, atol=1e-14)
    for i in range(4):
        j = (i + 1) % 4
        assert h[i, j].real == pytest.approx(0.0, abs=1e-14)
        assert abs(h[i, j].imag) == pytest.approx(0.5)
        assert h[j, i] == pytest.approx(-h[i, j])
    assert h[0, 3] != 0.0  # periodic wraparound present


@pytest.mark.parametrize("velocity,a,n,D", [
    ([0.7], 0.5, 16, 1),
    ([0.4, -0.9], 0.7, 5, 2),
])
def test_advection_norm_bound_and_unitarity(velocity, a, n, D):
    oracle = advection_hamiltonian(velocity, a, n, D)
    dense = _dense(oracle)  # materialization itself validates norm_bound
    assert spectral_norm(dense) <= D * max(abs(v) for v in velocity) / a + 1e-9
    rng = np.random.default_rng(121)
    u = rng.normal(size=n**D) + 1j * rng.normal(size=n**D)
    out = dense_evolve(DenseMatrix(-1j * dense), 1.7, u)
    assert abs(np.linalg.norm(out) - np.linalg.norm(u)) <= 1e-10


# =====================================================================
# Schrodinger
# =====================================================================


def test_free_schrodinger_is_scaled_laplacian_with_bounded_spectrum():
    g = chain(12)
    a = 0.5
    h = schrodinger_hamiltonian(graph_laplacian_oracle(g), np.zeros(12), a)
    dense = _dense(h)
    assert np.abs(dense - _dense(graph_laplacian_oracle(g)) / a**2).max() <= 1e-12
    evals = np.linalg.eigvalsh(dense)
    assert evals.min() >= -1e-12
    assert evals.max() <= 4.0 / a**2 + 1e-12


def test_constant_potential_shifts_spectrum_exactly():
    g = chain(10)
    base = _dense(schrodinger_hamiltonian(graph_laplacian_oracle(g),
                                          np.zeros(10), 1.0))
    shifted = _dense(schrodinger_hamiltonian(graph_laplacian_oracle(g),
                                             np.full(10, 2.5), 1.0))
    assert np.allclose(np.linalg.eigvalsh(shifted),
                       np.linalg.eigvalsh(base) + 2.5, atol=1e-12)


def test_callable_potential_and_norm_preservation():
    g = grid([4, 4])
    rng = np.random.default_rng(122)
    values = rng.uniform(0.0, 2.0, size=16)
    h = schrodinger_hamiltonian(graph_laplacian_oracle(g),
                                lambda i: values[i], 0.6,
                                v_max=float(values.max()))
    dense = _dense(h)  # validates the declared norm_bound densely
    assert np.allclose(np.diag(dense).real - values,
                       np.diag(_dense(graph_laplacian_oracle(g))) / 0.36,
                       atol=1e-12)
    u = rng.normal(size=16) + 1j * rng.normal(size=16)
    out = dense_evolve(DenseMatrix(-1j * dense), 0.9, u)
    assert abs(np.linalg.norm(out) - np.linalg.norm(u)) <= 1e-10
