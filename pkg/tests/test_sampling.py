"""Oversampling, rejection sampling, and sampling from time-evolved states."""

import numpy as np
import pytest

from glsim import (DenseMatrix, EvolvedSampler, OversamplerHandle,
                   PreconditionError, chain, dense_evolve, dense_from_oracle,
                   dense_poly_apply, exp_poly, induced_distribution,
                   lightcone_oversampler, local_matrix_from_dense,
                   local_matrix_from_rows, perturbed_sq_access, rejection_sample,
                   rng_stream, sample_evolved, sparse_vector_oracle,
                   sq_access_from_dense, tv_error_bound)


def _unit(rng, n: int) -> np.ndarray:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def _antihermitian_shift(n: int, boundary: str = "open"):
    """i(S + S^dag): anti-Hermitian hopping with norm bound 2."""
    def row_fn(i):
        out = []
        left, right = i - 1, i + 1
        if boundary == "periodic":
            left, right = (i - 1) % n, (i + 1) % n
        if 0 <= left < n:
            out.append((left, 1j))
        if 0 <= right < n and right != left:
            out.append((right, 1j))
        return out

    return local_matrix_from_rows(chain(n, boundary), 1, row_fn,
                                  norm_bound=2.0, anti_hermitian=True)


def _uniform_handle(n: int) -> OversamplerHandle:
    return OversamplerHandle(
        dimension=n,
        draw_many_fn=lambda rng, count: rng.integers(0, n, size=count),
        mass_fn=lambda i: 1.0 / n,
        phi=float(n),
        degree=0,
        zeta=0.0,
    )


# =====================================================================
# the TV error bound
# =====================================================================


def test_tv_bound_zero_eps():
    assert tv_error_bound(0.0, 0.7) == 0.0


def test_tv_bound_pinned_value():
    assert tv_error_bound(0.01, 1.0) == pytest.approx(0.02)


def test_tv_bound_holds_densely_for_random_antihermitian():
    rng = np.random.default_rng(71)
    n, t, eps = 32, 1.5, 1e-3
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    a = (g - g.conj().T) / 2.0
    psi = _unit(rng, n)
    nrm = float(np.linalg.norm(a, 2))
    p = exp_poly(nrm, t, eps)
    via_poly = dense_poly_apply(DenseMatrix(-1j * a), p, psi)
    via_exp = dense_evolve(DenseMatrix(a), t, psi)
    tv = 0.5 * np.abs(induced_distribution(via_poly).probs
                      - induced_distribution(via_exp).probs).sum()
    assert tv <= tv_error_bound(eps, float(np.linalg.norm(via_exp)))


# =====================================================================
# rejection sampling against an explicit handle
# =====================================================================


def test_single_support_target_always_returns_its_site():
    u = sq_access_from_dense([0.0, 0.0, 0.0, 1.0])
    handle = _uniform_handle(4)
    for k in range(20):
        r = rejection_sample(handle, u, phi=4.0, alpha_min=1.0, delta=1e-9,
                             seed=72, stream_key=(k,))
        assert r.accepted and r.site == 3


def test_perfect_oversampler_accepts_first_trial():
    rng = np.random.default_rng(73)
    vec = _unit(rng, 8)
    u = sq_access_from_dense(vec)
    probs = np.abs(vec) ** 2

    handle = OversamplerHandle(
        dimension=8,
        draw_many_fn=sq_access_from_dense(vec).sample_many,
        mass_fn=lambda i: float(probs[i]),
        phi=1.0,
        degree=0,
        zeta=0.0,
    )
    for k in range(20):
        r = rejection_sample(handle, u, phi=1.0, alpha_min=1.0, delta=1e-9,
                             seed=74, stream_key=(k,))
        assert r.accepted and r.trials == 1


def test_observed_oversampling_violation_is_an_error():
    u = sq_access_from_dense([1.0, 0.0, 0.0, 0.0])
    handle = _uniform_handle(4)
    with pytest.raises(PreconditionError):
        rejection_sample(handle, u, phi=2.0, alpha_min=1.0, delta=1e-9, seed=75)


def test_budget_exhaustion_reports_failure():
    u = sq_access_from_dense([0.05, 0.0, 0.0, 0.0])  # norm far below alpha_min
    handle = _uniform_handle(4)
    r = rejection_sample(handle, u, phi=4.0, alpha_min=1.0, delta=0.5, seed=76)
    assert not r.accepted and r.site is None and r.trials > 0


def test_accepted_law_matches_target(subtests=None):
    rng = np.random.default_rng(77)
    n = 64
    vec = _unit(rng, n)
    a = _antihermitian_shift(n)
    psi = sq_access_from_dense(vec, seed=770)
    handle = lightcone_oversampler(a, 2, psi, norm_bound_P=1.0)
    u = sq_access_from_dense(vec)
    draws = []
    for k in range(100_000):
        r = rejection_sample(handle, u, handle.phi, alpha_min=1.0, delta=1e-6,
                             seed=78, chunk=32, stream_key=(k,))
        assert r.accepted
        draws.append(r.site)
    emp = np.bincount(np.array(draws), minlength=n) / len(draws)
    tv = 0.5 * np.abs(emp - np.abs(vec) ** 2).sum()
    assert tv <= 0.02


# =====================================================================
# the light-cone oversampler
# =====================================================================


def test_zero_radius_oversampler_is_psi_law():
    rng = np.random.default_rng(79)
    vec = _unit(rng, 16)
    a = _antihermitian_shift(16)
    handle = lightcone_oversampler(a, 0, sq_access_from_dense(vec, seed=790),
                                   norm_bound_P=1.0)
    for i in range(16):
        assert handle.mass_query(i) == pytest.approx(abs(vec[i]) ** 2, abs=1e-14)


def test_point_state_smears_uniformly_over_ball():
    a = _antihermitian_shift(64)
    psi = sparse_vector_oracle(64, {5: 1.0}, seed=791)
    handle = lightcone_oversampler(a, 2, psi, norm_bound_P=1.0)
    for i in range(64):
        expected = 0.2 if 3 <= i <= 7 else 0.0
        assert handle.mass_query(i) == pytest.approx(expected, abs=1e-14)
    draws = handle.draw_many(rng_stream(792, 0), 20_000)
    freqs = np.bincount(draws, minlength=64) / 20_000
    assert np.all(np.abs(freqs[3:8] - 0.2) <= 0.02)
    assert freqs[np.r_[0:3, 8:64]].max() == 0.0


def test_oversampler_masses_sum_to_one_and_dominate_target():
    rng = np.random.default_rng(80)
    n = 48
    vec = _unit(rng, n)
    dense = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        dense[i, i] = rng.normal()
        if i + 1 < n:
            v = (rng.normal() + 1j * rng.normal()) / np.sqrt(2.0)
            dense[i, i + 1] = v
            dense[i + 1, i] = np.conj(v)
    bound = max(float(np.abs(dense).sum(axis=1).max()), 1.0)
    a = local_matrix_from_dense(dense, chain(n), 1, hermitian=True,
                                norm_bound=bound)
    eps = 1e-6
    p = exp_poly(bound, 1.0, eps)
    handle = lightcone_oversampler(a, p.degree, sq_access_from_dense(vec, seed=800),
                                   norm_bound_P=1.0 + eps)
    masses = np.array([handle.mass_query(i) for i in range(n)])
    assert abs(masses.sum() - 1.0) <= 1e-10
    target = dense_poly_apply(dense_from_oracle(a), p, vec)
    assert np.all(np.abs(target) ** 2 <= handle.phi * masses + 1e-15)


# =====================================================================
# the evolved-state sampler
# =====================================================================


def test_t_zero_sampler_reproduces_initial_law():
    rng = np.random.default_rng(81)
    n = 16
    vec = _unit(rng, n)
    a = _antihermitian_shift(n)
    sampler = EvolvedSampler(a, 0.0, sq_access_from_dense(vec, seed=810),
                             eps=0.05, alpha_min=1.0, delta=1e-6, seed=82)
    assert sampler.poly.degree == 0
    results = sampler.draw_many(30_000)
    sites = np.array([r.site for r in results if r.accepted])
    assert sites.size == 30_000
    emp = np.bincount(sites, minlength=n) / sites.size
    tv = 0.5 * np.abs(emp - np.abs(vec) ** 2).sum()
    assert tv <= 0.02


def test_evolved_sampler_tv_against_dense_law():
    rng = np.random.default_rng(83)
    n, t, eps = 16, 1.0, 0.05
    vec = _unit(rng, n)
    a = _antihermitian_shift(n)
    sampler = EvolvedSampler(a, t, sq_access_from_dense(vec, seed=830),
                             eps=eps, alpha_min=1.0, delta=1e-6, seed=84)
    results = sampler.draw_many(20_000)
    sites = np.array([r.site for r in results if r.accepted])
    assert sites.size == 20_000
    dense = dense_from_oracle(a)
    evolved = dense_evolve(dense, t, vec)
    truth = np.abs(evolved) ** 2 / np.linalg.norm(evolved) ** 2
    emp = np.bincount(sites, minlength=n) / sites.size
    tv = 0.5 * np.abs(emp - truth).sum()
    assert tv <= tv_error_bound(eps, 1.0) + 3.0 * np.sqrt(n / 20_000)
    assert sampler.tv_bound == pytest.approx(2.0 * eps)


def test_per_sample_cost_independent_of_lattice_size():
    outcomes = {}
    for log_n in (10, 16):
        n = 2 ** log_n
        a = _antihermitian_shift(n, boundary="periodic")
        psi = sparse_vector_oracle(n, {n // 2: 1.0}, seed=850)
        sampler = EvolvedSampler(a, 1.5, psi, eps=0.02, alpha_min=1.0,
                                 delta=1e-6, seed=86)
        results = [sampler.draw(k) for k in range(20)]
        assert all(r.accepted for r in results)
        offsets = tuple(r.site - n // 2 for r in results)
        trials = tuple(r.trials for r in results)
        outcomes[log_n] = (offsets, trials, a.cost.snapshot()["queries"])
    assert outcomes[10] == outcomes[16]


def test_sampler_preconditions():
    rng = np.random.default_rng(87)
    n = 8
    vec = _unit(rng, n)
    a = _antihermitian_shift(n)
    with pytest.raises(PreconditionError):
        EvolvedSampler(a, 1.0, sq_access_from_dense(2.0 * vec, seed=1),
                       eps=0.05, alpha_min=1.0, delta=1e-6, seed=88)
    with pytest.raises(PreconditionError):
        EvolvedSampler(a, 1.0, sq_access_from_dense(vec, seed=1),
                       eps=0.8, alpha_min=1.0, delta=1e-6, seed=88)
    hermitian = local_matrix_from_rows(chain(n), 1, lambda i: [(i, 0.5)],
                                       norm_bound=0.5, hermitian=True)
    with pytest.raises(PreconditionError):
        EvolvedSampler(hermitian, 1.0, sq_access_from_dense(vec, seed=1),
                       eps=0.05, alpha_min=1.0, delta=1e-6, seed=88)


def test_sampler_rejects_excessive_sampler_noise():
    rng = np.random.default_rng(89)
    n = 8
    vec = _unit(rng, n)
    a = _antihermitian_shift(n)
    noisy = perturbed_sq_access(vec, zeta=0.3, seed=2)
    with pytest.raises(PreconditionError):
        EvolvedSampler(a, 1.0, noisy, eps=0.05, alpha_min=1.0, delta=1e-6,
                       seed=90)


def test_sample_evolved_one_shot_matches_sampler():
    rng = np.random.default_rng(91)
    n = 12
    vec = _unit(rng, n)
    a = _antihermitian_shift(n)
    one = sample_evolved(a, 0.8, sq_access_from_dense(vec, seed=910),
                         eps=0.05, alpha_min=1.0, delta=1e-6, seed=92)
    sampler = EvolvedSampler(a, 0.8, sq_access_from_dense(vec, seed=910),
                             eps=0.05, alpha_min=1.0, delta=1e-6, seed=92)
    again = sampler.draw(0)
    assert (one.site, one.accepted, one.trials) == (again.site, again.accepted,
                                                    again.trials)
