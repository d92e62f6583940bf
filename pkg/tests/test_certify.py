import math

import numpy as np
import pytest

from carleson_frames import (
    CarlesonSpectrum,
    ExponentSet,
    analysis_apply,
    arithmetic_frame_bounds,
    bounds_for,
    completeness_certificate,
    degenerate_check,
    degenerate_null_vector,
    extension_step,
    frame_bounds_converged,
    make_geometric_real,
    make_sector,
    perturbation_J,
    verify_chps_chain,
    zero_set_guard,
)
from carleson_frames.certify import (
    CertificationError,
    explicit_c,
    psi_growth_exponent,
    psi_eval,
    theta_c,
)
from carleson_frames.frame_ops import synthesis_gram


def chain_oracle(r, N, jit, J, n):
    lhs = 0.0
    for j in range(J, n):
        z = r[j]
        s = sum(z ** (N * k) - z ** (N * k + jk) for k, jk in enumerate(jit))
        lhs += (1 - z * z) * s * s
    return lhs


@pytest.mark.parametrize("N", [1, 2, 3])
def test_perturbation_cutoff(geo48, N):
    cert = perturbation_J(geo48, N, frame_rows=20)
    assert cert.satisfied
    assert 2.0 ** (1 - cert.J) < cert.A_reference
    # minimality: one row earlier the tail is not below A
    defects = 1 - geo48.r ** 2
    assert defects[cert.J - 1:].sum() >= cert.A_reference
    assert cert.A_reference == arithmetic_frame_bounds(geo48, N, 0, 20).A_hat
    assert cert.tail_remainder_bound < 1e-13


def test_perturbation_needs_enough_points(geo12):
    with pytest.raises(CertificationError):
        perturbation_J(geo12, 1, frame_rows=12)


def test_perturbation_rejects_complex_spectrum():
    s = make_sector(1 - 0.5 * 0.5 ** np.arange(10), 0.5, "alternating")
    with pytest.raises(ValueError):
        perturbation_J(s, 1)


def test_chain_matches_loop_oracle(geo20, rng):
    jit = 2 * rng.random(300)
    rep = verify_chps_chain(geo20, 2, jit, 5, 12)
    assert rep.lhs == pytest.approx(chain_oracle(geo20.r, 2, jit, 5, 12), rel=1e-11)
    assert rep.tail == pytest.approx(float(np.sum(1 - geo20.r[5:12] ** 2)), rel=1e-14)


def test_chain_max_jitter_below_tail(geo48):
    jit = np.full(1 << 14, np.nextafter(3.0, 0))
    rep = verify_chps_chain(geo48, 3, jit, 18, 30)
    assert rep.holds
    assert rep.termwise["perturbation_sum<=geometric_bound"]
    assert rep.termwise["geometric_bound<=tail"]


@pytest.mark.parametrize("seed", range(5))
def test_chain_random_draws(geo48, seed):
    jit = ExponentSet.jittered(2, 1 << 14, seed=seed).jitters
    rep = verify_chps_chain(geo48, 2, jit, 17, 30)
    assert rep.holds and rep.termwise["lhs<=tail"]
    assert rep.perturbation_sum <= rep.geometric_bound * (1 + 1e-12)


def test_chain_rejects_bad_jitter(geo20):
    with pytest.raises(ValueError):
        verify_chps_chain(geo20, 2, [0.5, 2.0], 3)


@pytest.fixture(scope="module")
def ext_setup():
    spec = make_geometric_real(0.5, 0.5, 14)
    lam = ExponentSet.jittered(2, 1 << 19, seed=1)
    est, gram = frame_bounds_converged(spec, lam, 14, K_start=1024, rel_tol=1e-3,
                                       max_cols=1 << 19, return_gram=True)
    return spec, lam, est, gram


def test_extension_step_bounds(ext_setup):
    spec, lam, est, gram = ext_setup
    rep = extension_step(spec, lam, 8, 14, est.K_cols, gram=gram)
    assert rep.success, rep.message
    assert abs(rep.rho) >= rep.lower_bound_check > 0
    assert rep.c_norm <= rep.c_norm_bound
    ratio = math.sqrt(rep.B_hat) / rep.A_hat
    assert rep.lower_bound_check == pytest.approx(
        1 - rep.epsilon - rep.gamma * rep.epsilon * rep.M * ratio, rel=1e-12)


def test_extension_gram_route_matches_explicit_c(ext_setup):
    spec, lam, est, gram = ext_setup
    J, n, K = 10, 14, est.K_cols
    rep = extension_step(spec, lam, J, n, K, gram=gram)
    c = explicit_c(spec, lam, J, n, K, rep.b_support, rep.b_coefficients)
    assert np.linalg.norm(c) == pytest.approx(rep.c_norm, rel=1e-6, abs=1e-12)


def test_extension_step_without_frame_fails_cleanly():
    s = CarlesonSpectrum(np.array([0.5, 0.6, 0.7]), np.zeros(3), True, True)
    rep = extension_step(s, ExponentSet.naturals(1), 1, 3)
    assert not rep.success


def test_degenerate_pair_detection():
    s = CarlesonSpectrum.from_points([0.5, -0.5])
    assert degenerate_check(s, 2) == [(0, 1)]
    assert degenerate_check(s, 1) == []
    assert degenerate_check(make_geometric_real(0.5, 0.5, 20), 3) == []


def test_degenerate_null_vector_kills_samples():
    s = CarlesonSpectrum.from_points([0.5, -0.5])
    lam = ExponentSet.naturals(500, N=2)
    f = degenerate_null_vector(s, (0, 1))
    samples = analysis_apply(s, lam, f, 500)
    assert np.sum(np.abs(samples) ** 2) < 1e-20 * np.sum(np.abs(f) ** 2)
    assert bounds_for(s, lam).A_hat < 1e-12


def test_zero_set_guard(geo20):
    lam = ExponentSet.jittered(2, 8, seed=0)
    rep = zero_set_guard(geo20, lam, 2, 6, 8)
    assert rep.kernel_residual < 1e-10
    assert rep.safe
    assert bounds_for(geo20, lam, 1, 5, 8).A_hat > 1e-12


def test_zero_set_guard_isolated_flips(geo20):
    lam = ExponentSet.naturals(12)
    rep = zero_set_guard(geo20, lam, 15, 20, 12)
    c = rep.kernel_vector
    grid = np.linspace(0.5, 0.99, 2001)
    vals = np.array([theta_c(lam, c, z).real for z in grid])
    unsafe = np.abs(vals) <= 1e-10
    assert unsafe.sum() <= 2
    # a polynomial in z has isolated real zeros: count sign changes
    assert np.sum(np.diff(np.sign(vals)) != 0) <= 11


def test_theta_c_branch():
    lam = ExponentSet.explicit([0.5])
    assert theta_c(lam, np.array([1.0]), -0.25) == pytest.approx(-0.5j)


def test_psi_growth_bounded_by_sector():
    s = make_sector(1 - 0.5 * 0.5 ** np.arange(8), 0.6, "alternating")
    rng = np.random.default_rng(3)
    b = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    assert psi_growth_exponent(s, b, np.linspace(-50, 50, 401)) <= 0.6 + 1e-12
    assert psi_eval(s, b, 0.0) == pytest.approx(np.sum(b * np.sqrt(1 - s.r ** 2)))


def test_completeness_certificate(geo20):
    lam = ExponentSet.jittered(2, 160002, seed=2)
    cert = completeness_certificate(geo20, lam.prefix(160002), 6, 4096)
    assert cert.density_hypothesis
    assert cert.A_hat > 0
