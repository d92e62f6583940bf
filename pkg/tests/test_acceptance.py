"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from carleson_frames import (
    CarlesonSpectrum,
    ExponentSet,
    analysis_apply,
    bounds_for,
    carleson_delta,
    continuous_report,
    degenerate_check,
    degenerate_null_vector,
    delta_frame_bound,
    discrete_sandwich_check,
    extension_chain,
    frame_bounds_converged,
    gamma_const,
    log_block_density,
    make_geometric_real,
    perturbation_J,
    reconstruct,
    riemann_energy,
    synthesis_matrix,
    verify_chps_chain,
)
from carleson_frames.cli import COMMANDS, run


@pytest.fixture
def report(capsys):
    def _report(label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        return ok

    return _report


def test_criterion_1_sandwich_K400(report):
    t0 = time.perf_counter()
    spec = make_geometric_real(0.5, 0.5, 12)
    rep = discrete_sandwich_check(spec, 12, 400)
    elapsed = time.perf_counter() - t0
    ok = rep.contained and elapsed < 5
    report("1 sandwich n=12 K=400", ok,
           f"A_hat={rep.A_hat:.4e} B_hat={rep.B_hat:.4f} window=[{rep.window[0]:.4e}, "
           f"{rep.window[1]:.4e}] t={elapsed:.2f}s")
    assert ok


def test_criterion_1_companion_converged_truncation(report):
    spec = make_geometric_real(0.5, 0.5, 12)
    lam = ExponentSet.naturals(1 << 16)
    est = frame_bounds_converged(spec, lam, 12, K_start=400, rel_tol=1e-3, max_cols=1 << 16)
    lo, hi = 1 / delta_frame_bound(carleson_delta(spec, 12).delta_n), \
        delta_frame_bound(carleson_delta(spec, 12).delta_n)
    ok = est.converged and lo <= est.A_hat and est.B_hat <= hi
    report("1' sandwich n=12 at converged K", ok,
           f"K={est.K_cols} A_hat={est.A_hat:.4e} B_hat={est.B_hat:.4f} window=[{lo:.4e}, {hi:.4e}]")
    assert ok


def test_criterion_2_subsampled_frames(report):
    t0 = time.perf_counter()
    spec = make_geometric_real(0.5, 0.5, 20)
    worst, all_ok = 0.0, True
    for N in (2, 3):
        for seed in range(10):
            lam = ExponentSet.jittered(N, 1 << 18, seed=seed)
            est = frame_bounds_converged(spec, lam, 8, rel_tol=0.05, max_cols=1 << 18)
            (_, a0), (_, a1) = est.history[-2:]
            drift = abs(a1 - a0) / a1
            worst = max(worst, drift)
            all_ok &= est.converged and est.A_hat > 0 and drift < 0.05
    elapsed = time.perf_counter() - t0
    ok = all_ok and elapsed < 30
    report("2 subsampled frames N in {2,3}, 10 seeds", ok,
           f"worst drift={worst:.3e} t={elapsed:.2f}s")
    assert ok


def test_criterion_3_degenerate(report):
    spec = CarlesonSpectrum.from_points([0.5, 0.5 * np.exp(1j * np.pi)])
    lam = ExponentSet.naturals(400, N=2)
    pairs = degenerate_check(spec, 2)
    f = degenerate_null_vector(spec, pairs[0])
    energy = float(np.sum(np.abs(analysis_apply(spec, lam, f, 400)) ** 2))
    ratio = energy / float(np.sum(np.abs(f) ** 2))
    A = bounds_for(spec, lam).A_hat
    ok = pairs == [(0, 1)] and ratio < 1e-20 and A < 1e-12
    report("3 degenerate antipodal N=2", ok, f"energy/|f|^2={ratio:.3e} A_hat={A:.3e}")
    assert ok


def test_criterion_4_perturbation(report):
    spec = make_geometric_real(0.5, 0.5, 48)
    certs = [perturbation_J(spec, N, frame_rows=20) for N in (1, 2, 3)]
    tail_ok = all(2.0 ** (1 - c.J) < c.A_reference for c in certs)
    cert = certs[1]
    violations = 0
    for seed in range(20):
        jit = ExponentSet.jittered(2, 1 << 16, seed=seed).jitters
        violations += not verify_chps_chain(spec, 2, jit, cert.J, 30).holds
    ok = tail_ok and violations == 0
    report("4 perturbation cutoff", ok,
           "; ".join(f"N={c.N} J={c.J} 2^(1-J)={2.0 ** (1 - c.J):.3e} A={c.A_reference:.3e}"
                     for c in certs) + f"; chain violations={violations}/20")
    assert ok


def test_criterion_5_extension(report):
    spec = make_geometric_real(0.5, 0.5, 48)
    J = perturbation_J(spec, 2, frame_rows=20).J
    n = 20
    lam = ExponentSet.jittered(2, 1 << 23, seed=1)
    rep = extension_chain(spec.prefix(n), lam, J, n)
    steps_ok = all(s.success and abs(s.rho) >= s.lower_bound_check > 0
                   and s.c_norm <= s.c_norm_bound for s in rep.steps)
    cross = bounds_for(spec, lam, 0, n, rep.K)
    ok = rep.success and steps_ok and len(rep.steps) == J and cross.A_hat > 0
    report("5 constructive extension", ok,
           f"J={J}->1 K={rep.K} min|rho|={min(abs(s.rho) for s in rep.steps):.6f} "
           f"max c/bound={max(s.c_norm / s.c_norm_bound for s in rep.steps):.2e} "
           f"full A_hat={cross.A_hat:.3e}")
    assert ok


def test_criterion_6_density(report):
    Ls = {}
    for N in (1, 2, 3, 5):
        lam = ExponentSet.jittered(N, int(16e4 / N) + 2, seed=N)
        Ls[N] = log_block_density(lam).L_estimate
    dens_ok = all(abs(L - 1 / N) <= 0.1 / N for N, L in Ls.items())
    dy = log_block_density(ExponentSet.dyadic(20)).L_estimate
    rng = np.random.default_rng(6)
    gmax = 0.0
    for _ in range(50):
        vals = np.unique(rng.integers(0, 500, size=rng.integers(1, 80)))
        s = CarlesonSpectrum.from_points([rng.uniform(0.01, 0.999)])
        gmax = max(gmax, gamma_const(s, ExponentSet.explicit(vals), 1))
    ok = dens_ok and dy < 0.05 and gmax <= 1 + 1e-10
    report("6 density", ok, " ".join(f"L(N={N})={L:.4f}" for N, L in Ls.items())
           + f" dyadic={dy:.2e} max gamma={gmax:.6f}")
    assert ok


def test_criterion_7_continuous(report):
    oracle = 0.75 / (2 * math.log(2))
    e = riemann_energy(CarlesonSpectrum.from_points([0.5]), [1.0])
    spec = make_geometric_real(0.5, 0.5, 20)
    rng = np.random.default_rng(7)
    vectors = []
    for _ in range(50):
        f = np.zeros(10, dtype=complex)
        k = rng.integers(1, 11)
        f[:k] = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        vectors.append(f)
    rep = continuous_report(spec, vectors, 10)
    ok = abs(e.value - oracle) < 1e-6 and rep.all_within
    report("7 continuous frame", ok,
           f"energy={e.value:.9f} oracle={oracle:.9f} |diff|={abs(e.value - oracle):.2e}; "
           f"sandwich {sum(v['within'] for v in rep.per_vector_energies)}/50")
    assert ok


def test_criterion_8_reconstruction(report):
    spec = make_geometric_real(0.5, 0.5, 20)
    lam = ExponentSet.jittered(2, 1 << 16, seed=8)
    est = frame_bounds_converged(spec, lam, 8, rel_tol=1e-3, max_cols=1 << 16)
    m = synthesis_matrix(spec, lam, 0, 8, est.K_cols)
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(20):
        f = np.zeros(8, dtype=complex)
        k = rng.integers(1, 9)
        f[:k] = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        f_hat = reconstruct(analysis_apply(spec, lam, f, est.K_cols), m)
        worst = max(worst, np.linalg.norm(f_hat - f) / np.linalg.norm(f))
    ok = est.converged and worst < 1e-8
    report("8 reconstruction", ok, f"K={est.K_cols} worst relative error={worst:.3e}")
    assert ok


CLI_CONFIGS = {
    "gen-spectrum": ["--count", "16"],
    "check-carleson": ["--spectrum", "geometric:count=12"],
    "frame-bounds": ["--spectrum", "geometric:count=12", "--cols", "400"],
    "subsample-check": ["--N", "3", "--seed", "7"],
    "perturbation": ["--N", "2", "--trials", "4", "--seed", "3"],
    "extension": ["--rows", "14", "--J", "8", "--cols", str(1 << 19), "--seed", "1"],
    "degenerate": ["--spectrum", "points:0.5,-0.5", "--N", "2"],
    "density": ["--lambda", "arith:N=3,jitter=random", "--seed", "2"],
    "continuous": ["--trials", "10", "--seed", "5"],
    "reconstruct": ["--trials", "5", "--seed", "4"],
}


def test_criterion_9_cli_determinism(report, tmp_path):
    assert set(CLI_CONFIGS) == set(COMMANDS)
    mismatched = []
    for cmd, args in CLI_CONFIGS.items():
        outs = []
        for i in range(2):
            p = tmp_path / f"{cmd}-{i}.json"
            run([cmd, *args, "--out", str(p)])
            outs.append(p.read_bytes())
        if outs[0] != outs[1]:
            mismatched.append(cmd)
    ok = not mismatched
    report("9 CLI determinism", ok,
           f"{len(CLI_CONFIGS) - len(mismatched)}/{len(CLI_CONFIGS)} commands byte-identical")
    assert ok
