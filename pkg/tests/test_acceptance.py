"""Exit criteria for the toolkit, one test per criterion.

Each test records a one-line verdict (printed in the pytest terminal summary,
or directly when this file is run as a script) and then asserts it.
Tolerances are pinned below and are not tuned to the results.
"""
import json
import math
import time
from pathlib import Path

import mpmath
import numpy as np
import pytest

from mzthermo.analytic import (
    MziConfig,
    golden_section_max,
    p0_binomial,
    qfi_at,
    qfi_closed,
    qfi_max_over_neff,
)
from mzthermo.circuit import bright_probability, build_thermometry_circuit, classify_ports, sample_shots
from mzthermo.cli import main as cli_main
from mzthermo.estimation import ExperimentConfig, fit_linear, fit_quadratic, run_experiment
from mzthermo.oracle import mean_field_phase, mode_a_qfi, phase_average, spectral_qfi
from mzthermo.thermal import ThermalEnsemble, gibbs_density, gibbs_qfi
from mzthermo.validation import triangle_suite

pytestmark = pytest.mark.acceptance

# -- pinned tolerances ---------------------------------------------------------
GRID_POINTS, GRID_SEED, M_MAX, N_MAX = 500, 2024, 6, 3
P0_TOL = 1e-10
RUNTIME_TRIANGLE_S = 120.0
QFI_RTOL, QFI_FLOOR = 1e-6, 1e-8
LIMIT_NEAR_TOL, LIMIT_OFFSET = 1e-8, 1e-6
GIBBS_MACHINE_RTOL, GIBBS_ORACLE_RTOL = 1e-14, 1e-6
FIG2_NEFF, FIG2_TEMPS, FIG2_MMAX, FIG2_TAIL = 0.5, (0.2, 0.3, 0.5), 500, 0.01
SQL_R2, SQL_C2_RATIO, SQL_MS = 0.999, 0.02, range(1, 10)
NINV_TOL, NINV_SHOTS, NINV_Z = 1e-10, 100_000, 3.29  # two-sided 0.1% level
EXP_SHOTS, EXP_REPS, EXP_MIN_PASS, EXP_SEED, EXP_DELTA_REL = 5000, 30, 19, 12345, 0.1
EXP_GRID = (-3.0, -2.2, -1.5, -1.0, -0.65, -0.45, -0.3, -0.25, -0.2, -0.15,
            0.1, 0.15, 0.2, 0.25, 0.3, 0.45, 0.65, 1.0, 1.5, 2.2, 3.0)
EXP_NEAR_ZERO, EXP_MID = 0.2, (0.65, 1.5)
RUNTIME_EXPERIMENT_S = 300.0
DEPOL_P, DEPOL_BAND = 0.95, (0.5, 1.0)
SLOPE_TOL = 0.01
PHASE_MARGIN = 1e-6


def _report(record, number, title, passed, detail):
    record(number, title, passed, detail)
    assert passed, detail


# 1 ----------------------------------------------------------------------------
def test_01_triangle_equivalence(acceptance_report):
    t0 = time.process_time()
    rep = triangle_suite(GRID_POINTS, M_MAX, N_MAX, GRID_SEED, qfi=False, circuit=True)
    elapsed = time.process_time() - t0
    c = rep["checks"]
    devs = {k: c[k]["max_deviation"] for k in ("p0_closed", "p0_oracle", "p0_circuit")}
    ok = all(v < P0_TOL for v in devs.values()) and elapsed <= RUNTIME_TRIANGLE_S
    detail = ", ".join(f"max|dp0| {k[3:]} {v:.1e}" for k, v in devs.items()) + f"; {elapsed:.1f}s CPU"
    _report(acceptance_report, 1, "triangle equivalence", ok, detail)


# 2 ----------------------------------------------------------------------------
def test_02_qfi_formula_vs_spectral(acceptance_report):
    rep = triangle_suite(GRID_POINTS, M_MAX, N_MAX, GRID_SEED, qfi=True, circuit=False)
    c = rep["checks"]["qfi_oracle"]
    ok = c["max_deviation"] < QFI_RTOL
    _report(acceptance_report, 2, "closed-form QFI vs spectral oracle", ok,
            f"max rel dev {c['max_deviation']:.2e} (tol {QFI_RTOL:g}), {len(c['offending'])} offending")


# 3 ----------------------------------------------------------------------------
def test_03_limit_case(acceptance_report):
    temps = (0.05, 0.1, 0.3, 1.0, 3.0, 10.0, -0.05, -0.3, -3.0)
    exact_zero, worst_near = True, 0.0
    for k in (1, 2, 3):
        for M in range(1, 7):
            for T in temps:
                exact_zero &= qfi_closed(MziConfig(M=M).with_neff(k * math.pi), T).value == 0.0
                for s in (LIMIT_OFFSET, -LIMIT_OFFSET):
                    worst_near = max(worst_near, qfi_at(M, T, k * math.pi + s))
    ok = exact_zero and worst_near < LIMIT_NEAR_TOL
    _report(acceptance_report, 3, "n_eff = k pi limit", ok,
            f"exact zeros: {exact_zero}; max Q at k pi +- 1e-6 = {worst_near:.2e} (tol {LIMIT_NEAR_TOL:g})")


# 4 ----------------------------------------------------------------------------
def test_04_gibbs_baseline(acceptance_report):
    mpmath.mp.dps = 40
    temps = [s * v for v in np.geomspace(0.03, 30, 40) for s in (1, -1)]
    worst_sym = worst_oracle = 0.0
    symmetric = True
    for T in temps:
        for M in (1, 3):
            ens = ThermalEnsemble(M, T)
            t = mpmath.mpf(T)
            ref = M / (4 * t**4) * mpmath.sech(1 / (2 * t)) ** 2
            worst_sym = max(worst_sym, float(abs(gibbs_qfi(ens) - ref) / ref))
            symmetric &= gibbs_qfi(ens) == gibbs_qfi(ThermalEnsemble(M, -T))
        if abs(T) >= 0.1:
            q = spectral_qfi(lambda s: gibbs_density(ThermalEnsemble(2, s)), T)
            ref2 = gibbs_qfi(ThermalEnsemble(2, T))
            worst_oracle = max(worst_oracle, abs(q - ref2) / ref2)
    ok = worst_sym < GIBBS_MACHINE_RTOL and worst_oracle < GIBBS_ORACLE_RTOL and symmetric
    _report(acceptance_report, 4, "Gibbs baseline", ok,
            f"vs 40-digit formula {worst_sym:.1e}, vs spectral oracle {worst_oracle:.1e}, exact T->-T: {symmetric}")


# 5 ----------------------------------------------------------------------------
def test_05_fig2_shape(acceptance_report):
    t0 = time.process_time()
    Ms = np.arange(1, FIG2_MMAX + 1)
    parts, ok = [], True
    for T in FIG2_TEMPS:
        q = np.array([qfi_at(int(m), T, FIG2_NEFF) for m in Ms])
        interior = (q[1:-1] > q[:-2]) & (q[1:-1] >= q[2:])
        n_max = int(interior.sum())
        k = int(np.argmax(q))
        rises = bool(np.all(np.diff(q[: k + 1]) > 0))
        tail = q[-1] / q[k]
        this = n_max == 1 and 0 < k < len(q) - 1 and tail < FIG2_TAIL
        ok &= this
        parts.append(f"T={T}: argmax M={Ms[k]}, rises={rises}, local maxima={n_max}, Q(500)/max={tail:.1e}")
    elapsed = time.process_time() - t0
    ok &= elapsed < 10.0
    _report(acceptance_report, 5, "Q(M) rise then decay", ok, "; ".join(parts) + f"; {elapsed:.1f}s")


# 6 ----------------------------------------------------------------------------
def test_06_sql_scaling(acceptance_report):
    parts, ok = [], True
    for T in (2.0, -2.0):
        qs = [qfi_max_over_neff(MziConfig(M=m), T)[1] for m in SQL_MS]
        c1, r2 = fit_linear(list(SQL_MS), qs)
        q1, q2 = fit_quadratic(list(SQL_MS), qs)
        ratio = abs(q2) / q1
        ok &= r2 > SQL_R2 and ratio < SQL_C2_RATIO
        parts.append(f"T={T:+g}: R^2={r2:.4f}, |c2|/c1={ratio:.3f}")
    _report(acceptance_report, 6, "linear max-QFI scaling in M", ok,
            "; ".join(parts) + f" (need R^2>{SQL_R2}, |c2|/c1<{SQL_C2_RATIO})")


# 7 ----------------------------------------------------------------------------
def test_07_n_invariance(acceptance_report):
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(100):
        M, N = int(rng.integers(1, 7)), int(rng.integers(1, 3))
        T = rng.uniform(0.05, 10) * rng.choice([-1, 1])
        chi, t = rng.uniform(0.1, 2), rng.uniform(0.1, 3)
        a, b = MziConfig(N=N, chi=chi, t=t, M=M), MziConfig(N=3 * N, chi=chi, t=t / 3, M=M)
        worst = max(worst, abs(p0_binomial(a, T) - p0_binomial(b, T)))
        qa, qb = qfi_closed(a, T).value, qfi_closed(b, T).value
        worst = max(worst, abs(qa - qb) / max(qa, 1.0))
    zs, born = [], 0.0
    for i, (T, t) in enumerate(((0.4, 1.3), (-0.7, 2.1), (1.5, 0.8))):
        recs = []
        for j, (N, tt) in enumerate(((1, t), (3, t / 3))):
            circ = build_thermometry_circuit(MziConfig(N=N, t=tt, M=2), ThermalEnsemble(2, T))
            recs.append((bright_probability(circ), classify_ports(sample_shots(circ, NINV_SHOTS, 7000 + 10 * i + j),
                                                                  circ.label.group("a"))))
        born = max(born, abs(recs[0][0] - recs[1][0]))
        p1, p2 = recs[0][1][0] / NINV_SHOTS, recs[1][1][0] / NINV_SHOTS
        pool = 0.5 * (p1 + p2)
        zs.append(abs(p1 - p2) / math.sqrt(pool * (1 - pool) * 2 / NINV_SHOTS))
    ok = worst < NINV_TOL and born < NINV_TOL and max(zs) < NINV_Z
    _report(acceptance_report, 7, "N-invariance", ok,
            f"analytic max dev {worst:.1e}, circuit Born dev {born:.1e}, max |z| {max(zs):.2f} (< {NINV_Z})")


# 8 ----------------------------------------------------------------------------
def test_08_shot_noise_experiment(acceptance_report):
    t0 = time.process_time()
    base = MziConfig(N=1, M=1)
    seeds = np.random.SeedSequence(EXP_SEED).generate_state(len(EXP_GRID), dtype=np.uint64)
    hits, stds, misses = 0, {}, []
    for T, seed in zip(EXP_GRID, seeds):
        nu, q = qfi_max_over_neff(base, T)
        est = run_experiment(ExperimentConfig(base.with_neff(nu), T, EXP_SHOTS, EXP_REPS,
                                              EXP_DELTA_REL * abs(T), int(seed)))
        inside = math.isfinite(est.mean) and abs(est.mean - q) <= 3 * est.std / math.sqrt(EXP_REPS)
        hits += inside
        if not inside:
            misses.append(T)
        stds[T] = est.std
    near = [s for T, s in stds.items() if abs(T) <= EXP_NEAR_ZERO and math.isfinite(s)]
    mid = [s for T, s in stds.items() if EXP_MID[0] <= abs(T) <= EXP_MID[1]]
    inflated = min(near) > max(mid)
    elapsed = time.process_time() - t0
    ok = hits >= EXP_MIN_PASS and inflated and elapsed <= RUNTIME_EXPERIMENT_S
    _report(acceptance_report, 8, "shot-noise CFI experiment", ok,
            f"{hits}/21 within 3 std/sqrt(30) (misses at T={misses}); min std |T|<=0.2 {min(near):.3f} "
            f"> max mid-range std {max(mid):.3f}: {inflated}; {elapsed:.1f}s CPU")


# 9 ----------------------------------------------------------------------------
def test_09_depolarizing(acceptance_report):
    base = MziConfig(M=1)
    grid = [s * v for v in np.linspace(0.05, 3.0, 40) for s in (1, -1)]
    below = True
    for T in grid:
        nu, _ = qfi_max_over_neff(base, T)
        cfg = base.with_neff(nu)
        below &= mode_a_qfi(cfg, T, p_gamma=DEPOL_P) < mode_a_qfi(cfg, T)
    curve = lambda T: qfi_max_over_neff(base, T)[1]  # noqa: E731
    T_peak, q_peak = golden_section_max(curve, 0.1, 0.6, 1e-9)
    cfg = base.with_neff(qfi_max_over_neff(base, T_peak)[0])
    ratio = mode_a_qfi(cfg, T_peak, p_gamma=DEPOL_P) / mode_a_qfi(cfg, T_peak)

    def noisy(T):
        return mode_a_qfi(base.with_neff(qfi_max_over_neff(base, T)[0]), T, p_gamma=DEPOL_P)

    T_np, q_np = golden_section_max(noisy, 0.1, 0.8, 1e-7)
    ok = below and DEPOL_BAND[0] <= ratio < DEPOL_BAND[1]
    _report(acceptance_report, 9, "depolarizing suppression", ok,
            f"strictly below on {len(grid)} points: {below}; ratio at noiseless peak T={T_peak:.4f}: {ratio:.3f} "
            f"(band [0.5, 1)); diagnostic peak-to-peak ratio {q_np / q_peak:.3f} at T={T_np:.4f}")


# 10 ---------------------------------------------------------------------------
def test_10_heisenberg_contrast(acceptance_report, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code = cli_main(["naive-compare", "--N", "1:8", "--M", "1", "--T", "0.3", "--out", "nc"])
    slopes = json.loads(Path("nc.json").read_text())["loglog_slopes"]
    ok = code == 0 and abs(slopes["naive"] - 2.0) <= SLOPE_TOL and abs(slopes["exact"]) < SLOPE_TOL
    _report(acceptance_report, 10, "naive vs exact N-scaling", ok,
            f"naive slope {slopes['naive']:.4f}, exact slope {slopes['exact']:.2e}")


# 11 ---------------------------------------------------------------------------
def test_11_phase_average(acceptance_report):
    worst_avg, worst_mf = 0.0, 0.0
    for M, T in ((1, 0.5), (4, 0.8), (3, -1.2), (6, 5.0)):
        ens = ThermalEnsemble(M, T)
        cfg = MziConfig(N=2, chi=1.0, t=0.6, M=M)
        phi = cfg.N * cfg.chi * cfg.t * cfg.epsilon
        worst_avg = max(worst_avg, abs(phase_average(ens, phi)))
        worst_mf = max(worst_mf, abs(abs(mean_field_phase(ens, phi)) - 1.0))
    ok = worst_avg < 1 - PHASE_MARGIN and worst_mf < 1e-15
    _report(acceptance_report, 11, "phase-average inequality", ok,
            f"max |<e^(i phi M)>| = {worst_avg:.4f}, max ||e^(i phi <M>)| - 1| = {worst_mf:.1e}")


# 12 ---------------------------------------------------------------------------
DETERMINISM_RUNS = {
    "qfi-curve": ["--sweep", "M", "--M", "1:60", "--T", "0.2,0.3"],
    "qfi-surface": ["--T", "0.1:1:6", "--neff", "0:6.28:20"],
    "optimize-neff": ["--T", "0.2,-0.5"],
    "scaling": ["--T", "0.5", "--N", "1", "--M", "1:2", "--shots", "500", "--reps", "3"],
    "experiment": ["--T", "0.3,-0.6", "--shots", "400", "--reps", "5", "--optimize-neff", "--seed", "3"],
    "oracle-check": ["--points", "20"],
    "naive-compare": ["--N", "1:3"],
}


def test_12_determinism(acceptance_report, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("SOURCE_DATE_EPOCH", raising=False)
    differing = []
    for cmd, extra in DETERMINISM_RUNS.items():
        outputs = []
        for _ in range(2):
            assert cli_main([cmd, *extra, "--seed", "5", "--out", f"d-{cmd}"]) == 0
            outputs.append({p.name: p.read_bytes() for p in sorted(tmp_path.glob(f"d-{cmd}*"))
                            if p.suffix in (".csv", ".json")})
        if outputs[0] != outputs[1]:
            differing.append(cmd)
    ok = not differing
    _report(acceptance_report, 12, "determinism", ok,
            f"{len(DETERMINISM_RUNS)} commands rerun; byte differences in: {differing or 'none'}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
