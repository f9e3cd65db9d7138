"""Cross-validation of closed form, density-matrix oracle and circuit simulator."""
from __future__ import annotations

import math
from dataclasses import replace
from typing import Optional

import numpy as np

from .analytic import MziConfig, demoivre_terms, p0_binomial, p0_from_terms, qfi_closed
from .circuit import bright_probability, build_thermometry_circuit
from .errors import CapacityError
from .oracle import mode_a_state, spectral_qfi
from .thermal import MAX_DENSE_QUBITS, ThermalEnsemble

P0_TOL = 1e-10
QFI_RTOL = 1e-6
QFI_FLOOR = 1e-8
T_BAND = (0.05, 10.0)


def random_grid(points: int, M_max: int, N_max: int, seed: int, epsilon: float = 1.0):
    """(M, N, T, n_eff) tuples; |T| uniform in the band, random sign."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(points):
        M = int(rng.integers(1, M_max + 1))
        N = int(rng.integers(1, N_max + 1))
        T = float(rng.uniform(*T_BAND) * epsilon * rng.choice([-1.0, 1.0]))
        nu = float(rng.uniform(0.0, 2.0 * math.pi))
        out.append((M, N, T, nu))
    return out


def _check(name: str, tol: float, kind: str = "abs") -> dict:
    return {"name": name, "tolerance": tol, "kind": kind, "max_deviation": 0.0, "worst_point": None, "offending": []}


def triangle_suite(
    points: int = 500,
    M_max: int = 6,
    N_max: int = 3,
    seed: int = 2024,
    epsilon: float = 1.0,
    alpha_fault: Optional[float] = None,
    qfi: bool = True,
    circuit: bool = True,
) -> dict:
    """Agreement of p0 (binomial, closed form, oracle, circuit) and of the QFI.

    ``alpha_fault`` adds a perturbation to alpha in the closed form, which
    must make the suite fail.
    """
    if M_max > MAX_DENSE_QUBITS:
        raise CapacityError(
            f"oracle refuses M={M_max} (cap {MAX_DENSE_QUBITS})", requested=M_max, limit=MAX_DENSE_QUBITS
        )
    checks = {
        "p0_closed": _check("binomial vs closed form", P0_TOL),
        "p0_oracle": _check("binomial vs density-matrix oracle", P0_TOL),
    }
    if circuit:
        checks["p0_circuit"] = _check("binomial vs circuit Born probability", P0_TOL)
    if qfi:
        checks["qfi_oracle"] = _check("closed-form QFI vs spectral QFI", QFI_RTOL, "rel")

    def record(key, dev, point):
        c = checks[key]
        if dev > c["max_deviation"] or math.isnan(dev):
            c["max_deviation"] = dev
            c["worst_point"] = point
        if not dev < c["tolerance"]:
            c["offending"].append({**point, "deviation": dev})

    for M, N, T, nu in random_grid(points, M_max, N_max, seed, epsilon):
        cfg = MziConfig(N=N, M=M, epsilon=epsilon).with_neff(nu)
        point = {"M": M, "N": N, "T": T, "n_eff": nu}
        pb = p0_binomial(cfg, T)
        terms = demoivre_terms(cfg, T)
        if alpha_fault:
            terms = replace(terms, alpha=terms.alpha + alpha_fault)
        record("p0_closed", abs(pb - p0_from_terms(terms, M)), point)
        rho = mode_a_state(cfg, T)
        record("p0_oracle", abs(pb - rho[0, 0].real), point)
        if circuit:
            circ = build_thermometry_circuit(cfg, ThermalEnsemble(M, T, epsilon))
            record("p0_circuit", abs(pb - bright_probability(circ)), point)
        if qfi:
            qc = qfi_closed(cfg, T).value
            if qc > QFI_FLOOR:
                qo = spectral_qfi(lambda s: mode_a_state(cfg, s), T, epsilon=epsilon)
                record("qfi_oracle", abs(qo - qc) / qc, point)

    for c in checks.values():
        c["passed"] = not c["offending"]
    return {
        "points": points,
        "seed": seed,
        "M_max": M_max,
        "N_max": N_max,
        "alpha_fault": alpha_fault,
        "passed": all(c["passed"] for c in checks.values()),
        "checks": checks,
    }
