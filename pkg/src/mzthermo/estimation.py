"""Fisher information from simulated shot counts, and the repetition protocol."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .analytic import MziConfig, dp0_dT, qfi_max_over_neff
from .circuit import (
    MAX_CIRCUIT_QUBITS,
    ShotRecord,
    bright_probability,
    build_thermometry_circuit,
    classify_ports,
    measured_distribution,
    run_statevector,
    sample_distribution,
)
from .errors import ParameterError
from .thermal import ThermalEnsemble

MODES = ("finite-difference", "analytic-slope", "exact")


@dataclass(frozen=True)
class ExperimentConfig:
    cfg: MziConfig
    temperature: float
    shots: int = 5000
    repetitions: int = 30
    delta_T: float = 0.01
    seed: int = 0
    mode: str = "finite-difference"
    smoothing: bool = False
    sign: str = "minus"

    def __post_init__(self):
        if int(self.shots) != self.shots or self.shots < 1:
            raise ParameterError("shots must be a positive integer")
        if int(self.repetitions) != self.repetitions or self.repetitions < 1:
            raise ParameterError("repetitions must be a positive integer")
        if not self.delta_T > 0:
            raise ParameterError("delta_T must be positive")
        if not abs(self.temperature) > self.delta_T:
            raise ParameterError("|temperature| must exceed delta_T")
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}")


@dataclass(frozen=True)
class CfiEstimate:
    mean: float
    std: float
    per_repetition: tuple[float, ...]
    temperature: float
    seeds: tuple[int, ...] = ()
    undefined: int = 0

    @property
    def stderr(self) -> float:
        n = len(self.per_repetition) - self.undefined
        return self.std / math.sqrt(n) if n > 0 else math.nan


def _ports(counts) -> tuple[int, int]:
    if isinstance(counts, ShotRecord):
        arm_a = tuple(t for t in counts.measured if t.startswith("a"))
        return classify_ports(counts, arm_a)
    n0, nN = counts
    return int(n0), int(nN)


def _bright_fraction(n0: int, nN: int, smoothing: bool) -> float:
    total = n0 + nN
    if total <= 0:
        raise ParameterError("zero shots")
    if smoothing:
        return (n0 + 0.5) / (total + 1.0)
    return n0 / total


def cfi_from_probabilities(p_minus: float, p_plus: float, delta_T: float) -> float:
    """(dp/2dT)^2 / (pbar (1 - pbar)); NaN when pbar is exactly 0 or 1."""
    pbar = 0.5 * (p_minus + p_plus)
    var = pbar * (1.0 - pbar)
    if var <= 0.0:
        return math.nan
    slope = (p_plus - p_minus) / (2.0 * delta_T)
    return slope * slope / var


def cfi_from_counts(counts_minus, counts_plus, delta_T: float, smoothing: bool = False) -> float:
    """Two-outcome CFI from bright/dark counts at T - delta_T and T + delta_T.

    ``counts_*`` are ``(n0, nN)`` pairs or :class:`ShotRecord` objects.
    """
    pm = _bright_fraction(*_ports(counts_minus), smoothing)
    pp = _bright_fraction(*_ports(counts_plus), smoothing)
    return cfi_from_probabilities(pm, pp, delta_T)


def cfi_analytic_slope(cfg: MziConfig, T: float, counts_minus, counts_plus, smoothing: bool = False) -> float:
    """Closed-form slope with the pooled empirical bright fraction."""
    a, b = _ports(counts_minus), _ports(counts_plus)
    p = _bright_fraction(a[0] + b[0], a[1] + b[1], smoothing)
    var = p * (1.0 - p)
    if var <= 0.0:
        return math.nan
    return dp0_dT(cfg, T) ** 2 / var


def repetition_seeds(seed: int, repetitions: int) -> np.ndarray:
    """Two independent stream seeds per repetition, independent of run order."""
    return np.random.SeedSequence(seed).generate_state(2 * repetitions, dtype=np.uint64)


def _distribution(cfg: MziConfig, T: float, sign: str):
    circ = build_thermometry_circuit(cfg, ThermalEnsemble(cfg.M, T, cfg.epsilon), sign=sign)
    psi = run_statevector(circ)
    return circ, measured_distribution(circ, psi), bright_probability(circ, psi)


def run_experiment(ec: ExperimentConfig) -> CfiEstimate:
    """Repeat the two-temperature shot experiment and aggregate the CFI."""
    cfg, T, d = ec.cfg, ec.temperature, ec.delta_T
    circ_m, dist_m, p_m = _distribution(cfg, T - d, ec.sign)
    circ_p, dist_p, p_p = _distribution(cfg, T + d, ec.sign)
    seeds = repetition_seeds(ec.seed, ec.repetitions)
    values = []
    for r in range(ec.repetitions):
        if ec.mode == "exact":
            values.append(cfi_from_probabilities(p_m, p_p, d))
            continue
        rec_m = sample_distribution(dist_m, ec.shots, int(seeds[2 * r]), circ_m.measured)
        rec_p = sample_distribution(dist_p, ec.shots, int(seeds[2 * r + 1]), circ_p.measured)
        if ec.mode == "finite-difference":
            values.append(cfi_from_counts(rec_m, rec_p, d, ec.smoothing))
        else:
            values.append(cfi_analytic_slope(cfg, T, rec_m, rec_p, ec.smoothing))
    arr = np.array(values, dtype=float)
    undefined = int(np.isnan(arr).sum())
    defined = arr[~np.isnan(arr)]
    mean = float(defined.mean()) if defined.size else math.nan
    std = float(defined.std(ddof=1)) if defined.size > 1 else (0.0 if defined.size else math.nan)
    return CfiEstimate(mean, std, tuple(float(v) for v in arr), T, tuple(int(s) for s in seeds), undefined)


@dataclass(frozen=True)
class ScalingRow:
    N: int
    M: int
    n_eff_star: float
    qfi_star: float
    cfi_mean: float = math.nan
    cfi_std: float = math.nan


def scaling_study(
    T: float,
    N_list: Sequence[int],
    M_range: Sequence[int],
    epsilon: float = 1.0,
    shots: Optional[int] = None,
    repetitions: int = 30,
    delta_T: float = 0.01,
    seed: int = 0,
    max_qubits: int = MAX_CIRCUIT_QUBITS,
) -> list[ScalingRow]:
    """Optimal-n_eff QFI per (N, M), optionally with a shot-based estimate at the optimum.

    The circuit estimate is skipped (NaN) when ``shots`` is None or the
    circuit would exceed ``max_qubits``.
    """
    rows = []
    for N in N_list:
        for M in M_range:
            base = MziConfig(N=int(N), M=int(M), epsilon=epsilon)
            n_star, q_star = qfi_max_over_neff(base, T)
            row = ScalingRow(int(N), int(M), n_star, q_star)
            if shots is not None and 2 * (N + M) <= max_qubits:
                est = run_experiment(
                    ExperimentConfig(base.with_neff(n_star), T, shots, repetitions, delta_T, seed)
                )
                row = replace(row, cfi_mean=est.mean, cfi_std=est.std)
            rows.append(row)
    return rows


def fit_linear(Ms: Sequence[float], q: Sequence[float]) -> tuple[float, float]:
    """Least squares q ~ c1 M through the origin; returns (c1, centered R^2)."""
    Ms, q = np.asarray(Ms, float), np.asarray(q, float)
    c1 = float(Ms @ q / (Ms @ Ms))
    ss_res = float(np.sum((q - c1 * Ms) ** 2))
    ss_tot = float(np.sum((q - q.mean()) ** 2))
    return c1, 1.0 - ss_res / ss_tot if ss_tot > 0 else math.nan


def fit_quadratic(Ms: Sequence[float], q: Sequence[float]) -> tuple[float, float]:
    """Least squares q ~ c1 M + c2 M^2; returns (c1, c2)."""
    Ms, q = np.asarray(Ms, float), np.asarray(q, float)
    (c1, c2), *_ = np.linalg.lstsq(np.column_stack([Ms, Ms**2]), q, rcond=None)
    return float(c1), float(c2)


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])
