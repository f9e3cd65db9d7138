"""Thermal two-level ensembles, including population-inverted (T < 0) ones.

Units: k_B = hbar = 1; temperatures and the gap ``epsilon`` share one energy
unit. ``temperature=math.inf`` (or ``-math.inf``) is the infinite-temperature
state with equal populations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import CapacityError, ParameterError

INFINITE_TEMPERATURE = math.inf

# 2^14 x 2^14 complex128 is already 4 GiB.
MAX_DENSE_QUBITS = 14
MAX_DENSE_BYTES = 1 << 30


def populations(temperature: float, epsilon: float = 1.0) -> tuple[float, float]:
    """``(p_e, p_g)`` from the Fermi-Dirac occupation ``1/(e^{eps/T}+1)``.

    The smaller population is evaluated directly and the larger one as its
    complement, so both stay accurate as T -> 0 from either side and they sum
    to exactly 1.
    """
    if temperature == 0:
        raise ParameterError("temperature must be nonzero; pass ±δ for the T→0 limit")
    if math.isinf(temperature):
        return 0.5, 0.5
    small = float(expit(-abs(epsilon / temperature)))
    if temperature > 0:
        return small, 1.0 - small
    return 1.0 - small, small


@dataclass(frozen=True)
class BoltzmannFactor:
    """``x = exp(-epsilon/T)``; ``x > 1`` encodes negative temperature."""

    x: float
    infinite_temperature: bool = False

    @classmethod
    def from_temperature(cls, temperature: float, epsilon: float = 1.0) -> "BoltzmannFactor":
        if temperature == 0:
            raise ParameterError("temperature must be nonzero")
        if math.isinf(temperature):
            return cls(1.0, infinite_temperature=True)
        with np.errstate(over="ignore"):
            x = float(np.exp(-epsilon / temperature))
        return cls(x)

    @property
    def excited_population(self) -> float:
        if math.isinf(self.x):
            return 1.0
        return self.x / (1.0 + self.x)


@dataclass(frozen=True)
class ThermalEnsemble:
    """M identical, independent two-level atoms with gap ``epsilon`` at ``temperature``."""

    M: int
    temperature: float
    epsilon: float = 1.0

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise ParameterError(f"M must be a positive integer, got {self.M!r}")
        if not self.epsilon > 0:
            raise ParameterError(f"epsilon must be positive, got {self.epsilon!r}")
        if self.temperature == 0 or math.isnan(self.temperature):
            raise ParameterError("temperature must be nonzero and not NaN")

    @property
    def p_e(self) -> float:
        return populations(self.temperature, self.epsilon)[0]

    @property
    def p_g(self) -> float:
        return populations(self.temperature, self.epsilon)[1]

    @property
    def boltzmann(self) -> BoltzmannFactor:
        return BoltzmannFactor.from_temperature(self.temperature, self.epsilon)

    def at(self, temperature: float) -> "ThermalEnsemble":
        return ThermalEnsemble(self.M, temperature, self.epsilon)


def excited_population(ens: ThermalEnsemble) -> float:
    return ens.p_e


def excited_population_derivative(temperature: float, epsilon: float = 1.0) -> float:
    """d p_e / dT = (epsilon/T^2) p_e p_g."""
    if math.isinf(temperature):
        return 0.0
    pe, pg = populations(temperature, epsilon)
    return epsilon / (temperature * temperature) * pe * pg


def rotation_angle(ens: ThermalEnsemble) -> float:
    """Angle with cos = sqrt(p_g), sin = sqrt(p_e), in [0, pi/2]."""
    return math.atan2(math.sqrt(ens.p_e), math.sqrt(ens.p_g))


def _check_dense(n_qubits: int, max_qubits: int, max_bytes: int) -> None:
    nbytes = 16 * 4**n_qubits
    if n_qubits > max_qubits or nbytes > max_bytes:
        raise CapacityError(
            f"dense {2**n_qubits}x{2**n_qubits} operator ({nbytes} bytes) exceeds the cap "
            f"of {max_qubits} qubits / {max_bytes} bytes",
            requested=n_qubits,
            limit=min(max_qubits, int(math.log(max_bytes / 16, 4))),
        )


def gibbs_diagonal(ens: ThermalEnsemble) -> np.ndarray:
    """Diagonal of the product Gibbs state, basis index order (qubit 0 most significant)."""
    single = np.array([ens.p_g, ens.p_e])
    diag = np.ones(1)
    for _ in range(ens.M):
        diag = np.kron(diag, single)
    return diag


def gibbs_density(
    ens: ThermalEnsemble,
    max_qubits: int = MAX_DENSE_QUBITS,
    max_bytes: int = MAX_DENSE_BYTES,
) -> np.ndarray:
    """Dense 2^M x 2^M thermal state, the M-fold product of diag(p_g, p_e)."""
    _check_dense(ens.M, max_qubits, max_bytes)
    return np.diag(gibbs_diagonal(ens).astype(complex))


def gibbs_qfi(ens: ThermalEnsemble) -> float:
    """Equilibrium QFI  M eps^2 / (4 T^4) sech^2(eps / 2T).

    sech^2(eps/2T) is evaluated as 4 p_e p_g, which never overflows and is
    exactly even in T.
    """
    T = ens.temperature
    if math.isinf(T):
        return 0.0
    pe, pg = populations(T, ens.epsilon)
    t2 = T * T
    return ens.M * ens.epsilon**2 / (4.0 * t2 * t2) * (4.0 * pe * pg)
