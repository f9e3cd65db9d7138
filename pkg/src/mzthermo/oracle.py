"""Dense density-matrix reference for the interferometer and a spectral QFI.

Each optical mode only ever holds 0 or N photons, so it is stored as one
effective qubit: bit 0 = vacuum, bit 1 = N photons. The joint register is
``a0, b0, s0..s{M-1}`` with dimension 2^(M+2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .analytic import MziConfig
from .core import HilbertLabel, eig_hermitian, hamming_weights, hermitian_deviation, partial_trace
from .errors import DimensionError, NotDensityMatrixError, ParameterError
from .thermal import MAX_DENSE_BYTES, MAX_DENSE_QUBITS, ThermalEnsemble, _check_dense, gibbs_diagonal

TRACE_ATOL = 1e-12
HERM_ATOL = 1e-12
EIG_FLOOR = -1e-10
PAIR_CUTOFF = 1e-12
RICHARDSON_TRIGGER = 1e-7

# Two-mode splitter on (a, b), basis index 2a + b:
# |10> -> (|10> + |01>)/sqrt2,  |01> -> (|01> - |10>)/sqrt2.
_S = 1.0 / math.sqrt(2.0)
BEAM_SPLITTER = np.array(
    [
        [1, 0, 0, 0],
        [0, _S, _S, 0],
        [0, -_S, _S, 0],
        [0, 0, 0, 1],
    ],
    dtype=complex,
)


@dataclass(frozen=True)
class JointState:
    rho: np.ndarray
    label: HilbertLabel

    def __post_init__(self):
        d = self.label.dim
        if self.rho.shape != (d, d):
            raise DimensionError("state does not match its label", expected=(d, d), got=self.rho.shape)

    def validate(self, atol: float = TRACE_ATOL) -> None:
        check_density(self.rho, atol)

    def reduced(self, keep) -> np.ndarray:
        return partial_trace(self.rho, self.label, keep)


@dataclass(frozen=True)
class DepolarizingChannel:
    p_gamma: float

    def __post_init__(self):
        if not 0.0 <= self.p_gamma <= 1.0:
            raise ParameterError(f"p_gamma must lie in [0, 1], got {self.p_gamma!r}")

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply_depolarizing(rho, self)


def check_density(rho: np.ndarray, atol: float = TRACE_ATOL) -> None:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise NotDensityMatrixError(f"expected a square matrix, got shape {rho.shape}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > atol:
        raise NotDensityMatrixError(f"trace {tr.real:.15g} differs from 1")
    if hermitian_deviation(rho) > HERM_ATOL:
        raise NotDensityMatrixError("matrix is not Hermitian")
    low = np.linalg.eigvalsh(rho)[0]
    if low < EIG_FLOOR:
        raise NotDensityMatrixError(f"negative eigenvalue {low:.3e}")


def joint_label(M: int) -> HilbertLabel:
    return HilbertLabel.standard(arm_a=1, arm_b=1, sample=M)


def build_initial(
    cfg: MziConfig,
    ens: ThermalEnsemble,
    max_qubits: int = MAX_DENSE_QUBITS,
    max_bytes: int = MAX_DENSE_BYTES,
) -> JointState:
    """N00N state after the first splitter, times the Gibbs state of the sample."""
    if ens.M != cfg.M:
        raise ParameterError(f"ensemble has M={ens.M} but config has M={cfg.M}")
    if cfg.M > max_qubits:
        _check_dense(cfg.M, max_qubits, max_bytes)
    _check_dense(cfg.M + 2, max_qubits + 2, max_bytes)
    noon = BEAM_SPLITTER[:, 2]  # B|N,0>
    modes = np.outer(noon, noon.conj())
    rho = np.kron(modes, np.diag(gibbs_diagonal(ens).astype(complex)))
    return JointState(rho, joint_label(cfg.M))


def _phases(cfg: MziConfig) -> np.ndarray:
    """Diagonal of eps chi t n_a M_qubits in the joint basis."""
    M = cfg.M
    q = hamming_weights(M)
    n_a = np.repeat([0.0, 0.0, cfg.N, cfg.N], 2**M)  # a bit is the most significant
    return cfg.epsilon * cfg.chi * cfg.t * n_a * np.tile(q, 4)


def _phase_factors(cfg: MziConfig) -> np.ndarray:
    # exp(-i(phi_j - phi_k)); exactly 1 on the diagonal
    ph = _phases(cfg)
    return np.exp(-1j * (ph[:, None] - ph[None, :]))


def evolve(state: JointState, cfg: MziConfig) -> JointState:
    """Conjugate by the diagonal dispersive unitary, elementwise."""
    if state.label.dim != 2 ** (cfg.M + 2):
        raise DimensionError("state size does not match cfg.M")
    return JointState(state.rho * _phase_factors(cfg), state.label)


def _apply_splitter(rho: np.ndarray, M: int) -> np.ndarray:
    s = 2**M
    t = rho.reshape(4, s, 4, s)
    t = np.einsum("ij,jskt,lk->islt", BEAM_SPLITTER, t, BEAM_SPLITTER.conj(), optimize=True)
    return t.reshape(4 * s, 4 * s)


def second_bs_and_reduce(state: JointState) -> np.ndarray:
    """Recombine the arms and return the 2x2 mode-a state diag(p0, pN).

    The same splitter is applied again: B^2 maps |N,0> to |0,N>, so with no
    phase all photons leave through mode a's vacuum (bright) outcome.
    """
    M = len(state.label) - 2
    rho = _apply_splitter(state.rho, M)
    return partial_trace(rho, state.label, ["a0"])


def mode_a_state(cfg: MziConfig, T: float, **caps) -> np.ndarray:
    ens = ThermalEnsemble(cfg.M, T, cfg.epsilon)
    return second_bs_and_reduce(evolve(build_initial(cfg, ens, **caps), cfg))


def interferometer_channel(cfg: MziConfig) -> Callable[[np.ndarray], np.ndarray]:
    """T-independent linear map taking the sample state to the mode-a state."""
    M = cfg.M
    label = joint_label(M)
    noon = BEAM_SPLITTER[:, 2]
    modes = np.outer(noon, noon.conj())
    phase = _phase_factors(cfg)

    def channel(sample_rho: np.ndarray) -> np.ndarray:
        rho = np.kron(modes, sample_rho) * phase
        return partial_trace(_apply_splitter(rho, M), label, ["a0"])

    return channel


def apply_depolarizing(rho: np.ndarray, ch: DepolarizingChannel) -> np.ndarray:
    """p_gamma rho + (1 - p_gamma) I/d."""
    rho = np.asarray(rho)
    d = rho.shape[0]
    return ch.p_gamma * rho + (1.0 - ch.p_gamma) * np.eye(d) / d


# -- spectral QFI --------------------------------------------------------------


def spectral_qfi_from_derivative(rho: np.ndarray, drho: np.ndarray, cutoff: float = PAIR_CUTOFF) -> float:
    """2 sum_{jk} |<j|drho|k>|^2 / (l_j + l_k) over pairs with l_j + l_k > cutoff."""
    check_density(rho, atol=1e-10)
    vals, vecs = eig_hermitian(rho)
    d = vecs.conj().T @ drho @ vecs
    lsum = vals[:, None] + vals[None, :]
    mask = lsum > cutoff
    q = 2.0 * float(np.sum(np.abs(d[mask]) ** 2 / lsum[mask]))
    if q < -1e-9:
        raise ArithmeticError(f"negative QFI {q}")
    return max(q, 0.0)


def central_derivative(
    f: Callable[[float], np.ndarray], T: float, h: float, trigger: float = RICHARDSON_TRIGGER
) -> np.ndarray:
    """Central difference at step h, Richardson-extrapolated with h/2 if they disagree."""
    d1 = (f(T + h) - f(T - h)) / (2.0 * h)
    h2 = 0.5 * h
    d2 = (f(T + h2) - f(T - h2)) / (2.0 * h2)
    if np.max(np.abs(d1 - d2)) > trigger:
        return (4.0 * d2 - d1) / 3.0
    return d2


def default_step(T: float, epsilon: float = 1.0) -> float:
    return 1e-5 * max(abs(T), epsilon)


def spectral_qfi(
    rho_of_T: Callable[[float], np.ndarray],
    T: float,
    dT: Optional[float] = None,
    *,
    channel: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    epsilon: float = 1.0,
) -> float:
    """QFI of rho(T) from its spectrum and a numerical T-derivative.

    With ``channel`` given, the state is ``channel(rho_of_T(T))`` and the
    derivative is taken on the channel input, then pushed through the (linear,
    T-independent) channel. This keeps finite-difference roundoff out of the
    interferometer's near-cancelling amplitudes.
    """
    h = default_step(T, epsilon) if dT is None else float(dT)
    if not h > 0:
        raise ParameterError("dT must be positive")
    if math.isfinite(T) and h >= abs(T):
        h = 0.5 * abs(T)  # never cross T = 0
    drho_in = central_derivative(rho_of_T, T, h)
    rho = rho_of_T(T)
    if channel is not None:
        rho, drho = channel(rho), channel(drho_in)
    else:
        drho = drho_in
    return spectral_qfi_from_derivative(rho, drho)


def mode_a_qfi(cfg: MziConfig, T: float, p_gamma: float = 1.0, dT: Optional[float] = None) -> float:
    """Spectral QFI of the (optionally depolarized) mode-a output state."""
    chan = interferometer_channel(cfg)
    ch = DepolarizingChannel(p_gamma)
    # Depolarizing adds a T-independent constant; its derivative part is p_gamma * channel.
    def full(x):
        return apply_depolarizing(chan(x), ch)

    def sample_state(T_):
        return np.diag(gibbs_diagonal(ThermalEnsemble(cfg.M, T_, cfg.epsilon)).astype(complex))

    h = default_step(T, cfg.epsilon) if dT is None else float(dT)
    if h >= abs(T):
        h = 0.5 * abs(T)
    drho = ch.p_gamma * chan(central_derivative(sample_state, T, h))
    return spectral_qfi_from_derivative(full(sample_state(T)), drho)


# -- phase averages ------------------------------------------------------------


def phase_average(ens: ThermalEnsemble, phi: float) -> complex:
    """Tr[rho_T exp(i phi M_qubits)] evaluated on the Gibbs diagonal."""
    w = gibbs_diagonal(ens)
    q = hamming_weights(ens.M)
    return complex(np.sum(w * np.exp(1j * phi * q)))


def mean_field_phase(ens: ThermalEnsemble, phi: float) -> complex:
    """exp(i phi <M_qubits>)."""
    return complex(np.exp(1j * phi * ens.M * ens.p_e))
