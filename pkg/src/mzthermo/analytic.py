"""Closed-form bright-port statistics and QFI of the dispersive N00N thermometer.

With ``nu = n_eff = eps N chi t / 2`` and thermal populations ``p_e, p_g``
the bright-port probability is

    p0 = sum_q C(M,q) cos^2(q nu) p_e^q p_g^(M-q)
       = 1/2 + 1/2 Re[w^M],     w = p_g + p_e exp(2i nu) = alpha exp(i theta).

``w`` is ``(1 + x e^{2i nu}) / (1 + x)`` with ``x = exp(-eps/T)`` rewritten in
populations, which keeps every quantity finite for T -> 0 of either sign.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.special import gammaln, xlogy

from .errors import ParameterError
from .thermal import excited_population_derivative, populations

TWO_PI = 2.0 * math.pi
DEFAULT_GRID = 2048
GOLDEN_TOL = 1e-8
LIMIT_SIN_TOL = 1e-9
LIMIT_DENOM_TOL = 1e-12
LOG_BINOMIAL_ABOVE = 30


@dataclass(frozen=True)
class MziConfig:
    """Interferometer settings: N00N excitation N, coupling chi, time t, gap epsilon, sample size M."""

    N: int = 1
    chi: float = 1.0
    t: float = 1.0
    epsilon: float = 1.0
    M: int = 1

    def __post_init__(self):
        for name in ("N", "M"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ParameterError(f"{name} must be a positive integer, got {v!r}")
        if self.chi < 0 or self.t < 0:
            raise ParameterError("chi and t must be non-negative")
        if not self.epsilon > 0:
            raise ParameterError("epsilon must be positive")

    @property
    def n_eff(self) -> float:
        return self.epsilon * self.N * self.chi * self.t / 2.0

    @property
    def phase(self) -> float:
        """Dispersive phase per excited sample atom on the |N,0> branch, eps N chi t."""
        return self.epsilon * self.N * self.chi * self.t

    def with_neff(self, n_eff: float) -> "MziConfig":
        """Same N, chi, epsilon, M; interaction time chosen to give ``n_eff``."""
        if n_eff < 0:
            raise ParameterError("n_eff must be non-negative")
        chi = self.chi if self.chi > 0 else 1.0
        return replace(self, chi=chi, t=2.0 * n_eff / (self.epsilon * self.N * chi))

    @classmethod
    def from_neff(cls, n_eff: float, M: int = 1, N: int = 1, epsilon: float = 1.0) -> "MziConfig":
        return cls(N=N, chi=1.0, t=0.0, epsilon=epsilon, M=M).with_neff(n_eff)


@dataclass(frozen=True)
class DeMoivreTerms:
    """Modulus/argument form of p0 and the logarithmic T-derivatives.

    ``C = (1/alpha) d alpha/dT``, ``D = -d theta/dT``, ``g = hypot(C, D)`` and
    ``Phi`` the quadrant-resolved angle with ``g cos(Phi) = C``,
    ``g sin(Phi) = -D``.
    """

    alpha: float
    theta: float
    C: float
    D: float
    g: float
    Phi: float


@dataclass(frozen=True)
class QfiPoint:
    temperature: float
    n_eff: float
    value: float


# -- kernels on (M, T, nu) -------------------------------------------------


def binomial_weights(M: int, p_e: float, p_g: float) -> np.ndarray:
    """P(q excited atoms) for q = 0..M."""
    q = np.arange(M + 1)
    if M <= LOG_BINOMIAL_ABOVE:
        coeff = np.array([math.comb(M, k) for k in range(M + 1)], dtype=float)
        with np.errstate(under="ignore"):
            return coeff * p_e**q * p_g ** (M - q)
    logc = gammaln(M + 1) - gammaln(q + 1) - gammaln(M - q + 1)
    with np.errstate(under="ignore"):
        return np.exp(logc + xlogy(q, p_e) + xlogy(M - q, p_g))


def _port_probabilities(M, T, nu, epsilon):
    """(p0, pN) as positive-term sums; pN carries no cancellation as it -> 0."""
    pe, pg = populations(T, epsilon)
    w = binomial_weights(M, pe, pg)
    q = np.arange(M + 1)
    arg = np.multiply.outer(np.atleast_1d(np.asarray(nu, dtype=float)), q)
    p0 = np.cos(arg) ** 2 @ w
    pN = np.sin(arg) ** 2 @ w
    if np.ndim(nu) == 0:
        return float(p0[0]), float(pN[0])
    return p0, pN


def _demoivre(T, nu, epsilon):
    """alpha, theta, C, D (arrays or scalars) from populations."""
    pe, pg = populations(T, epsilon)
    nu = np.asarray(nu, dtype=float)
    c2, s2 = np.cos(2 * nu), np.sin(2 * nu)
    re, im = pg + pe * c2, pe * s2
    alpha = np.hypot(re, im)
    theta = np.arctan2(im, re)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = -(epsilon / (T * T)) * 2.0 * pe * pg / (alpha * alpha)
    sn, cn = np.sin(nu), np.cos(nu)
    C = k * sn * sn * (pg - pe)
    D = k * sn * cn
    return alpha, theta, C, D


def _qfi_kernel(M, T, nu, epsilon):
    """Closed-form QFI on a scalar or array of nu; 0 on the alpha = 1 branch."""
    alpha, theta, C, D = _demoivre(T, nu, epsilon)
    g = np.hypot(C, D)
    Phi = np.arctan2(-D, C)
    p0, pN = _port_probabilities(M, T, nu, epsilon)
    # 1 - alpha^{2M} cos^2(M theta) == 4 p0 pN; the product form has no cancellation.
    denom = 4.0 * p0 * pN
    with np.errstate(under="ignore", over="ignore", invalid="ignore", divide="ignore"):
        num = M * M * alpha ** (2 * M) * g * g * np.cos(M * theta + Phi) ** 2
        q = num / denom
    limit = (np.abs(np.sin(2 * np.asarray(nu, dtype=float))) < LIMIT_SIN_TOL) & (
        np.abs(denom) < LIMIT_DENOM_TOL
    )
    degenerate = denom <= 0
    q = np.where(limit | degenerate | ~np.isfinite(q), 0.0, q)
    if np.ndim(q) == 0:
        return float(q)
    return q


def qfi_at(M: int, T: float, n_eff, epsilon: float = 1.0):
    """QFI for raw ``n_eff`` (scalar or array, any sign)."""
    if T == 0:
        raise ParameterError("temperature must be nonzero")
    if math.isinf(T):
        return 0.0 if np.ndim(n_eff) == 0 else np.zeros(np.shape(n_eff))
    return _qfi_kernel(int(M), float(T), n_eff, float(epsilon))


# -- public operations -----------------------------------------------------


def _check_T(T):
    if T == 0 or math.isnan(T):
        raise ParameterError("temperature must be nonzero")


def p0_binomial(cfg: MziConfig, T: float) -> float:
    """Bright-port probability by summing over Hamming weights."""
    _check_T(T)
    return _port_probabilities(cfg.M, T, cfg.n_eff, cfg.epsilon)[0]


def dark_probability(cfg: MziConfig, T: float) -> float:
    """1 - p0, summed directly so it stays accurate when tiny."""
    _check_T(T)
    return _port_probabilities(cfg.M, T, cfg.n_eff, cfg.epsilon)[1]


def demoivre_terms(cfg: MziConfig, T: float) -> DeMoivreTerms:
    _check_T(T)
    if math.isinf(T):
        alpha, theta = abs(0.5 + 0.5 * complex(math.cos(2 * cfg.n_eff), math.sin(2 * cfg.n_eff))), cfg.n_eff
        return DeMoivreTerms(alpha, theta, 0.0, 0.0, 0.0, 0.0)
    alpha, theta, C, D = (float(v) for v in _demoivre(T, cfg.n_eff, cfg.epsilon))
    return DeMoivreTerms(alpha, theta, C, D, math.hypot(C, D), math.atan2(-D, C))


def p0_from_terms(terms: DeMoivreTerms, M: int) -> float:
    return 0.5 * terms.alpha**M * math.cos(M * terms.theta) + 0.5


def p0_closed(cfg: MziConfig, T: float) -> float:
    """p0 = alpha^M cos(M theta) / 2 + 1/2."""
    return p0_from_terms(demoivre_terms(cfg, T), cfg.M)


def dp0_dT(cfg: MziConfig, T: float) -> float:
    """dp0/dT = (M/2) alpha^M g cos(M theta + Phi)."""
    tm = demoivre_terms(cfg, T)
    M = cfg.M
    return 0.5 * M * tm.alpha**M * tm.g * math.cos(M * tm.theta + tm.Phi)


def qfi_closed(cfg: MziConfig, T: float) -> QfiPoint:
    """Exact QFI of the mode-a state; equals the bright/dark-port CFI."""
    _check_T(T)
    return QfiPoint(T, cfg.n_eff, qfi_at(cfg.M, T, cfg.n_eff, cfg.epsilon))


def golden_section_max(
    f: Callable[[float], float], a: float, b: float, tol: float = GOLDEN_TOL
) -> tuple[float, float]:
    """Maximize a unimodal f on [a, b]; returns (x, f(x))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    fx = f(x)
    best = max((fx, x), (fc, c), (fd, d))
    return best[1], best[0]


def _refined_peaks(M, T, epsilon, lo, hi, points):
    grid = np.linspace(lo, hi, points)
    vals = qfi_at(M, T, grid, epsilon)
    f = lambda v: qfi_at(M, T, v, epsilon)  # noqa: E731
    peaks = []
    for i in range(len(grid)):
        left = vals[i - 1] if i > 0 else -np.inf
        right = vals[i + 1] if i < len(grid) - 1 else -np.inf
        if vals[i] > 0 and vals[i] >= left and vals[i] > right:
            a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
            peaks.append(golden_section_max(f, a, b))
    return grid, vals, peaks


def qfi_max_over_neff(
    cfg: MziConfig,
    T: float,
    neff_range: tuple[float, float] = (0.0, TWO_PI),
    points: int = DEFAULT_GRID,
) -> tuple[float, float]:
    """Global maximizer of the QFI over n_eff: dense grid, then golden section."""
    _check_T(T)
    lo, hi = neff_range
    if not hi > lo:
        raise ParameterError("empty n_eff range")
    _, vals, peaks = _refined_peaks(cfg.M, T, cfg.epsilon, lo, hi, max(points, 3))
    if not peaks:
        return lo, float(vals[0])
    x, q = max(peaks, key=lambda p: p[1])
    return float(x), float(q)


def neff_local_maxima(
    cfg: MziConfig,
    T: float,
    neff_range: tuple[float, float] = (0.0, TWO_PI),
    points: int = DEFAULT_GRID,
    rel_floor: float = 1e-9,
) -> list[tuple[float, float]]:
    """All interior local maxima of Q(n_eff) above ``rel_floor`` times the global one."""
    _check_T(T)
    _, _, peaks = _refined_peaks(cfg.M, T, cfg.epsilon, *neff_range, max(points, 3))
    if not peaks:
        return []
    top = max(q for _, q in peaks)
    return [(float(x), float(q)) for x, q in peaks if q >= rel_floor * top]


def qfi_naive_phase(cfg: MziConfig, T: float) -> float:
    """Pure-N00N phase QFI assuming the phase follows the mean excitation.

    Phase per arm eps chi t M p_e(T); the N00N state multiplies its
    sensitivity by N, giving N^2 (d phi/dT)^2.
    """
    _check_T(T)
    dphi = cfg.epsilon * cfg.chi * cfg.t * cfg.M * excited_population_derivative(T, cfg.epsilon)
    return cfg.N**2 * dphi**2


def qfi_taylor_coeffs(cfg: MziConfig, T: float, Ms=(1, 2, 3)) -> tuple[float, float]:
    """Least-squares c1, c2 in Q(M) ~ c1 M + c2 M^2 at fixed n_eff."""
    _check_T(T)
    Ms = np.asarray(Ms, dtype=float)
    q = np.array([qfi_at(int(m), T, cfg.n_eff, cfg.epsilon) for m in Ms])
    A = np.column_stack([Ms, Ms**2])
    (c1, c2), *_ = np.linalg.lstsq(A, q, rcond=None)
    return float(c1), float(c2)
