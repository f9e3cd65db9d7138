"""Dense linear algebra over labeled multi-qubit Hilbert spaces.

Operators are plain complex ``numpy`` arrays. Subsystems are addressed by
string tags held in a :class:`HilbertLabel`; the first tag is the most
significant bit of a computational-basis index.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, NotHermitianError

HERMITIAN_ATOL = 1e-12


@dataclass(frozen=True)
class HilbertLabel:
    """Ordered qubit tags; each subsystem has local dimension 2."""

    tags: tuple[str, ...]

    def __post_init__(self):
        tags = tuple(self.tags)
        object.__setattr__(self, "tags", tags)
        if len(set(tags)) != len(tags):
            raise ValueError(f"duplicate subsystem tags in {tags}")

    @classmethod
    def standard(
        cls, arm_a: int = 0, arm_b: int = 0, sample: int = 0, ancilla: int = 0
    ) -> "HilbertLabel":
        """Layout used everywhere: arm-a, arm-b, sample qubits, then ancillas."""
        tags = (
            [f"a{i}" for i in range(arm_a)]
            + [f"b{i}" for i in range(arm_b)]
            + [f"s{i}" for i in range(sample)]
            + [f"anc{i}" for i in range(ancilla)]
        )
        return cls(tuple(tags))

    def __len__(self) -> int:
        return len(self.tags)

    def __iter__(self):
        return iter(self.tags)

    def __contains__(self, tag) -> bool:
        return tag in self.tags

    @property
    def dim(self) -> int:
        return 2 ** len(self.tags)

    def index(self, tag: str) -> int:
        try:
            return self.tags.index(tag)
        except ValueError:
            raise KeyError(f"unknown subsystem tag {tag!r}") from None

    def group(self, prefix: str) -> tuple[str, ...]:
        """Tags of one register, e.g. ``group("s")`` -> sample qubits."""
        return tuple(t for t in self.tags if t.rstrip("0123456789") == prefix)


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, ``(A⊗B)[i*p+k, j*q+l] = A[i,j] B[k,l]``."""
    return np.kron(np.asarray(a), np.asarray(b))


def kron_all(factors: Iterable[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def hermitian_deviation(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - dagger(a)))) if a.size else 0.0


def partial_trace(
    rho: np.ndarray, label: HilbertLabel, keep: Iterable[str]
) -> np.ndarray:
    """Reduced operator on the tags in ``keep``.

    The kept subsystems appear in label order regardless of the order in
    ``keep``.
    """
    rho = np.asarray(rho)
    n = len(label)
    if rho.shape != (label.dim, label.dim):
        raise DimensionError(
            f"operator of shape {rho.shape} does not match a {n}-qubit label",
            expected=(label.dim, label.dim),
            got=rho.shape,
        )
    keep = set(keep)
    unknown = keep - set(label.tags)
    if unknown:
        raise DimensionError(f"tags {sorted(unknown)} are not in the label")
    traced = sorted((label.index(t) for t in label.tags if t not in keep), reverse=True)

    t = rho.reshape((2,) * (2 * n))
    remaining = n
    for axis in traced:
        t = np.trace(t, axis1=axis, axis2=axis + remaining)
        remaining -= 1
    d = 2**remaining
    return t.reshape(d, d)


def eig_hermitian(
    rho: np.ndarray, atol: float = HERMITIAN_ATOL
) -> tuple[np.ndarray, np.ndarray]:
    """Ascending real eigenvalues and column eigenvectors of a Hermitian matrix."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError("eig_hermitian needs a square matrix", got=rho.shape)
    dev = hermitian_deviation(rho)
    if dev > atol:
        raise NotHermitianError(
            f"matrix deviates from its adjoint by {dev:.3e}", deviation=dev
        )
    vals, vecs = np.linalg.eigh(rho)
    return vals, vecs


def basis_state(bits: Sequence[int]) -> np.ndarray:
    """Computational basis ket for a bit sequence (first bit most significant)."""
    idx = 0
    for b in bits:
        idx = 2 * idx + int(b)
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[idx] = 1.0
    return v


def hamming_weights(n: int) -> np.ndarray:
    """Number of set bits of every n-bit basis index."""
    idx = np.arange(2**n)
    w = np.zeros(2**n, dtype=np.int64)
    for k in range(n):
        w += (idx >> k) & 1
    return w
