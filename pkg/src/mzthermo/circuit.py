"""Gate-level statevector simulator and the thermometry circuit builder.

The statevector of an n-qubit register is an array of shape ``(2,)*n``;
axis i is the i-th tag of the circuit's :class:`HilbertLabel`. Thermal
mixedness is carried by ancillas entangled with the sample qubits, so pure
states are enough.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .analytic import MziConfig
from .core import HilbertLabel
from .errors import CapacityError, ParameterError, SubspaceLeakError
from .thermal import ThermalEnsemble, rotation_angle

MAX_CIRCUIT_QUBITS = 22
NOON_SIGNS = ("minus", "plus")


class GateKind(enum.Enum):
    RY = "RY"
    H = "H"
    X = "X"
    CX = "CX"
    MCX = "MCX"
    CP = "CP"
    MEASURE = "MEASURE"


_PARAM_NAME = {GateKind.RY: "angle", GateKind.CP: "phi"}
_CONTROLLED = {GateKind.CX, GateKind.MCX, GateKind.CP}


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    targets: tuple[str, ...]
    controls: tuple[str, ...] = ()
    param: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "controls", tuple(self.controls))
        if not self.targets:
            raise ParameterError(f"{self.kind.value} needs at least one target")
        if (self.kind in _PARAM_NAME) != (self.param is not None):
            raise ParameterError(f"{self.kind.value}: parameter mismatch")
        if (self.kind in _CONTROLLED) != bool(self.controls):
            raise ParameterError(f"{self.kind.value}: control mismatch")
        if self.kind in (GateKind.CX, GateKind.CP) and (len(self.controls) != 1 or len(self.targets) != 1):
            raise ParameterError(f"{self.kind.value} takes one control and one target")
        if set(self.controls) & set(self.targets):
            raise ParameterError("a qubit cannot be both control and target")

    def to_line(self) -> str:
        parts = [self.kind.value]
        if self.controls:
            parts += list(self.controls) + ["->"]
        parts += list(self.targets)
        if self.param is not None:
            parts.append(f"{_PARAM_NAME[self.kind]}={self.param!r}")
        return " ".join(parts)

    @classmethod
    def from_line(cls, line: str) -> "Gate":
        words = line.split()
        try:
            kind = GateKind(words[0])
        except (IndexError, ValueError):
            raise ParameterError(f"unknown gate line {line!r}") from None
        rest = words[1:]
        param = None
        if kind in _PARAM_NAME:
            key, _, val = rest[-1].partition("=")
            if key != _PARAM_NAME[kind]:
                raise ParameterError(f"missing {_PARAM_NAME[kind]}= in {line!r}")
            param = float(val)
            rest = rest[:-1]
        controls: list[str] = []
        if "->" in rest:
            i = rest.index("->")
            controls, rest = rest[:i], rest[i + 1 :]
        return cls(kind, tuple(rest), tuple(controls), param)


def ry(tag: str, angle: float) -> Gate:
    return Gate(GateKind.RY, (tag,), param=float(angle))


def h(tag: str) -> Gate:
    return Gate(GateKind.H, (tag,))


def x(tag: str) -> Gate:
    return Gate(GateKind.X, (tag,))


def cx(control: str, target: str) -> Gate:
    return Gate(GateKind.CX, (target,), (control,))


def mcx(controls: Sequence[str], targets: Sequence[str]) -> Gate:
    return Gate(GateKind.MCX, tuple(targets), tuple(controls))


def cp(control: str, target: str, phi: float) -> Gate:
    return Gate(GateKind.CP, (target,), (control,), float(phi))


def measure(tags: Sequence[str]) -> Gate:
    return Gate(GateKind.MEASURE, tuple(tags))


@dataclass(frozen=True)
class Circuit:
    label: HilbertLabel
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        seen_measure = False
        for g in self.gates:
            for t in g.controls + g.targets:
                if t not in self.label:
                    raise ParameterError(f"gate {g.to_line()!r} uses unknown qubit {t!r}")
            if g.kind is GateKind.MEASURE:
                seen_measure = True
            elif seen_measure:
                raise ParameterError("measurements must come last")

    @property
    def qubit_count(self) -> int:
        return len(self.label)

    @property
    def measured(self) -> tuple[str, ...]:
        out: list[str] = []
        for g in self.gates:
            if g.kind is GateKind.MEASURE:
                out += [t for t in g.targets if t not in out]
        return tuple(out)

    def to_text(self) -> str:
        lines = ["QUBITS " + " ".join(self.label.tags)]
        lines += [g.to_line() for g in self.gates]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not lines or not lines[0].startswith("QUBITS"):
            raise ParameterError("circuit text must start with a QUBITS line")
        label = HilbertLabel(tuple(lines[0].split()[1:]))
        return cls(label, tuple(Gate.from_line(ln) for ln in lines[1:]))


@dataclass(frozen=True)
class ShotRecord:
    """Outcome counts over ``measured`` qubits; bitstrings follow that order."""

    items: tuple[tuple[str, int], ...]
    shots: int
    seed: Optional[int]
    measured: tuple[str, ...]

    def __post_init__(self):
        if sum(c for _, c in self.items) != self.shots:
            raise ValueError("counts do not sum to shots")

    @property
    def bitstrings(self) -> dict[str, int]:
        return dict(self.items)


# -- builder ---------------------------------------------------------------


def thermometry_label(cfg: MziConfig) -> HilbertLabel:
    return HilbertLabel.standard(arm_a=cfg.N, arm_b=cfg.N, sample=cfg.M, ancilla=cfg.M)


def noon_prep_gates(label: HilbertLabel, sign: str = "minus") -> list[Gate]:
    """|0...0> -> (|0,N> - |N,0>)/sqrt2 ("minus") or (|0,N> + |N,0>)/sqrt2 ("plus")."""
    if sign not in NOON_SIGNS:
        raise ParameterError(f"sign must be one of {NOON_SIGNS}")
    arm_a, arm_b = label.group("a"), label.group("b")
    ctrl, spread = arm_a[0], arm_a[1:] + arm_b
    init = arm_a if sign == "minus" else arm_b
    return [x(t) for t in init] + [mcx([ctrl], spread), h(ctrl), mcx([ctrl], spread)]


def inverse_gates(gates: Sequence[Gate]) -> list[Gate]:
    """Inverse of a sequence of self-inverse gates (H, X, CX, MCX)."""
    out = []
    for g in reversed(gates):
        if g.kind not in (GateKind.H, GateKind.X, GateKind.CX, GateKind.MCX):
            raise ParameterError(f"no inverse rule for {g.kind.value}")
        out.append(g)
    return out


def build_thermometry_circuit(
    cfg: MziConfig,
    ens: ThermalEnsemble,
    sign: str = "minus",
    max_qubits: int = MAX_CIRCUIT_QUBITS,
) -> Circuit:
    """Gibbs preparation, N00N splitter, dispersive phases, inverse splitter, readout of arm a."""
    if ens.M != cfg.M:
        raise ParameterError(f"ensemble has M={ens.M} but config has M={cfg.M}")
    n = 2 * cfg.N + 2 * cfg.M
    if n > max_qubits:
        raise CapacityError(f"circuit needs {n} qubits, cap is {max_qubits}", requested=n, limit=max_qubits)
    label = thermometry_label(cfg)
    sample, anc, arm_a = label.group("s"), label.group("anc"), label.group("a")
    omega = rotation_angle(ens)
    gates: list[Gate] = []
    for s, a in zip(sample, anc):
        gates += [ry(s, omega), cx(s, a)]
    prep = noon_prep_gates(label, sign)
    gates += prep
    gates += [cp(s, arm_a[0], cfg.phase) for s in sample]
    gates += inverse_gates(prep)
    gates.append(measure(arm_a))
    return Circuit(label, tuple(gates))


# -- simulation --------------------------------------------------------------

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)


def _ry_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _apply_1q(psi: np.ndarray, m: np.ndarray, axis: int) -> np.ndarray:
    out = np.tensordot(m, psi, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def _control_index(n: int, controls: Iterable[int]) -> tuple:
    idx: list = [slice(None)] * n
    for c in controls:
        idx[c] = 1
    return tuple(idx)


def apply_gate(psi: np.ndarray, gate: Gate, label: HilbertLabel) -> np.ndarray:
    n = psi.ndim
    tgt = [label.index(t) for t in gate.targets]
    ctl = [label.index(c) for c in gate.controls]
    k = gate.kind
    if k is GateKind.MEASURE:
        return psi
    if k is GateKind.H:
        return _apply_1q(psi, _H, tgt[0])
    if k is GateKind.RY:
        return _apply_1q(psi, _ry_matrix(gate.param), tgt[0])
    if k is GateKind.X:
        return np.flip(psi, axis=tgt[0]).copy()
    psi = psi.copy()
    sel = _control_index(n, ctl)
    # axes of the controlled slice: drop control axes, keep order
    remaining = [i for i in range(n) if i not in ctl]
    local = [remaining.index(t) for t in tgt]
    if k in (GateKind.CX, GateKind.MCX):
        psi[sel] = np.flip(psi[sel], axis=tuple(local))
    elif k is GateKind.CP:
        sub = psi[sel]
        idx = [slice(None)] * sub.ndim
        idx[local[0]] = 1
        sub[tuple(idx)] *= np.exp(-1j * gate.param)
        psi[sel] = sub
    return psi


def run_statevector(circ: Circuit) -> np.ndarray:
    """Exact amplitudes after all non-measurement gates, shape (2,)*n."""
    n = circ.qubit_count
    psi = np.zeros((2,) * n, dtype=complex)
    psi[(0,) * n] = 1.0
    for g in circ.gates:
        psi = apply_gate(psi, g, circ.label)
    return psi


def marginal_probabilities(psi: np.ndarray, label: HilbertLabel, tags: Sequence[str]) -> np.ndarray:
    """Born distribution over ``tags`` (in that order), shape (2,)*len(tags)."""
    axes = [label.index(t) for t in tags]
    p = np.abs(psi) ** 2
    other = tuple(i for i in range(psi.ndim) if i not in axes)
    p = p.sum(axis=other)
    kept = sorted(axes)
    return np.transpose(p, [kept.index(a) for a in axes])


def measured_distribution(circ: Circuit, psi: Optional[np.ndarray] = None) -> dict[str, float]:
    tags = circ.measured
    if not tags:
        raise ParameterError("circuit has no measurements")
    psi = run_statevector(circ) if psi is None else psi
    p = marginal_probabilities(psi, circ.label, tags)
    out = {}
    for idx in np.ndindex(p.shape):
        out["".join(map(str, idx))] = float(p[idx])
    return out


def bright_probability(circ: Circuit, psi: Optional[np.ndarray] = None) -> float:
    """Born probability that every arm-a qubit reads 0."""
    psi = run_statevector(circ) if psi is None else psi
    arm_a = circ.label.group("a")
    p = marginal_probabilities(psi, circ.label, arm_a)
    return float(p[(0,) * len(arm_a)])


def sample_distribution(
    dist: dict[str, float], shots: int, seed: Optional[int], measured: Sequence[str]
) -> ShotRecord:
    if shots < 1 or int(shots) != shots:
        raise ParameterError("shots must be a positive integer")
    keys = sorted(dist)
    p = np.array([dist[k] for k in keys], dtype=float)
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(int(shots), p)
    items = tuple((k, int(c)) for k, c in zip(keys, counts) if c > 0)
    return ShotRecord(items, int(shots), seed, tuple(measured))


def sample_shots(circ: Circuit, shots: int, seed: Optional[int]) -> ShotRecord:
    """Multinomial sampling of the measured qubits; deterministic given ``seed``."""
    return sample_distribution(measured_distribution(circ), shots, seed, circ.measured)


def classify_ports(rec: ShotRecord, arm_a_tags: Sequence[str]) -> tuple[int, int]:
    """(bright, dark) counts: arm a all zeros vs all ones."""
    pos = [rec.measured.index(t) for t in arm_a_tags]
    n0 = nN = 0
    for bits, c in rec.items:
        sub = {bits[i] for i in pos}
        if sub == {"0"}:
            n0 += c
        elif sub == {"1"}:
            nN += c
        else:
            raise SubspaceLeakError(f"arm-a outcome {bits!r} left the N00N subspace", outcome=bits)
    return n0, nN
