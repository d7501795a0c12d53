"""Real-amplitude state-vector simulation of the Deutsch-Jozsa + Grover circuits.

Every operator involved (Hadamard layers, sign oracles, reflections) is real
orthogonal, so states carry float64 amplitudes only. The auxiliary ``|->``
qubit of the oracle is left implicit: ``U_f`` acts as ``|x> -> (-1)**f(x) |x>``.

Query accounting convention: preparing ``D_f|0>`` costs one ``U_f`` call. A
reflection about ``D_f|0>`` factors as ``D_f (2|0><0| - I) D_f^-1`` and is
billed two calls, so one Grover iterate costs 2. The marked oracle ``O_g`` and
measurements are free.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .boolean_core import TruthTable

NORM_TOL = 1e-12
MEASURE_TOL = 1e-9


class QueryCounter:
    """Running count of ``U_f`` invocations for one logical run."""

    __slots__ = ("_count",)

    def __init__(self, count: int = 0):
        if count < 0:
            raise ValueError("query count cannot be negative")
        self._count = int(count)

    @property
    def count(self) -> int:
        return self._count

    def charge(self, calls: int = 1) -> None:
        if calls < 0:
            raise ValueError("cannot refund queries")
        self._count += calls

    def __repr__(self) -> str:
        return f"QueryCounter({self._count})"


@dataclass(frozen=True, eq=False)
class StateVector:
    n: int
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=np.float64)
        if amps.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} amplitudes for n={self.n}, got {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def basis(cls, n: int, z: int) -> "StateVector":
        amps = np.zeros(1 << n)
        amps[z] = 1.0
        return cls(n, amps)

    @classmethod
    def uniform(cls, n: int) -> "StateVector":
        return cls(n, np.full(1 << n, 1.0 / math.sqrt(1 << n)))

    def norm_sq(self) -> float:
        return float(self.amps @ self.amps)

    def probabilities(self) -> np.ndarray:
        return self.amps * self.amps

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "amplitude"])
        for z, a in enumerate(self.amps.tolist()):
            w.writerow([z, repr(a)])
        return buf.getvalue()


@dataclass(frozen=True)
class MarkedOracle:
    """Sign oracle ``O_g`` flipping every basis state except ``a0``."""

    n: int
    a0: int

    def __post_init__(self):
        if not 0 <= self.a0 < (1 << self.n):
            raise ValueError(f"a0={self.a0} out of range for n={self.n}")


def _same_dim(a: StateVector, b) -> None:
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: n={a.n} vs n={b.n}")


def deutsch_jozsa_state(f: TruthTable, counter: QueryCounter) -> StateVector:
    """``H^n U_f H^n |0>``; amplitude at ``z`` is the normalized Walsh value."""
    counter.charge(1)
    return StateVector(f.n, f.spectrum.values / float(1 << f.n))


def apply_marked_oracle(psi: StateVector, g: MarkedOracle) -> StateVector:
    _same_dim(psi, g)
    amps = -psi.amps
    amps[g.a0] = psi.amps[g.a0]
    return StateVector(psi.n, amps)


def reflect_about(psi: StateVector, axis: StateVector, counter: QueryCounter) -> StateVector:
    """``(2|axis><axis| - I) psi``, billed as two oracle calls."""
    _same_dim(psi, axis)
    counter.charge(2)
    return StateVector(psi.n, 2.0 * float(axis.amps @ psi.amps) * axis.amps - psi.amps)


def grover_iterate(
    psi: StateVector, axis: StateVector, g: MarkedOracle, counter: QueryCounter
) -> StateVector:
    return reflect_about(apply_marked_oracle(psi, g), axis, counter)


def measure(psi: StateVector, rng: np.random.Generator) -> int:
    """Sample a basis index with probability ``amps[z]**2``; ``psi`` is untouched."""
    probs = psi.probabilities()
    total = float(probs.sum())
    if abs(total - 1.0) > MEASURE_TOL:
        raise ValueError(f"state norm^2 is {total!r}, not 1")
    cdf = np.cumsum(probs)
    z = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(z, probs.size - 1)


def angle_split(psi: StateVector, a0: int) -> tuple[float, float, float]:
    """Split ``psi`` as ``u|X> + v|a0>`` with ``u >= 0``.

    Returns ``(u, v, theta)`` with ``theta = atan2(u, v)`` in ``[0, pi]``; a
    negative overlap with ``|a0>`` shows up as ``theta > pi/2``.
    """
    v = float(psi.amps[a0])
    u = math.sqrt(max(0.0, 1.0 - v * v))
    return u, v, math.atan2(u, v)


def outside_mass(psi: StateVector, a0: int) -> float:
    """Norm of the component of ``psi`` orthogonal to ``|a0>``."""
    rest = psi.norm_sq() - float(psi.amps[a0]) ** 2
    return math.sqrt(max(0.0, rest))
