"""Boolean functions as truth tables: Walsh spectra, ANF, distances, fixtures.

Index convention: entry ``i`` of a truth table is ``f(x)`` where bit ``j`` of
``i`` (least significant first) is the value of ``x_{j+1}``. The same
convention is used for Walsh masks ``omega`` and ANF monomial masks, so the
table ``[f(0,..,0), f(1,0,..,0), f(0,1,..,0), ...]`` is the natural order.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

MAX_VARS = 24


def _check_n(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_VARS:
        raise ValueError(f"variable count must be in [1, {MAX_VARS}], got {n!r}")


def _check_index(n: int, omega: int, what: str = "omega") -> None:
    if not 0 <= omega < (1 << n):
        raise IndexError(f"{what}={omega} out of range for n={n}")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def popcount_parity(values: np.ndarray) -> np.ndarray:
    """Parity of the popcount of each entry of an unsigned integer array."""
    v = values.astype(np.uint32, copy=True)
    v ^= v >> 16
    v ^= v >> 8
    v ^= v >> 4
    v ^= v >> 2
    v ^= v >> 1
    return (v & 1).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class TruthTable:
    """An ``n``-variable Boolean function stored as its ``2**n`` output bits."""

    n: int
    bits: np.ndarray

    def __post_init__(self):
        _check_n(self.n)
        bits = np.asarray(self.bits)
        if bits.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} bits for n={self.n}, got shape {bits.shape}")
        if bits.size and (bits.min() < 0 or bits.max() > 1):
            raise ValueError("truth table entries must be 0 or 1")
        object.__setattr__(self, "bits", _frozen(bits.astype(np.uint8, copy=True)))

    @classmethod
    def from_bits(cls, bits) -> "TruthTable":
        bits = np.asarray(bits, dtype=np.uint8)
        n = int(bits.size).bit_length() - 1
        if bits.size == 0 or (1 << n) != bits.size:
            raise ValueError("truth table length must be a power of two")
        return cls(n, bits)

    def __len__(self) -> int:
        return self.bits.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruthTable):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash((self.n, self.bits.tobytes()))

    def __repr__(self) -> str:
        return f"TruthTable(n={self.n}, hex={to_hex(self)!r})"

    def __call__(self, x: int) -> int:
        return int(self.bits[x])

    @property
    def weight(self) -> int:
        return int(self.bits.sum(dtype=np.int64))

    @cached_property
    def signs(self) -> np.ndarray:
        """The +/-1 form ``(-1)**f(x)`` as int64."""
        return _frozen(1 - 2 * self.bits.astype(np.int64))

    @cached_property
    def spectrum(self) -> "WalshSpectrum":
        return walsh_transform(self)


@dataclass(frozen=True, eq=False)
class WalshSpectrum:
    n: int
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(np.asarray(self.values, dtype=np.int64)))

    def normalized(self) -> np.ndarray:
        return self.values / float(1 << self.n)

    def peak(self) -> int:
        """Mask with the largest absolute Walsh value (lowest index on ties)."""
        return int(np.argmax(np.abs(self.values)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["omega", "walsh", "normalized"])
        scale = float(1 << self.n)
        for omega, value in enumerate(self.values.tolist()):
            w.writerow([omega, value, repr(value / scale)])
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class AnfPolynomial:
    n: int
    coefficients: np.ndarray

    def __post_init__(self):
        _check_n(self.n)
        c = np.asarray(self.coefficients, dtype=np.uint8)
        if c.shape != (1 << self.n,):
            raise ValueError("ANF needs one coefficient per monomial mask")
        object.__setattr__(self, "coefficients", _frozen(c.copy()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, AnfPolynomial):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.coefficients, other.coefficients)

    __hash__ = None

    @property
    def degree(self) -> int:
        """Algebraic degree; the zero polynomial gets degree 0."""
        masks = np.flatnonzero(self.coefficients)
        if masks.size == 0:
            return 0
        return max(int(m).bit_count() for m in masks)

    def __str__(self) -> str:
        terms = []
        for m in np.flatnonzero(self.coefficients).tolist():
            if m == 0:
                terms.append("1")
            else:
                terms.append("*".join(f"x{j + 1}" for j in range(self.n) if m >> j & 1))
        return " + ".join(terms) if terms else "0"


# --- transforms -------------------------------------------------------------

def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard butterfly, returns a new array.

    Works along the last axis, so a batch of vectors can be transformed at
    once. Integer input stays integer (exact); applying it twice scales by
    ``2**n``.
    """
    a = np.array(values, copy=True)
    size = a.shape[-1]
    if size & (size - 1):
        raise ValueError("length must be a power of two")
    lead = a.shape[:-1]
    h = 1
    while h < size:
        a = a.reshape(*lead, size // (2 * h), 2, h)
        lo = a[..., 0, :].copy()
        hi = a[..., 1, :]
        a[..., 0, :] += hi
        a[..., 1, :] = lo - hi
        h *= 2
    return a.reshape(*lead, size)


def walsh_transform(f: TruthTable) -> WalshSpectrum:
    return WalshSpectrum(f.n, fwht(f.signs))


def normalized_walsh(f: TruthTable, omega: int) -> float:
    _check_index(f.n, omega)
    return float(f.spectrum.values[omega]) / (1 << f.n)


def _mobius(bits: np.ndarray) -> np.ndarray:
    a = np.array(bits, dtype=np.uint8, copy=True)
    size = a.size
    h = 1
    while h < size:
        a = a.reshape(size // (2 * h), 2, h)
        a[:, 1, :] ^= a[:, 0, :]
        h *= 2
    return a.reshape(size)


def truth_table_to_anf(f: TruthTable) -> AnfPolynomial:
    return AnfPolynomial(f.n, _mobius(f.bits))


def anf_to_truth_table(p: AnfPolynomial) -> TruthTable:
    # the binary Moebius transform is its own inverse
    return TruthTable(p.n, _mobius(p.coefficients))


# --- distances --------------------------------------------------------------

def hamming_distance(f: TruthTable, g: TruthTable) -> int:
    if f.n != g.n:
        raise ValueError(f"variable counts differ: {f.n} vs {g.n}")
    return int(np.count_nonzero(f.bits != g.bits))


def nonlinearity(f: TruthTable) -> int:
    """Distance from ``f`` to the nearest affine function."""
    peak = int(np.abs(f.spectrum.values).max())
    return ((1 << f.n) - peak) // 2


def is_affine(f: TruthTable) -> bool:
    return nonlinearity(f) == 0


def _check_epsilon(eps: float) -> None:
    if not 0.0 < eps < 0.5:
        raise ValueError(f"epsilon must lie in (0, 1/2), got {eps!r}")


def far_threshold(n: int, eps: float) -> int:
    """Smallest integer distance that counts as ``eps``-far, ``ceil(eps * 2**n)``.

    Guards against float noise such as ``0.07 * 100 = 7.000000000000001``.
    """
    x = eps * (1 << n)
    r = round(x)
    return int(r) if math.isclose(x, r, rel_tol=1e-12, abs_tol=1e-9) else math.ceil(x)


def epsilon_far_from_affine(f: TruthTable, eps: float) -> bool:
    _check_epsilon(eps)
    return nonlinearity(f) >= far_threshold(f.n, eps)


# --- constructors -----------------------------------------------------------

def make_affine(n: int, omega: int, a0: int = 0) -> TruthTable:
    _check_n(n)
    _check_index(n, omega)
    if a0 not in (0, 1):
        raise ValueError("constant term must be 0 or 1")
    x = np.arange(1 << n, dtype=np.uint32)
    return TruthTable(n, popcount_parity(x & np.uint32(omega)) ^ np.uint8(a0))


def make_linear(n: int, omega: int) -> TruthTable:
    return make_affine(n, omega, 0)


def make_bent(n: int) -> TruthTable:
    """Inner-product function ``x1 x2 + x3 x4 + ... + x_{n-1} x_n``."""
    if n % 2 or n < 2:
        raise ValueError(f"bent functions need an even n >= 2, got {n}")
    _check_n(n)
    x = np.arange(1 << n, dtype=np.uint32)
    odd = x & np.uint32(0x55555555 & ((1 << n) - 1))
    even = (x >> 1) & np.uint32(0x55555555 & ((1 << n) - 1))
    return TruthTable(n, popcount_parity(odd & even))


def max_planted_distance(n: int) -> int:
    """Largest flip count for which the planted distance is the nonlinearity.

    After ``k`` flips every other affine function is still at distance
    ``>= 2**(n-1) - k``, which is ``>= k`` as long as ``k <= 2**(n-2)``.
    """
    return (1 << n) >> 2


def plant_distance(n: int, omega: int, a0: int, k: int, rng: np.random.Generator) -> TruthTable:
    """Flip ``k`` distinct random entries of an affine function.

    The result has nonlinearity exactly ``k``.
    """
    if not 0 <= k <= max_planted_distance(n):
        raise ValueError(f"k={k} outside [0, {max_planted_distance(n)}] for n={n}")
    base = make_affine(n, omega, a0)
    bits = base.bits.copy()
    if k:
        flips = rng.choice(1 << n, size=k, replace=False)
        bits[flips] ^= 1
    return TruthTable(n, bits)


def random_function(n: int, rng: np.random.Generator) -> TruthTable:
    _check_n(n)
    return TruthTable(n, rng.integers(0, 2, size=1 << n, dtype=np.uint8))


def affine_functions(n: int):
    """Yield ``(omega, a0, table)`` for all ``2**(n+1)`` affine functions."""
    for omega in range(1 << n):
        for a0 in (0, 1):
            yield omega, a0, make_affine(n, omega, a0)


# --- file formats -----------------------------------------------------------

def to_hex(f: TruthTable) -> str:
    """Hex digits of the integer ``sum(bits[i] << i)``, zero padded.

    The last hex digit is the least significant nibble and holds entries 0..3.
    """
    digits = max(1, (1 << f.n) // 4)
    value = int.from_bytes(np.packbits(f.bits, bitorder="little").tobytes(), "little")
    return format(value, f"0{digits}x")


def from_hex(n: int, text: str) -> TruthTable:
    _check_n(n)
    text = text.strip().lower()
    if text.startswith("0x"):
        text = text[2:]
    digits = max(1, (1 << n) // 4)
    if len(text) != digits:
        raise ValueError(f"expected {digits} hex digits for n={n}, got {len(text)}")
    value = int(text, 16)
    if value >> (1 << n):
        raise ValueError("hex value has bits beyond the table length")
    raw = value.to_bytes(max(1, (1 << n) // 8), "little")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[: 1 << n]
    return TruthTable(n, bits)


def dumps_table(f: TruthTable) -> str:
    return f"n={f.n}\n{to_hex(f)}\n"


def loads_table(text: str) -> TruthTable:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) != 2 or not lines[0].startswith("n="):
        raise ValueError("truth table file needs an 'n=<int>' line followed by a hex line")
    try:
        n = int(lines[0][2:])
    except ValueError as exc:
        raise ValueError(f"bad header {lines[0]!r}") from exc
    return from_hex(n, lines[1])


def write_table(f: TruthTable, path) -> None:
    Path(path).write_text(dumps_table(f))


def read_table(path) -> TruthTable:
    return loads_table(Path(path).read_text())
