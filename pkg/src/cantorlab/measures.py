"""Probability measures on Cantor space with exact cylinder masses."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping

from .clopen import ClopenSet, product_mass
from .exact import RationalLike, as_rational, parse_rational
from .pairing import table_address, table_position

__all__ = [
    "MeasureSpec",
    "Bernoulli",
    "Uniform",
    "InterleavedTable",
    "Explicit",
    "DepthExceeded",
    "bernoulli",
    "uniform",
    "table",
    "explicit",
    "load_explicit",
    "mass",
    "clopen_mass",
    "distance",
    "table_position",
    "table_address",
]


class DepthExceeded(ValueError):
    """An explicit measure was queried below the depth it defines."""


def _check_bits(x: str) -> None:
    if any(c not in "01" for c in x):
        raise ValueError(f"not a binary string: {x!r}")


class MeasureSpec:
    """Base class. Subclasses implement :meth:`mass`; the rest is derived."""

    variant = "abstract"

    def mass(self, x: str) -> Fraction:
        raise NotImplementedError

    def clopen_mass(self, c: ClopenSet) -> Fraction:
        # generic fallback: sum over the canonical antichain
        return sum((self.mass(x) for x in c.antichain()), Fraction(0))

    def distance(self, a: ClopenSet, b: ClopenSet) -> Fraction:
        return self.clopen_mass(a ^ b)

    def describe(self) -> str:
        return self.variant


@dataclass(frozen=True)
class Bernoulli(MeasureSpec):
    """i.i.d. bits with P(bit = 1) = p."""

    p: Fraction

    def __post_init__(self):
        p = as_rational(self.p)
        if not 0 <= p <= 1:
            raise ValueError(f"bernoulli parameter must lie in [0,1], got {p}")
        object.__setattr__(self, "p", p)

    @property
    def variant(self) -> str:  # type: ignore[override]
        return "bernoulli"

    def mass(self, x: str) -> Fraction:
        _check_bits(x)
        ones = x.count("1")
        return self.p ** ones * (1 - self.p) ** (len(x) - ones)

    def clopen_mass(self, c: ClopenSet) -> Fraction:
        return product_mass(c, self.p)

    def describe(self) -> str:
        return f"bernoulli:{self.p.numerator}/{self.p.denominator}"


class Uniform(Bernoulli):
    def __init__(self):
        super().__init__(Fraction(1, 2))

    @property
    def variant(self) -> str:  # type: ignore[override]
        return "uniform"

    def describe(self) -> str:
        return "uniform"


class InterleavedTable(Uniform):
    """Uniform measure read as an infinite table of bits, row k = real ξ_k.

    The pairing is measure preserving, so cylinder masses are the uniform
    ones; the class only adds row/column addressing.
    """

    @property
    def variant(self) -> str:  # type: ignore[override]
        return "interleaved-real-table"

    def describe(self) -> str:
        return "table"

    position = staticmethod(table_position)
    address = staticmethod(table_address)

    def row_prefix(self, x: str, row: int) -> str:
        """The bits of real ``row`` that the input prefix x reveals, in order."""
        out = []
        col = 0
        while True:
            pos = table_position(row, col)
            if pos >= len(x):
                return "".join(out)
            out.append(x[pos])
            col += 1


@dataclass(frozen=True)
class Explicit(MeasureSpec):
    """Masses given on all strings of one depth.

    Shorter cylinders are sums. Longer cylinders raise DepthExceeded unless
    ``extend_uniform`` is set, in which case each depth-n cylinder's mass is
    spread uniformly over its extensions.
    """

    depth: int
    weights: Mapping[str, Fraction]
    extend_uniform: bool = False
    _prefix: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be non-negative")
        clean: dict[str, Fraction] = {}
        for x, w in self.weights.items():
            _check_bits(x)
            if len(x) != self.depth:
                raise ValueError(f"weight key {x!r} does not have length {self.depth}")
            w = as_rational(w)
            if w < 0:
                raise ValueError(f"negative mass for {x!r}")
            if w:
                clean[x] = w
        total = sum(clean.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"masses sum to {total}, not 1")
        object.__setattr__(self, "weights", clean)
        prefix: dict[str, Fraction] = {}
        for x, w in clean.items():
            for j in range(self.depth + 1):
                prefix[x[:j]] = prefix.get(x[:j], Fraction(0)) + w
        object.__setattr__(self, "_prefix", prefix)

    @property
    def variant(self) -> str:  # type: ignore[override]
        return "explicit"

    def mass(self, x: str) -> Fraction:
        _check_bits(x)
        n = self.depth
        if len(x) <= n:
            return self._prefix.get(x, Fraction(0))
        if not self.extend_uniform:
            raise DepthExceeded(f"explicit measure is defined to depth {n}, got |x| = {len(x)}")
        return self._prefix.get(x[:n], Fraction(0)) / (1 << (len(x) - n))

    def clopen_mass(self, c: ClopenSet) -> Fraction:
        if c.depth > self.depth and not self.extend_uniform:
            raise DepthExceeded(f"set has depth {c.depth} > {self.depth}")
        half = Fraction(1, 2)
        total = Fraction(0)
        for x, w in self.weights.items():
            total += w * product_mass(c.cofactor(x), half)
        return total

    def describe(self) -> str:
        return f"explicit(depth={self.depth})"


def bernoulli(p: RationalLike) -> Bernoulli:
    return Bernoulli(as_rational(p))


def uniform() -> Uniform:
    return Uniform()


def table() -> InterleavedTable:
    return InterleavedTable()


def explicit(depth: int, weights: Mapping[str, RationalLike], extend_uniform: bool = False) -> Explicit:
    return Explicit(depth, dict(weights), extend_uniform)


def load_explicit(path: str | Path, extend_uniform: bool = False) -> Explicit:
    """Read the text format: a depth line, then ``prefix mass`` lines.

    Blank lines and ``#`` comments are ignored. Strings not listed get mass 0.
    """
    lines = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines:
        raise ValueError(f"{path}: empty measure file")
    head = lines[0].split()
    if head[0] == "depth":
        head = head[1:]
    if len(head) != 1:
        raise ValueError(f"{path}: first line must be the depth")
    depth = int(head[0])
    weights: dict[str, Fraction] = {}
    for line in lines[1:]:
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}: bad line {line!r}")
        key = "" if parts[0] in ("-", "ε") else parts[0]
        if key in weights:
            raise ValueError(f"{path}: duplicate prefix {key!r}")
        weights[key] = parse_rational(parts[1])
    return Explicit(depth, weights, extend_uniform)


def all_strings(n: int):
    """All binary strings of length n in lexicographic order."""
    for bits in itertools.product("01", repeat=n):
        yield "".join(bits)


def mass(m: MeasureSpec, x: str) -> Fraction:
    return m.mass(x)


def clopen_mass(m: MeasureSpec, c: ClopenSet) -> Fraction:
    return m.clopen_mass(c)


def distance(m: MeasureSpec, a: ClopenSet, b: ClopenSet) -> Fraction:
    return m.distance(a, b)
