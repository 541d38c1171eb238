"""Layerwise computable maps in three representations.

* :class:`CauchyBitApprox` -- per output bit k a sequence of clopen sets
  ``C^k_i`` with ``d(C^k_i, C^k_{i+1}) <= 2^-(i + rate(k))``; the bit is the
  limit membership.
* :class:`ModulusMachine` -- a rewritable output tape observed as
  ``cell(k, t)`` (inputs whose cell k holds 1 at time t) together with a
  modulus ``N(k, eps)`` after which the cell changes with probability <= eps.
* :class:`TotalMonotoneMap` -- a monotone prefix map ``emit``.

Conversions follow the usual constructions: a machine runs the Cauchy
stages as lookup tables, a Cauchy approximation is read off a machine at
modulus times, and a total map is enumerated until the unresolved part of
the input space is small.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Union

from .clopen import ClopenSet, Membership
from .exact import pow2
from .measures import MeasureSpec
from .mltests import StagedTest

__all__ = [
    "CauchyBitApprox",
    "ModulusMachine",
    "TotalMonotoneMap",
    "TotalApproximation",
    "EvalResult",
    "BudgetExhausted",
    "bit_view",
    "combine_bits",
    "from_total",
    "total_to_cauchy",
    "from_machine",
    "to_machine",
    "machine_to_cauchy",
    "evaluate",
    "agreement_defect",
    "defect_test",
    "preimage_at_stage",
    "stage_distance",
]


class BudgetExhausted(RuntimeError):
    """Raised only by conversions that cannot return a partial result."""

    def __init__(self, message: str, deficit: Fraction):
        super().__init__(message)
        self.deficit = deficit


class CauchyBitApprox:
    """Per-bit Cauchy sequences of clopen sets.

    ``approx(k, i)`` returns ``C^k_i``. ``rate(k)`` is extra precision: bit k
    satisfies ``d(C^k_i, C^k_{i+1}) <= 2^-(i + rate(k))`` (default 0, the
    plain ``2^-i`` normalization). ``n_bits`` is None for infinitely many
    output bits. ``total_weight`` bounds ``Σ_k 2^-rate(k)`` and is computed
    when ``n_bits`` is finite.
    """

    def __init__(
        self,
        approx: Callable[[int, int], ClopenSet],
        base_measure: MeasureSpec,
        n_bits: Optional[int] = None,
        rate: Optional[Callable[[int], int]] = None,
        total_weight: Optional[Fraction] = None,
        name: str = "map",
    ):
        self._approx = approx
        self.base_measure = base_measure
        self.n_bits = n_bits
        self._rate = rate or (lambda k: 0)
        self.name = name
        if total_weight is None and n_bits is not None:
            total_weight = sum((pow2(-self._rate(k)) for k in range(n_bits)), Fraction(0))
        self.total_weight = total_weight
        self._cache: dict[tuple[int, int], ClopenSet] = {}

    def _check_bit(self, k: int) -> None:
        if k < 0 or (self.n_bits is not None and k >= self.n_bits):
            raise IndexError(f"{self.name} has no output bit {k}")

    def approx(self, k: int, i: int) -> ClopenSet:
        self._check_bit(k)
        if i < 0:
            raise ValueError("stage must be non-negative")
        key = (k, i)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._approx(k, i)
            self._cache[key] = hit
        return hit

    def rate(self, k: int) -> int:
        return self._rate(k)

    def bits(self, count: int) -> range:
        if self.n_bits is not None:
            count = min(count, self.n_bits)
        return range(count)

    def __repr__(self) -> str:
        return f"CauchyBitApprox({self.name!r}, bits={self.n_bits})"


def stage_distance(c: CauchyBitApprox, k: int, i: int) -> Fraction:
    """``d(C^k_i, C^k_{i+1})`` under the base measure."""
    return c.base_measure.distance(c.approx(k, i), c.approx(k, i + 1))


def bit_view(c: CauchyBitApprox, k: int) -> CauchyBitApprox:
    """Output bit k of ``c`` as a one-bit map."""
    c._check_bit(k)
    return CauchyBitApprox(
        lambda _k, i: c.approx(k, i), c.base_measure, 1, lambda _k: c.rate(k), name=f"{c.name}[{k}]"
    )


def combine_bits(
    per_bit: Union[Sequence[CauchyBitApprox], Callable[[int], CauchyBitApprox]],
    name: str = "combined",
) -> CauchyBitApprox:
    """Multi-bit map whose bit k is bit 0 of ``per_bit[k]`` taken at stage i+k+1.

    The shift makes bit k converge at rate ``k + 1 + rate_k``, so the
    per-bit defect bounds sum to at most the single-bit bound.
    """
    if callable(per_bit):
        get, count = per_bit, None
    else:
        seq = list(per_bit)
        if not seq:
            raise ValueError("need at least one bit")
        get, count = seq.__getitem__, len(seq)
    base = get(0).base_measure
    if count is not None:
        for k in range(count):
            if get(k).base_measure != base:
                raise ValueError("all bits must share the base measure")

    def approx(k: int, i: int) -> ClopenSet:
        ck = get(k)
        if ck.base_measure != base:
            raise ValueError("all bits must share the base measure")
        return ck.approx(0, i + k + 1)

    def rate(k: int) -> int:
        return k + 1 + get(k).rate(0)

    weight = Fraction(1) if count is None else None  # Σ_k 2^-(k+1) <= 1
    return CauchyBitApprox(approx, base, count, rate, weight, name)


# evaluation and defects -----------------------------------------------------

@dataclass(frozen=True)
class EvalResult:
    bits: tuple[Optional[int], ...]
    certificate: Fraction  # per-bit bound on the mass where a reported bit is wrong

    @property
    def total_certificate(self) -> Fraction:
        return self.certificate * len(self.bits)

    def as_string(self) -> str:
        return "".join("?" if b is None else str(b) for b in self.bits)


def evaluate(c: CauchyBitApprox, x: str, i: int, n_bits: int) -> EvalResult:
    """Read bits ``k < n_bits`` off stage i at input prefix x.

    A bit is reported when membership of xΩ in ``C^k_i`` is determined and
    left as None otherwise.
    """
    out: list[Optional[int]] = []
    for k in c.bits(n_bits):
        mem = c.approx(k, i).contains(x)
        out.append(None if mem is Membership.UNDETERMINED else int(mem is Membership.INSIDE))
    return EvalResult(tuple(out), 4 * pow2(-i))


def agreement_defect(c: CauchyBitApprox, k: int, i: int, horizon: int) -> ClopenSet:
    """``∪_{i <= j < horizon} C^k_j △ C^k_{j+1}``.

    Its mass is at most ``Σ_{j>=i} 2^-j = 2·2^-i``, inside the 4·2^-i budget.
    """
    if horizon < i:
        raise ValueError("horizon must be at least the level")
    out = ClopenSet.empty()
    for j in range(i, horizon):
        out = out | (c.approx(k, j) ^ c.approx(k, j + 1))
    return out


def defect_test(c: CauchyBitApprox, shift: Optional[int] = None, name: Optional[str] = None) -> StagedTest:
    """The agreement defects of all bits as a test.

    ``stage(i, t) = ∪_k agreement_defect(c, k, i + shift, max(i + shift, t))``
    (bits k <= t when there are infinitely many). Its mass is at most
    ``2·2^-(i+shift)·total_weight``; by default ``shift`` is the least value
    making that ``<= 2^-i``, and the declared bound is then ``2^-i``.
    """
    weight = c.total_weight
    if weight is None:
        raise ValueError(f"{c.name}: per-bit rates are not summable; combine the bits first")
    if shift is None:
        shift = 0
        while 2 * weight > (1 << shift):
            shift += 1

    def stage(i: int, t: int) -> ClopenSet:
        lvl = i + shift
        horizon = max(lvl, t)
        top = c.n_bits if c.n_bits is not None else t + 1
        out = ClopenSet.empty()
        for k in range(top):
            out = out | agreement_defect(c, k, lvl, horizon)
        return out

    declared = 2 * weight * pow2(-shift)

    def bound(i: int) -> Fraction:
        return pow2(-i) if declared <= 1 else declared * pow2(-i)

    return StagedTest(stage, bound, False, name or f"defect({c.name})", level_shift=shift)


def preimage_at_stage(c: CauchyBitApprox, u: str, i: int) -> ClopenSet:
    """Inputs whose stage-i bits 0..|u|-1 spell u (the stage-i preimage of uΩ)."""
    out = ClopenSet.full()
    for k, b in enumerate(u):
        s = c.approx(k, i)
        out = out & (s if b == "1" else ~s)
        if out.is_empty:
            break
    return out


# modulus machines ------------------------------------------------------------

def _finish(k: int, n: int) -> int:
    # stages are run in diagonal order (k, n) with k + n = 0, 1, 2, ...
    d = k + n
    return d * (d + 1) // 2 + k + 1


class ModulusMachine:
    """Observable behaviour of a machine with a rewritable output tape.

    ``cell(k, t)`` is the clopen set of inputs on which cell k holds 1 at
    time t (cells not yet written read as 0). ``modulus(k, eps)`` is a time
    after which cell k changes with base-measure probability at most eps.
    """

    def __init__(
        self,
        cell: Callable[[int, int], ClopenSet],
        modulus: Callable[[int, Fraction], int],
        base_measure: MeasureSpec,
        n_bits: Optional[int] = None,
        touched: Optional[Callable[[int], Iterable[int]]] = None,
        name: str = "machine",
    ):
        self._cell = cell
        self._modulus = modulus
        self.base_measure = base_measure
        self.n_bits = n_bits
        self._touched = touched
        self.name = name
        self._cache: dict[tuple[int, int], ClopenSet] = {}

    def cell(self, k: int, t: int) -> ClopenSet:
        key = (k, t)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._cell(k, t)
            self._cache[key] = hit
        return hit

    def modulus(self, k: int, eps: Fraction) -> int:
        eps = Fraction(eps)
        if eps <= 0:
            raise ValueError("eps must be positive")
        return self._modulus(k, eps)

    def touched(self, t: int) -> list[int]:
        """Cells that may have been written by time t."""
        if self._touched is not None:
            return list(self._touched(t))
        return list(range(self.n_bits or 0))

    def step(self, x: str, t: int) -> dict[int, int]:
        """Cell values at time t that the input prefix x already determines."""
        out = {}
        for k in self.touched(t):
            mem = self.cell(k, t).contains(x)
            if mem is not Membership.UNDETERMINED:
                out[k] = int(mem is Membership.INSIDE)
        return out

    @classmethod
    def from_step(
        cls,
        step: Callable[[str, int], dict[int, int]],
        modulus: Callable[[int, Fraction], int],
        base_measure: MeasureSpec,
        n_bits: int,
        name: str = "machine",
    ) -> "ModulusMachine":
        """Wrap a raw step function.

        A machine has read at most t input bits by time t, so cell(k, t) is
        recovered by scanning prefixes up to length t; a cell not reported at
        length t has not been written and reads 0.
        """

        def cell(k: int, t: int) -> ClopenSet:
            hits: list[str] = []
            stack = [""]
            while stack:
                x = stack.pop()
                val = step(x, t).get(k)
                if val is not None:
                    if val:
                        hits.append(x)
                    continue
                if len(x) < t:
                    stack.extend((x + "1", x + "0"))
            return ClopenSet.from_strings(hits)

        return cls(cell, modulus, base_measure, n_bits, name=name)


def _level_for(eps: Fraction) -> int:
    n = 0
    while pow2(-n) > eps:
        n += 1
    return n


def to_machine(c: CauchyBitApprox) -> ModulusMachine:
    """Run the Cauchy stages as lookup tables.

    Stage n of bit k completes at time ``finish(k, n)``; from then on cell k
    shows membership in ``C^k_n``. ``modulus(k, 2^-n)`` is the time at which
    stage n+1 completes: later values are ``C^k_m`` with m >= n+1, which
    differ from ``C^k_{n+1}`` on mass at most ``Σ_{m>n} 2^-m = 2^-n``.
    """

    def cell(k: int, t: int) -> ClopenSet:
        if c.n_bits is not None and k >= c.n_bits:
            return ClopenSet.empty()
        n = -1
        while _finish(k, n + 1) <= t:
            n += 1
        return ClopenSet.empty() if n < 0 else c.approx(k, n)

    def modulus(k: int, eps: Fraction) -> int:
        return _finish(k, _level_for(eps) + 1)

    def touched(t: int) -> list[int]:
        out = []
        k = 0
        while _finish(k, 0) <= t and (c.n_bits is None or k < c.n_bits):
            out.append(k)
            k += 1
        return out

    return ModulusMachine(cell, modulus, c.base_measure, c.n_bits, touched, name=f"machine({c.name})")


def from_machine(mm: ModulusMachine, k: int, i: int) -> ClopenSet:
    """The tape read at time ``N(k, 2^-i)``: within 2^-i of the limit bit."""
    return mm.cell(k, mm.modulus(k, pow2(-i)))


def machine_to_cauchy(mm: ModulusMachine) -> CauchyBitApprox:
    """``C^k_i = from_machine(mm, k, i + 1)``.

    Consecutive stages are then within ``2^-(i+1) + 2^-(i+2) < 2^-i``.
    """
    return CauchyBitApprox(
        lambda k, i: from_machine(mm, k, i + 1), mm.base_measure, mm.n_bits, name=f"cauchy({mm.name})"
    )


# total monotone maps ----------------------------------------------------------

class TotalMonotoneMap:
    """A prefix map: ``emit(x)`` is the output determined by input prefix x."""

    def __init__(self, emit: Callable[[str], str], name: str = "total"):
        self._emit = emit
        self.name = name

    def emit(self, x: str) -> str:
        return self._emit(x)

    def __call__(self, x: str) -> str:
        return self._emit(x)


@dataclass(frozen=True)
class TotalApproximation:
    clopen: ClopenSet
    deficit: Fraction  # mass of inputs where bit k is still unresolved
    complete: bool  # deficit <= 2^-i was reached within budget
    steps: int

    @property
    def status(self) -> str:
        return "ok" if self.complete else "budget-exhausted"


def from_total(f: TotalMonotoneMap, m: MeasureSpec, k: int, i: int, budget: int) -> TotalApproximation:
    """Enumerate inputs until bit k is resolved outside mass 2^-i.

    Prefixes are expanded heaviest first; each call of ``emit`` costs one
    step. Expansion stops once the unresolved mass drops below 2^-i and no
    prefix of the current weight is pending, so equally heavy prefixes are
    treated alike. The returned set collects the cylinders on which bit k
    is 1; its indicator agrees with the bit except on the unresolved
    remainder.
    """
    target = pow2(-i)
    ones: list[str] = []
    unresolved = Fraction(1)  # total mass left in the heap
    counter = itertools.count()
    heap = [(-Fraction(1), next(counter), "")]
    steps = 0
    last = None  # weight of the prefix expanded last (negated)
    while heap and steps < budget and (unresolved >= target or heap[0][0] == last):
        neg, _, x = heapq.heappop(heap)
        last = neg
        steps += 1
        out = f.emit(x)
        if len(out) > k:
            unresolved += neg
            if out[k] == "1":
                ones.append(x)
            continue
        for b in "01":
            w = m.mass(x + b)
            if w:  # null cylinders never matter
                heapq.heappush(heap, (-w, next(counter), x + b))
    return TotalApproximation(ClopenSet.from_strings(ones), unresolved, unresolved <= target, steps)


def total_to_cauchy(f: TotalMonotoneMap, m: MeasureSpec, budget: int, n_bits: Optional[int] = None) -> CauchyBitApprox:
    """Cauchy stages ``C^k_i = from_total(f, m, k, i + 1)``.

    Raises BudgetExhausted when a stage cannot be completed.
    """

    def approx(k: int, i: int) -> ClopenSet:
        res = from_total(f, m, k, i + 1, budget)
        if not res.complete:
            raise BudgetExhausted(f"bit {k}, stage {i}: budget {budget} exhausted", res.deficit)
        return res.clopen

    return CauchyBitApprox(approx, m, n_bits, name=f"cauchy({f.name})")
