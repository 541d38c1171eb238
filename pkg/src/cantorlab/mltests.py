"""Martin-Löf tests as staged enumerations of clopen sets.

A test is given intensionally by ``stage(i, t)``: the part of the i-th
effectively open set enumerated by time t. The three invariants checked by
:func:`check_stage_bounds` are growth in t, nesting in i and the mass bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence, Union

from .clopen import ClopenSet, Membership
from .exact import pow2
from .measures import MeasureSpec

__all__ = [
    "StagedTest",
    "IncompatibleBounds",
    "Violation",
    "StageReport",
    "check_stage_bounds",
    "combine_diagonal",
    "deficiency_lower_bound",
    "shifted",
    "empty_test",
    "full_test",
    "constant_prefix_test",
    "cylinder_test",
]

StageFn = Callable[[int, int], ClopenSet]


class IncompatibleBounds(ValueError):
    """A construction needs bound(i) = 2^-i and was given something else."""


def default_bound(i: int) -> Fraction:
    return pow2(-i)


class StagedTest:
    """A test ``(U_i)`` with enumeration stages ``stage(i, t)``.

    ``stage_fn`` must be pure; results are memoized.
    """

    def __init__(
        self,
        stage_fn: StageFn,
        bound: Callable[[int], Fraction] | None = None,
        declared_measure_computable: bool = False,
        name: str = "test",
        level_shift: int = 0,
    ):
        self._stage_fn = stage_fn
        # for defect tests of maps: level i reads map stages from i + level_shift on
        self.level_shift = level_shift
        self._bound = bound or default_bound
        self.declared_measure_computable = declared_measure_computable
        self.name = name
        self._cache: dict[tuple[int, int], ClopenSet] = {}

    def stage(self, i: int, t: int) -> ClopenSet:
        key = (i, t)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._stage_fn(i, t)
            if not isinstance(hit, ClopenSet):
                raise TypeError(f"{self.name}: stage({i},{t}) returned {type(hit).__name__}")
            self._cache[key] = hit
        return hit

    def bound(self, i: int) -> Fraction:
        return Fraction(self._bound(i))

    def has_standard_bound(self, levels: int = 16) -> bool:
        """Whether bound(i) = 2^-i on levels 0..levels (the bound is opaque)."""
        return all(self.bound(i) == pow2(-i) for i in range(levels + 1))

    def __repr__(self) -> str:
        return f"StagedTest({self.name!r})"


@dataclass(frozen=True)
class Violation:
    kind: str  # "monotone", "nested" or "bound"
    i: int
    t: int
    detail: str


@dataclass
class StageReport:
    max_i: int
    max_t: int
    violations: list[Violation] = field(default_factory=list)
    masses: dict[tuple[int, int], Fraction] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def worst_ratio(self) -> Fraction:
        """max over the grid of mass(i, t) / bound(i)."""
        return max((m * (1 << i) for (i, _), m in self.masses.items()), default=Fraction(0))


def check_stage_bounds(test: StagedTest, m: MeasureSpec, max_i: int, max_t: int, min_i: int = 1) -> StageReport:
    """Check growth in t, nesting in i and the mass bound on the whole grid."""
    rep = StageReport(max_i, max_t)
    for i in range(min_i, max_i + 1):
        b = test.bound(i)
        for t in range(max_t + 1):
            s = test.stage(i, t)
            mass = m.clopen_mass(s)
            rep.masses[(i, t)] = mass
            if mass > b:
                rep.violations.append(Violation("bound", i, t, f"mass {mass} > {b}"))
            if t < max_t and not s.issubset(test.stage(i, t + 1)):
                rep.violations.append(Violation("monotone", i, t, f"stage({i},{t}) not inside stage({i},{t + 1})"))
            if i < max_i and not test.stage(i + 1, t).issubset(s):
                rep.violations.append(Violation("nested", i, t, f"stage({i + 1},{t}) not inside stage({i},{t})"))
    return rep


TestFamily = Union[Sequence[StagedTest], Callable[[int], StagedTest]]


def combine_diagonal(tests: TestFamily, name: str = "diagonal") -> StagedTest:
    """One test from many: ``U_i = ∪_k U^k_{i+k+1}``, truncated to k ≤ t.

    ``tests`` is a finite list or a function k -> test for an infinite
    family. The truncation costs nothing in the limit since stages only grow. Every input must have bound 2^-i; the combined bound is then
    Σ_k 2^-(i+k+1) ≤ 2^-i.
    """
    if callable(tests):
        get = tests
        count = None
    else:
        family = list(tests)
        get = family.__getitem__
        count = len(family)
        for k, tk in enumerate(family):
            if not tk.has_standard_bound():
                raise IncompatibleBounds(f"input {k} ({tk.name}) does not have bound 2^-i")

    def stage(i: int, t: int) -> ClopenSet:
        top = t if count is None else min(t, count - 1)
        out = ClopenSet.empty()
        for k in range(top + 1):
            tk = get(k)
            if count is None and not tk.has_standard_bound(levels=i + k + 1):
                raise IncompatibleBounds(f"input {k} does not have bound 2^-i")
            out = out | tk.stage(i + k + 1, t)
        return out

    computable = count is not None and all(get(k).declared_measure_computable for k in range(count))
    return StagedTest(stage, default_bound, computable, name)


def deficiency_lower_bound(test: StagedTest, x: str, time: int) -> int:
    """Largest i ≤ time with xΩ ⊆ stage(i, time), or 0.

    A sound lower bound on the deficiency of every extension of x.
    """
    best = 0
    for i in range(1, time + 1):
        s = test.stage(i, time)
        if s.contains(x) is Membership.INSIDE:
            best = i
    return best


def shifted(test: StagedTest, shift: int, name: str | None = None) -> StagedTest:
    """Renumbered test ``i -> U_{i+shift}`` (bound follows along)."""
    return StagedTest(
        lambda i, t: test.stage(i + shift, t),
        lambda i: test.bound(i + shift),
        test.declared_measure_computable,
        name or f"{test.name}+{shift}",
    )


# small building blocks ------------------------------------------------------

def empty_test() -> StagedTest:
    return StagedTest(lambda i, t: ClopenSet.empty(), declared_measure_computable=True, name="empty")


def full_test() -> StagedTest:
    """Every stage is Ω; violates the bound under any measure."""
    return StagedTest(lambda i, t: ClopenSet.full(), declared_measure_computable=True, name="full")


def constant_prefix_test(bit: str) -> StagedTest:
    """stage(i, t) = the cylinder of ``bit * i`` for every t."""
    if bit not in ("0", "1"):
        raise ValueError("bit must be '0' or '1'")
    return StagedTest(lambda i, t: ClopenSet.cylinder(bit * i), declared_measure_computable=True, name=f"{bit}^i")


def cylinder_test(fn: Callable[[int, int], list[str]], name: str = "cylinders", **kw) -> StagedTest:
    """Test whose stages are given as lists of strings."""
    return StagedTest(lambda i, t: ClopenSet.from_strings(fn(i, t)), name=name, **kw)
