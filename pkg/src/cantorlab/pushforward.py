"""Image measures, pulled-back tests and certified gaps in closed images."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .clopen import ClopenSet, Membership, compose
from .exact import RationalLike, as_rational, pow2
from .layerwise import CauchyBitApprox, preimage_at_stage
from .measures import MeasureSpec
from .mltests import IncompatibleBounds, StagedTest

__all__ = [
    "ImageMassResult",
    "ImageMeasureOracle",
    "CertifiedDisjointCylinders",
    "PullbackTest",
    "image_mass",
    "image_measure",
    "level_for",
    "preimage_set",
    "pullback_test",
    "closed_image_complement",
]


@dataclass(frozen=True)
class ImageMassResult:
    value: Fraction
    error_bound: Fraction
    stage_used: int


def level_for(k: int, eps: Fraction) -> int:
    """Least i with k·4·2^-i <= eps."""
    i = 0
    while k * 4 * pow2(-i) > eps:
        i += 1
    return i


def image_mass(c: CauchyBitApprox, u: str, eps: RationalLike) -> ImageMassResult:
    """Q(uΩ) within eps, Q the image of the base measure.

    Each of the k = |u| bits read at stage i is wrong on mass at most 4·2^-i,
    so the stage-i preimage of uΩ is off by at most k·4·2^-i.
    """
    eps = as_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    k = len(u)
    if k == 0:
        return ImageMassResult(Fraction(1), Fraction(0), 0)
    i = level_for(k, eps)
    value = c.base_measure.clopen_mass(preimage_at_stage(c, u, i))
    return ImageMassResult(value, k * 4 * pow2(-i), i)


class ImageMeasureOracle:
    """``(u, eps) -> rational within eps of Q(uΩ)``, the computable-measure contract."""

    def __init__(self, c: CauchyBitApprox):
        self.map = c

    def __call__(self, u: str, eps: RationalLike) -> Fraction:
        return image_mass(self.map, u, eps).value

    def result(self, u: str, eps: RationalLike) -> ImageMassResult:
        return image_mass(self.map, u, eps)


def image_measure(c: CauchyBitApprox) -> ImageMeasureOracle:
    return ImageMeasureOracle(c)


def preimage_set(c: CauchyBitApprox, v: ClopenSet, i: int) -> ClopenSet:
    """Inputs whose stage-i output lies in the output clopen set v."""
    return compose(v, lambda k: c.approx(k, i))


class PullbackTest(StagedTest):
    """Input-space test from an output-space test.

    ``raw_stage(i, t)`` is the defect stage united with the stage-L preimage
    of ``v.stage(i, t)``, where L = i + defect.level_shift is the map stage
    the defect starts from. Level i is held back (empty) until t > L, so the
    defect already covers the change from stage L to L+1; this is what makes
    the raw stages nested in i. The published stages are
    ``raw_stage(i + shift, t)`` with ``shift`` the least renumbering the
    exact mass audit accepts.
    """

    def __init__(self, c: CauchyBitApprox, defect: StagedTest, v: StagedTest, shift: int, audit):
        self.map = c
        self.defect = defect
        self.v = v
        self.shift = shift
        self.audit = audit  # {(i, t): raw mass} examined while choosing the shift
        self._raw: dict[tuple[int, int], ClopenSet] = {}
        super().__init__(lambda i, t: self.raw_stage(i + shift, t), None, False, f"pullback({c.name})")

    def raw_stage(self, i: int, t: int) -> ClopenSet:
        key = (i, t)
        hit = self._raw.get(key)
        if hit is None:
            level = i + self.defect.level_shift
            if t <= level:
                hit = ClopenSet.empty()
            else:
                hit = self.defect.stage(i, t) | preimage_set(self.map, self.v.stage(i, t), level)
            self._raw[key] = hit
        return hit


def pullback_test(
    c: CauchyBitApprox,
    defect: StagedTest,
    v: StagedTest,
    audit_levels: int = 6,
    audit_time: int = 20,
    max_shift: int = 32,
    measure: Optional[MeasureSpec] = None,
) -> PullbackTest:
    """Pull v back through the map and renumber by an audited constant.

    The shift is the least r with ``mass(raw_stage(i + r, t)) <= 2^-i`` for
    all 1 <= i <= audit_levels and t <= audit_time, computed exactly under
    the base measure. Raises IncompatibleBounds when v's bound is not 2^-i
    and ValueError if no shift up to max_shift passes.
    """
    if not v.has_standard_bound():
        raise IncompatibleBounds(f"{v.name}: output test must have bound 2^-i")
    m = measure or c.base_measure
    probe = PullbackTest(c, defect, v, 0, {})
    audit: dict[tuple[int, int], Fraction] = {}

    def raw_mass(i: int, t: int) -> Fraction:
        if (i, t) not in audit:
            audit[(i, t)] = m.clopen_mass(probe.raw_stage(i, t))
        return audit[(i, t)]

    for r in range(max_shift + 1):
        if all(raw_mass(i + r, t) <= pow2(-i) for i in range(1, audit_levels + 1) for t in range(audit_time + 1)):
            out = PullbackTest(c, defect, v, r, audit)
            out._raw = probe._raw
            return out
    raise ValueError(f"no renumbering up to {max_shift} brings the pulled-back masses under 2^-i")


@dataclass(frozen=True)
class CertifiedDisjointCylinders:
    depth_searched: int
    cylinders: tuple[str, ...]
    stage: int = 0
    output_depth: int = 0


def closed_image_complement(
    c: CauchyBitApprox, r_complement: ClopenSet, i: int, m: int, n: int
) -> CertifiedDisjointCylinders:
    """Output cylinders of length m certified to miss the stage-i image of R.

    R is the complement of ``r_complement``. A depth-n input cylinder that is
    not inside r_complement meets R; it excludes an output v only if some
    bit k < m is determined on the whole cylinder and differs from v_k. A v
    excluded by every such cylinder is certified. Sound, and monotone in n;
    complete only as n grows.
    """
    stages = [c.approx(k, i) for k in range(m)]
    reachable: set[str] = set()
    for bits in itertools.product("01", repeat=n):
        x = "".join(bits)
        if r_complement.contains(x) is Membership.INSIDE:
            continue
        options = []
        for s in stages:
            mem = s.contains(x)
            if mem is Membership.UNDETERMINED:
                options.append("01")
            else:
                options.append("1" if mem is Membership.INSIDE else "0")
        for out in itertools.product(*options):
            reachable.add("".join(out))
        if len(reachable) == 1 << m:
            break
    certified = tuple(v for v in ("".join(b) for b in itertools.product("01", repeat=m)) if v not in reachable)
    return CertifiedDisjointCylinders(n, certified, i, m)
