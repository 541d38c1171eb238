"""Exact finite-stage toolkit for layerwise computable maps on Cantor space."""

from .clopen import ClopenSet, Membership, boolean_op, canonicalize, contains, refine_to_depth
from .couplings import Relation, class_witness, check_conditions, preimage_cylinder, solve_coupling
from .layerwise import (
    CauchyBitApprox,
    ModulusMachine,
    TotalMonotoneMap,
    agreement_defect,
    combine_bits,
    defect_test,
    evaluate,
    from_machine,
    from_total,
    machine_to_cauchy,
    to_machine,
)
from .measures import MeasureSpec, bernoulli, clopen_mass, distance, explicit, mass, table, uniform
from .mltests import StagedTest, check_stage_bounds, combine_diagonal, deficiency_lower_bound
from .pushforward import closed_image_complement, image_mass, image_measure, pullback_test

__version__ = "0.1.0"

__all__ = [
    "agreement_defect",
    "bernoulli",
    "boolean_op",
    "canonicalize",
    "CauchyBitApprox",
    "check_conditions",
    "check_stage_bounds",
    "class_witness",
    "clopen_mass",
    "ClopenSet",
    "closed_image_complement",
    "combine_bits",
    "combine_diagonal",
    "contains",
    "defect_test",
    "deficiency_lower_bound",
    "distance",
    "evaluate",
    "explicit",
    "from_machine",
    "from_total",
    "image_mass",
    "image_measure",
    "machine_to_cauchy",
    "mass",
    "MeasureSpec",
    "Membership",
    "ModulusMachine",
    "preimage_cylinder",
    "pullback_test",
    "refine_to_depth",
    "Relation",
    "solve_coupling",
    "StagedTest",
    "table",
    "to_machine",
    "TotalMonotoneMap",
    "uniform",
]
