"""Conflict-based clustering of Dempster-Shafer evidence with prototype-based
fast classification."""

from .core import (
    BPA,
    CombinationResult,
    Frame,
    FrameMismatchError,
    TotalConflictError,
    combine_all,
    conflict_between,
    conjunctive_combine,
    discount,
    make_bpa,
    vacuous,
)
from .partition import (
    Corpus,
    DomainPrior,
    NEW_SUBSET,
    Partition,
    SearchConfig,
    domain_conflict,
    evaluate_move,
    metaconflict,
    minimize_metaconflict,
)
from .metalevel import (
    FitsNowhereError,
    MetaEvidence,
    SpecificationReport,
    SpecRow,
    credibility,
    domain_delta,
    in_delta,
    out_delta,
    specify,
    specify_all,
)
from .prototypes import (
    PotentialPrototype,
    PrototypeModel,
    SubsetUnrepresentableError,
    build_model,
    nominate,
    select,
)
from .classifier import (
    Classification,
    classify,
    classify_stream,
    rejection_threshold,
)
from .generate import GenSpec, generate

__version__ = "0.1.0"
