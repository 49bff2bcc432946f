"""Strong simulation, tree counterexamples and assume-guarantee abstraction
refinement for labeled probabilistic transition systems."""

from .agar import AgarResult, agar2, agar_n
from .cex import StochasticTree, build_cex, check_exec_map, lift_tree, subtree
from .compose import ComposedLpts, Provenance, compose, compose_all, product_dist, project, widen_alphabet
from .core import Dist, Lpts, LptsKind, Transition, Violation, classify, complete_spec, dirac, mass, validate
from .parse import CexDocument, ModelError, ModelFile, cex_document, emit_cex, format_model, load_cex, parse_model
from .refine import CegarResult, Partition, RefinementOutcome, analyze_and_refine, cegar, quotient
from .simulate import (
    RemovalRecord,
    SimRelation,
    coarsest_simulation,
    dist_leq,
    holds,
    tree_simulation,
    witness_subset,
)

__version__ = "0.1.0"
