"""Finite relational structures, Fraisse classes and quantifier-free interpretations."""

from .catalog import get_class, op_witness, parse_class
from .classes import Builtin, ClassSpec, Forbidden, check_axiom, enumerate_members, is_member
from .constructions import (
    EncodingResult,
    Interpretation,
    chain_gap,
    code_order,
    encode_society,
    lift_arity,
    one_sort_back,
    one_sort_forward,
    order_expansion,
    product_structure,
    remove_cliques,
    search_interpretation,
    verify_witness,
)
from .generic import BudgetExceeded, build_generic, ramsey_witness_search, verify_extension_property
from .hf import hf_encode
from .logic import QFFormula, evaluate, parse_formula
from .structures import (
    Embedding,
    RelationSymbol,
    Signature,
    Structure,
    are_isomorphic,
    canonical_form,
    enumerate_embeddings,
)

__version__ = "0.1.0"
