"""permutab: finite algebras, relations and categories, checked exhaustively."""

from __future__ import annotations

from .algebra import Algebra, FiniteMap, Identity, IdentitySet, Signature, check_identities, check_identity
from .catfin import FinCategory, groupoidify, validate_category
from .config import Limits
from .documents import Document
from .errors import CapExceeded, InconsistencyError, PermutabError
from .maltsev import find_hm_terms, hagemann_check, permutability_degree
from .paperlab import load_fixture, verify_paper
from .relcalc import BinRelation
from .report import Report, Status
from .search import SearchSpec, enumerate_models, find_model

__version__ = "0.1.0"

__all__ = [
    "Algebra",
    "BinRelation",
    "CapExceeded",
    "Document",
    "FinCategory",
    "FiniteMap",
    "Identity",
    "IdentitySet",
    "InconsistencyError",
    "Limits",
    "PermutabError",
    "Report",
    "SearchSpec",
    "Signature",
    "Status",
    "check_identities",
    "check_identity",
    "enumerate_models",
    "find_hm_terms",
    "find_model",
    "groupoidify",
    "hagemann_check",
    "load_fixture",
    "permutability_degree",
    "validate_category",
    "verify_paper",
]
