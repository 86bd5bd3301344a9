"""Checker and finite-model laboratory for the internal type theory of
cartesian fibrational virtual double categories."""

from .checker import (
    CheckError,
    RewriteConfig,
    Verdict,
    check_proterm,
    check_protype,
    check_term,
    check_term_eq,
    check_type,
    infer_proterm,
    infer_term,
    normalize_term,
    protype_equal,
)
from .isocalc import IsoJudgment, check_iso, elaborate_iso, ufd_translate
from .parser import parse_file, print_proterm, print_protype, print_term
from .rewrite import check_proterm_eq, normalize_proterm
from .session import Report, Session, run_file
from .syntax import (
    Context,
    Procontext,
    Protype,
    Proterm,
    Signature,
    Specification,
    Term,
    TermSubst,
    alpha_equal,
    free_vars,
    validate_signature,
)

__version__ = "0.1.0"
