"""Independent verification of transform soundness.

Two routes: a small-domain interpreter with exhaustive sweeps for the
expression rewrites, and normalized control-flow-graph isomorphism for the
statement rewrites. Both are deliberately independent of the transform
engine; they evaluate or compare whatever they are handed.
"""

from .interp import (  # noqa: F401
    DIV_BY_ZERO,
    OVERFLOW,
    TYPE_ERROR,
    EvalEnv,
    Signal,
    UnboundIdentifier,
    UnsupportedExpression,
    eval_expr,
)
from .sweep import (  # noqa: F401
    KERNEL,
    DomainTooLarge,
    EquivalenceResult,
    abstract_pair,
    check_rewrite_pair,
    equivalent_exprs,
)
from .cfg import (  # noqa: F401
    Cfg,
    RawEncountered,
    build_cfg,
    cfg_equal,
    normalize_cfg,
)
