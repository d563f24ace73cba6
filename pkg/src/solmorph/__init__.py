"""Semantic-preserving Solidity transforms, bug injection, detector scoring.

The pipeline: parse vulnerability snippets, rewrite them with operators
that keep behavior intact (renames, operand permutation, if/loop
conversion, tx.origin passing), inject the variants at every compile-valid
member boundary of benign host contracts, and score external detectors'
false-negative ratio against the generated ground truth.
"""

__version__ = "0.1.0"

from .ast_nodes import (  # noqa: F401
    Assign,
    Binary,
    Block,
    Break,
    Call,
    ContractDef,
    Expression,
    ExprStmt,
    For,
    FunctionDef,
    Identifier,
    If,
    Index,
    Literal,
    MemberAccess,
    Param,
    RawExpr,
    RawRegion,
    RawStmt,
    Return,
    SourceUnit,
    Span,
    StateVarDecl,
    Statement,
    Unary,
    VarDecl,
    While,
)
from .idents import fresh_identifier  # noqa: F401
from .parser import ParseError, parse, parse_expression  # noqa: F401
from .printer import print_expr, print_stmt, print_unit  # noqa: F401
from .transform import (  # noqa: F401
    ForFillStyle,
    GROUP_TOKENS,
    InvalidChain,
    NotApplicable,
    OperatorId,
    Variant,
    applicable,
    apply_chain,
    enumerate_valid_chains,
    if_to_for,
    if_to_while,
    permute_commutative,
    permute_division,
    permute_ordering,
    permute_subtraction,
    rename_functions,
    rename_variables,
    swap_if_branches,
    tx_origin_passing,
)
