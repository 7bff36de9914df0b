"""Java method-subset front end: lexing, parsing, simplification, relation graphs."""

from .lexer import LexError, Token, tokenize
from .parser import MethodSource, ParseError, find_methods, method_identity, parse_method
from .tree import (
    AstNode,
    CodeGraph,
    TreeFormatError,
    code_tokens,
    deserialize_tree,
    serialize_tree,
    simplify,
    to_code_graph,
)


def method_graph(source: str) -> CodeGraph:
    """Source text of one method -> relation graph of its simplified AST."""
    return to_code_graph(simplify(parse_method(source)))


__all__ = [
    "AstNode",
    "CodeGraph",
    "LexError",
    "MethodSource",
    "ParseError",
    "Token",
    "TreeFormatError",
    "code_tokens",
    "deserialize_tree",
    "find_methods",
    "method_graph",
    "method_identity",
    "parse_method",
    "serialize_tree",
    "simplify",
    "to_code_graph",
    "tokenize",
]
