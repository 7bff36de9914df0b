"""AST nodes, simplification, relation graphs and the tree exchange format."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .lexer import classify

# Token-less constructs that only group their children.
WRAPPER_CATEGORIES = frozenset(
    {
        "MethodBody",
        "FormalParameters",
        "Arguments",
        "ExpressionStatement",
        "ParenthesizedExpression",
        "ForInit",
        "ForUpdate",
        "Modifiers",
        "ThrowsClause",
    }
)

EMPTY_TOKEN = "\u2205"


class TreeFormatError(ValueError):
    pass


@dataclass
class AstNode:
    category: str
    token: str | None = None
    children: list[AstNode] = field(default_factory=list)
    id: int = 0

    def preorder(self):
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def size(self) -> int:
        return sum(1 for _ in self.preorder())

    def renumber(self) -> AstNode:
        for i, node in enumerate(self.preorder()):
            node.id = i
        return self

    def copy(self) -> AstNode:
        return AstNode(self.category, self.token, [c.copy() for c in self.children], self.id)

    def tokens(self) -> list[str]:
        return [n.token for n in self.preorder() if n.token is not None]

    def pretty(self, indent: int = 0) -> str:
        head = "  " * indent + self.category
        if self.token is not None:
            head += f" {self.token!r}"
        return "\n".join([head] + [c.pretty(indent + 1) for c in self.children])


def code_tokens(root: AstNode) -> list[str]:
    """Identifier, literal and operator tokens carried by the tree (keywords excluded)."""
    return [t for t in root.tokens() if classify(t) in ("identifier", "literal", "operator")]


def simplify(root: AstNode) -> AstNode:
    """Remove wrapper nodes and collapse token-less single-child chains.

    Returns a new tree; the input is left untouched. The root is never removed.
    """
    out = root.copy()
    changed = True
    while changed:
        out, changed = _simplify_pass(out, is_root=True)
    return out.renumber()


def _simplify_pass(node: AstNode, is_root: bool) -> tuple[AstNode, bool]:
    changed = False
    kids: list[AstNode] = []
    for child in node.children:
        child, c = _simplify_pass(child, is_root=False)
        changed |= c
        if child.token is None and child.category in WRAPPER_CATEGORIES:
            kids.extend(child.children)
            changed = True
        else:
            kids.append(child)
    node.children = kids
    if not is_root and node.token is None and len(node.children) == 1:
        return node.children[0], True
    return node, changed


def node_label(node: AstNode) -> str:
    if node.token is None:
        return node.category
    tok = node.token
    if tok[0] in "\"'":
        return "<str>"
    if tok[0].isdigit() or (tok[0] == "." and len(tok) > 1):
        return "<num>"
    return tok


@dataclass
class CodeGraph:
    nodes: list[str]
    adjacency: np.ndarray  # n x n, {0,1}, symmetric, unit diagonal

    def __post_init__(self):
        n = len(self.nodes)
        if n < 1:
            raise ValueError("a code graph needs at least one node")
        a = np.asarray(self.adjacency, dtype=np.uint8)
        if a.shape != (n, n):
            raise ValueError(f"adjacency shape {a.shape} does not match {n} nodes")
        self.adjacency = a

    def __len__(self) -> int:
        return len(self.nodes)

    @cached_property
    def row_normalized(self) -> np.ndarray:
        """Adjacency divided by row degree (self-loops included)."""
        a = self.adjacency.astype(np.float64)
        return a / a.sum(axis=1, keepdims=True)


def to_code_graph(root: AstNode) -> CodeGraph:
    order = list(root.preorder())
    index = {id(node): i for i, node in enumerate(order)}
    n = len(order)
    adj = np.eye(n, dtype=np.uint8)
    for node in order:
        i = index[id(node)]
        for child in node.children:
            j = index[id(child)]
            adj[i, j] = adj[j, i] = 1
    return CodeGraph([node_label(nd) for nd in order], adj)


def _escape(token: str | None) -> str:
    if token is None:
        return EMPTY_TOKEN
    out = token.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n").replace("\r", "\\r")
    if out == EMPTY_TOKEN:
        return "\\" + EMPTY_TOKEN
    return out


def _unescape(field_: str) -> str | None:
    if field_ == EMPTY_TOKEN:
        return None
    out, i = [], 0
    while i < len(field_):
        ch = field_[i]
        if ch == "\\" and i + 1 < len(field_):
            nxt = field_[i + 1]
            out.append({"t": "\t", "n": "\n", "r": "\r"}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def serialize_tree(root: AstNode) -> str:
    root = root.copy().renumber()
    lines = []
    for node in root.preorder():
        kids = " ".join(str(c.id) for c in node.children)
        lines.append(f"{node.id}\t{node.category}\t{_escape(node.token)}\t{kids}")
    return "\n".join(lines) + "\n"


def deserialize_tree(text: str) -> AstNode:
    """Parse the tab-separated exchange format; node 0 is the root."""
    rows: dict[int, tuple[str, str | None, list[int]]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise TreeFormatError(f"line {lineno}: expected 4 tab-separated fields, got {len(parts)}")
        try:
            nid = int(parts[0])
            kids = [int(k) for k in parts[3].split()]
        except ValueError as exc:
            raise TreeFormatError(f"line {lineno}: bad node id ({exc})") from None
        if not parts[1]:
            raise TreeFormatError(f"line {lineno}: empty category")
        if nid in rows:
            raise TreeFormatError(f"line {lineno}: duplicate node id {nid}")
        rows[nid] = (parts[1], _unescape(parts[2]), kids)

    if 0 not in rows:
        raise TreeFormatError("missing root node 0")
    parent: dict[int, int] = {}
    for nid, (_, _, kids) in rows.items():
        for k in kids:
            if k not in rows:
                raise TreeFormatError(f"node {nid} references unknown child {k}")
            if k == 0:
                raise TreeFormatError(f"node {nid} lists the root as a child (cycle)")
            if k in parent:
                raise TreeFormatError(f"node {k} has more than one parent (or a cycle)")
            parent[k] = nid

    nodes = {nid: AstNode(cat, tok, id=nid) for nid, (cat, tok, _) in rows.items()}
    seen = {0}
    stack = [0]
    while stack:
        nid = stack.pop()
        for k in rows[nid][2]:
            if k in seen:
                raise TreeFormatError(f"cycle through node {k}")
            seen.add(k)
            nodes[nid].children.append(nodes[k])
            stack.append(k)
    if len(seen) != len(rows):
        orphans = sorted(set(rows) - seen)
        raise TreeFormatError(f"nodes not reachable from root: {orphans[:10]}")
    return nodes[0]
