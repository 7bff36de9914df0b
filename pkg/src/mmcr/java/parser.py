"""Recursive-descent parser for a Java method subset.

Supported: modifiers and marker annotations, primitive/reference/array types,
constructors, local variable declarations, expression statements, blocks,
if/else, for, enhanced for, while, do/while, return, break, continue, throw;
expressions with the usual Java precedence including assignment operators,
ternaries, casts, instanceof, method calls, field access, array indexing and
``new`` for objects and sized arrays.

Generics, lambdas, method references, anonymous classes, array
initializers, annotations with arguments, try/catch, switch and the like are
rejected with a ``ParseError`` naming the construct.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lexer import Token, tokenize
from .tree import AstNode

PRIMITIVES = frozenset({"boolean", "byte", "char", "short", "int", "long", "float", "double"})
MODIFIERS = frozenset(
    {"public", "protected", "private", "static", "final", "abstract", "synchronized",
     "native", "strictfp", "transient", "volatile", "default"}
)
ASSIGN_OPS = frozenset({"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="})
BINARY_PRECEDENCE = [
    ("||",),
    ("&&",),
    ("|",),
    ("^",),
    ("&",),
    ("==", "!="),
    ("<", ">", "<=", ">=", "instanceof"),
    ("<<", ">>", ">>>"),
    ("+", "-"),
    ("*", "/", "%"),
]
UNSUPPORTED_STATEMENTS = {
    "try": "try/catch",
    "catch": "try/catch",
    "finally": "try/catch",
    "switch": "switch",
    "case": "switch",
    "synchronized": "synchronized block",
    "class": "local class",
    "interface": "local interface",
    "enum": "local enum",
    "assert": "assert",
}


class ParseError(ValueError):
    def __init__(self, message: str, token: Token | None = None):
        if token is not None:
            line, col = token.position
            message = f"{message} at line {line}, column {col} (near {token.text!r})"
        else:
            message = f"{message} at end of input"
        super().__init__(message)


def unsupported(construct: str, token: Token | None) -> ParseError:
    return ParseError(f"unsupported construct: {construct}", token)


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    # -- token helpers ----------------------------------------------------

    def peek(self, k: int = 0) -> Token | None:
        j = self.i + k
        return self.tokens[j] if j < len(self.tokens) else None

    def at(self, text: str, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok is not None and tok.text == text and tok.kind != "literal"

    def at_kind(self, kind: str, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok is not None and tok.kind == kind

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok is None or tok.text != text or tok.kind == "literal":
            raise ParseError(f"expected {text!r}", tok)
        self.i += 1
        return tok

    def expect_identifier(self) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != "identifier":
            raise ParseError("expected identifier", tok)
        self.i += 1
        return tok

    # -- declarations -----------------------------------------------------

    def method(self) -> AstNode:
        for tok in self.tokens[self.i :]:
            if tok.text == "->":
                raise unsupported("lambda", tok)
            if tok.text == "::":
                raise unsupported("method reference", tok)

        modifiers = self.modifiers()
        if self.at("<"):
            raise unsupported("generic method", self.peek())
        children: list[AstNode] = []
        if modifiers.children:
            children.append(modifiers)

        if self.at_kind("identifier") and self.at("(", 1):
            category = "ConstructorDeclaration"
        else:
            category = "MethodDeclaration"
            if self.at("void"):
                children.append(AstNode("BasicType", self.next().text))
            else:
                children.append(self.type_())
        name = self.expect_identifier()
        children.append(self.formal_parameters())
        while self.at("["):
            self.next()
            self.expect("]")
            children.append(AstNode("Dimension"))
        if self.at("throws"):
            self.next()
            throws = AstNode("ThrowsClause", children=[self.reference_type()])
            while self.at(","):
                self.next()
                throws.children.append(self.reference_type())
            children.append(throws)
        if self.at(";"):
            self.next()
        else:
            children.append(AstNode("MethodBody", children=self.block_statements()))
        return AstNode(category, name.text, children)

    def modifiers(self) -> AstNode:
        node = AstNode("Modifiers")
        while True:
            tok = self.peek()
            if tok is None:
                break
            if tok.text == "@" and tok.kind == "separator":
                self.next()
                if self.at("interface"):
                    raise unsupported("annotation type", self.peek())
                name = self.expect_identifier()
                if self.at("("):
                    raise unsupported("annotation with arguments", self.peek())
                node.children.append(AstNode("Annotation", name.text))
            elif tok.kind == "keyword" and tok.text in MODIFIERS:
                node.children.append(AstNode("Modifier", self.next().text))
            else:
                break
        return node

    def formal_parameters(self) -> AstNode:
        self.expect("(")
        params = AstNode("FormalParameters")
        if not self.at(")"):
            while True:
                params.children.append(self.formal_parameter())
                if self.at(","):
                    self.next()
                    continue
                break
        self.expect(")")
        return params

    def formal_parameter(self) -> AstNode:
        kids = self.modifiers().children
        kids.append(self.type_())
        if self.at("..."):
            self.next()
            kids.append(AstNode("VarArgs"))
        name = self.expect_identifier()
        while self.at("["):
            self.next()
            self.expect("]")
            kids.append(AstNode("Dimension"))
        return AstNode("FormalParameter", name.text, kids)

    # -- types ------------------------------------------------------------

    def type_(self) -> AstNode:
        tok = self.peek()
        if tok is not None and tok.text in PRIMITIVES and tok.kind == "keyword":
            base = AstNode("BasicType", self.next().text)
        else:
            base = self.reference_type()
        dims = []
        while self.at("[") and self.at("]", 1):
            self.next()
            self.next()
            dims.append(AstNode("Dimension"))
        if dims:
            return AstNode("ArrayType", children=[base, *dims])
        return base

    def reference_type(self) -> AstNode:
        name = self.expect_identifier()
        root = node = AstNode("ReferenceType", name.text)
        while True:
            if self.at("<"):
                raise unsupported("generics", self.peek())
            if self.at(".") and self.at_kind("identifier", 1):
                self.next()
                sub = AstNode("ReferenceType", self.next().text)
                node.children.append(sub)
                node = sub
                continue
            break
        return root

    # -- statements -------------------------------------------------------

    def block_statements(self) -> list[AstNode]:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.peek() is None:
                raise ParseError("unterminated block")
            stmt = self.statement()
            if stmt is not None:
                stmts.append(stmt)
        self.expect("}")
        return stmts

    def statement(self) -> AstNode | None:
        tok = self.peek()
        if tok is None:
            raise ParseError("expected statement")
        text = tok.text
        if tok.kind == "separator":
            if text == "{":
                return AstNode("Block", children=self.block_statements())
            if text == ";":
                self.next()
                return None
            if text == "@":
                raise unsupported("annotated local declaration", tok)
        if tok.kind == "keyword":
            if text in UNSUPPORTED_STATEMENTS:
                raise unsupported(UNSUPPORTED_STATEMENTS[text], tok)
            if text == "if":
                return self.if_statement()
            if text == "while":
                self.next()
                cond = self.par_expression()
                return AstNode("WhileStatement", children=[cond, self.body()])
            if text == "do":
                self.next()
                body = self.body()
                self.expect("while")
                cond = self.par_expression()
                self.expect(";")
                return AstNode("DoStatement", children=[body, cond])
            if text == "for":
                return self.for_statement()
            if text == "return":
                self.next()
                kids = [] if self.at(";") else [self.expression()]
                self.expect(";")
                return AstNode("ReturnStatement", children=kids)
            if text in ("break", "continue"):
                self.next()
                label = None
                if self.at_kind("identifier"):
                    label = self.next().text
                self.expect(";")
                return AstNode("BreakStatement" if text == "break" else "ContinueStatement", label)
            if text == "throw":
                self.next()
                expr = self.expression()
                self.expect(";")
                return AstNode("ThrowStatement", children=[expr])
        if tok.kind == "identifier" and self.at(":", 1):
            raise unsupported("labeled statement", tok)
        if self.looks_like_declaration():
            decl = self.local_variable_declaration()
            self.expect(";")
            return decl
        expr = self.expression()
        self.expect(";")
        return AstNode("ExpressionStatement", children=[expr])

    def body(self) -> AstNode:
        stmt = self.statement()
        return stmt if stmt is not None else AstNode("Block")

    def if_statement(self) -> AstNode:
        self.expect("if")
        kids = [self.par_expression(), self.body()]
        if self.at("else"):
            self.next()
            kids.append(self.body())
        return AstNode("IfStatement", children=kids)

    def for_statement(self) -> AstNode:
        self.expect("for")
        self.expect("(")
        if self.looks_like_declaration():
            save = self.i
            kids = self.modifiers().children
            typ = self.type_()
            if self.at_kind("identifier") and self.at(":", 1):
                name = self.next()
                colon = self.next()
                iterable = self.expression()
                self.expect(")")
                var = AstNode("ForEachVariable", name.text, [*kids, typ])
                return AstNode("EnhancedForStatement", colon.text, [var, iterable, self.body()])
            self.i = save
            init = AstNode("ForInit", children=[self.local_variable_declaration()])
        else:
            init = AstNode("ForInit", children=self.expression_list(";"))
        self.expect(";")
        kids = [init]
        if not self.at(";"):
            kids.append(AstNode("ForCondition", children=[self.expression()]))
        self.expect(";")
        kids.append(AstNode("ForUpdate", children=self.expression_list(")")))
        self.expect(")")
        kids.append(self.body())
        return AstNode("ForStatement", children=kids)

    def expression_list(self, end: str) -> list[AstNode]:
        out = []
        if self.at(end):
            return out
        out.append(self.expression())
        while self.at(","):
            self.next()
            out.append(self.expression())
        return out

    def looks_like_declaration(self) -> bool:
        tok = self.peek()
        if tok is None:
            return False
        if tok.kind == "keyword":
            if tok.text == "final":
                return True
            return tok.text in PRIMITIVES and not self.at(".", 1)
        if tok.kind != "identifier":
            return False
        j = 1
        while self.at(".", j) and self.at_kind("identifier", j + 1):
            j += 2
        if self.at("<", j) and self.at_kind("identifier", j + 1) and (
            self.at(">", j + 2) or self.at(",", j + 2) or self.at("<", j + 2)
        ):
            raise unsupported("generics", self.peek(j))
        while self.at("[", j) and self.at("]", j + 1):
            j += 2
        return self.at_kind("identifier", j)

    def local_variable_declaration(self) -> AstNode:
        kids = self.modifiers().children
        kids.append(self.type_())
        while True:
            name = self.expect_identifier()
            decl = AstNode("VariableDeclarator", name.text)
            while self.at("["):
                self.next()
                self.expect("]")
                decl.children.append(AstNode("Dimension"))
            if self.at("="):
                eq = self.next()
                if self.at("{"):
                    raise unsupported("array initializer", self.peek())
                decl.children.append(AstNode("VariableInitializer", eq.text, [self.expression()]))
            kids.append(decl)
            if self.at(","):
                self.next()
                continue
            break
        return AstNode("LocalVariableDeclaration", children=kids)

    # -- expressions ------------------------------------------------------

    def par_expression(self) -> AstNode:
        self.expect("(")
        expr = self.expression()
        self.expect(")")
        return expr

    def expression(self) -> AstNode:
        lhs = self.ternary()
        tok = self.peek()
        if tok is not None and tok.kind == "operator" and tok.text in ASSIGN_OPS:
            self.next()
            rhs = self.expression()
            return AstNode("Assignment", tok.text, [lhs, rhs])
        return lhs

    def ternary(self) -> AstNode:
        cond = self.binary(0)
        if self.at("?"):
            q = self.next()
            then = self.expression()
            colon = self.expect(":")
            other = self.ternary()
            return AstNode("TernaryExpression", q.text, [cond, then, AstNode("TernaryElse", colon.text, [other])])
        return cond

    def binary(self, level: int) -> AstNode:
        if level == len(BINARY_PRECEDENCE):
            return self.unary()
        ops = BINARY_PRECEDENCE[level]
        lhs = self.binary(level + 1)
        while True:
            tok = self.peek()
            if tok is None or tok.text not in ops or tok.kind == "literal":
                return lhs
            self.next()
            if tok.text == "instanceof":
                rhs = self.type_()
            else:
                rhs = self.binary(level + 1)
            lhs = AstNode("BinaryOperation", tok.text, [lhs, rhs])

    def unary(self) -> AstNode:
        tok = self.peek()
        if tok is not None and tok.kind == "operator" and tok.text in ("+", "-", "++", "--", "!", "~"):
            self.next()
            return AstNode("UnaryOperation", tok.text, [self.unary()])
        if self.at("(") and self.is_cast():
            self.next()
            typ = self.type_()
            self.expect(")")
            return AstNode("Cast", children=[typ, self.unary()])
        return self.postfix(self.primary())

    def is_cast(self) -> bool:
        tok = self.peek(1)
        if tok is None:
            return False
        if tok.kind == "keyword" and tok.text in PRIMITIVES:
            j = 2
            while self.at("[", j) and self.at("]", j + 1):
                j += 2
            return self.at(")", j)
        if tok.kind != "identifier":
            return False
        j = 2
        while self.at(".", j) and self.at_kind("identifier", j + 1):
            j += 2
        while self.at("[", j) and self.at("]", j + 1):
            j += 2
        if not self.at(")", j):
            return False
        after = self.peek(j + 1)
        if after is None:
            return False
        if after.kind in ("identifier", "literal"):
            return True
        return after.text in ("(", "this", "new", "super", "!", "~")

    def postfix(self, expr: AstNode) -> AstNode:
        while True:
            tok = self.peek()
            if tok is None:
                return expr
            if tok.text == "." and tok.kind == "separator":
                self.next()
                nxt = self.peek()
                if nxt is not None and nxt.text == "<":
                    raise unsupported("generic method call", nxt)
                if nxt is not None and nxt.text == "class":
                    raise unsupported("class literal", nxt)
                if nxt is not None and nxt.text == "new":
                    raise unsupported("qualified instance creation", nxt)
                if nxt is not None and nxt.text == "this":
                    raise unsupported("qualified this", nxt)
                name = self.expect_identifier()
                if self.at("("):
                    expr = AstNode("MethodInvocation", name.text, [expr, self.arguments()])
                else:
                    expr = AstNode("FieldAccess", name.text, [expr])
            elif tok.text == "[" and tok.kind == "separator":
                self.next()
                index = self.expression()
                self.expect("]")
                expr = AstNode("ArrayAccess", children=[expr, index])
            elif tok.kind == "operator" and tok.text in ("++", "--"):
                self.next()
                expr = AstNode("PostfixOperation", tok.text, [expr])
            else:
                return expr

    def arguments(self) -> AstNode:
        self.expect("(")
        args = AstNode("Arguments", children=self.expression_list(")"))
        self.expect(")")
        return args

    def primary(self) -> AstNode:
        tok = self.peek()
        if tok is None:
            raise ParseError("expected expression")
        if tok.kind == "literal":
            self.next()
            return AstNode("Literal", tok.text)
        if tok.kind == "identifier":
            self.next()
            if self.at("("):
                return AstNode("MethodInvocation", tok.text, [self.arguments()])
            return AstNode("Name", tok.text)
        if tok.text == "(" and tok.kind == "separator":
            self.next()
            expr = self.expression()
            self.expect(")")
            return AstNode("ParenthesizedExpression", children=[expr])
        if tok.kind == "keyword":
            if tok.text in ("this", "super"):
                self.next()
                node = AstNode("This" if tok.text == "this" else "Super", tok.text)
                if self.at("("):
                    raise unsupported("explicit constructor call", tok)
                return node
            if tok.text == "new":
                return self.creator()
            if tok.text in PRIMITIVES or tok.text == "void":
                raise unsupported("class literal", tok)
            if tok.text == "switch":
                raise unsupported("switch", tok)
        raise ParseError("expected expression", tok)

    def creator(self) -> AstNode:
        new = self.expect("new")
        tok = self.peek()
        if tok is not None and tok.kind == "keyword" and tok.text in PRIMITIVES:
            base = AstNode("BasicType", self.next().text)
        else:
            base = self.reference_type()
        if self.at("["):
            kids = [base]
            while self.at("["):
                self.next()
                if self.at("]"):
                    raise unsupported("array initializer", self.peek())
                kids.append(self.expression())
                self.expect("]")
            while self.at("[") and self.at("]", 1):
                self.next()
                self.next()
                kids.append(AstNode("Dimension"))
            if self.at("{"):
                raise unsupported("array initializer", self.peek())
            return AstNode("ArrayCreator", children=kids)
        if not self.at("("):
            raise ParseError("expected '(' or '[' after new", self.peek() or new)
        args = self.arguments()
        if self.at("{"):
            raise unsupported("anonymous class", self.peek())
        return AstNode("ClassCreator", children=[base, args])


def parse_method(tokens: list[Token] | str) -> AstNode:
    """Parse exactly one method (or constructor) declaration."""
    if isinstance(tokens, str):
        tokens = tokenize(tokens)
    if not tokens:
        raise ParseError("empty input")
    p = Parser(tokens)
    root = p.method()
    if p.peek() is not None:
        raise ParseError("unexpected trailing input", p.peek())
    return root.renumber()


@dataclass
class MethodSource:
    """One method located inside a compilation unit."""

    name: str
    param_types: tuple[str, ...]
    tokens: list[Token]
    text: str

    @property
    def identity(self) -> tuple[str, int, tuple[str, ...]]:
        return (self.name, len(self.param_types), self.param_types)


def _type_text(node: AstNode) -> str:
    if node.category == "ArrayType":
        base, dims = node.children[0], node.children[1:]
        return _type_text(base) + "[]" * len(dims)
    parts = []
    cur: AstNode | None = node
    while cur is not None:
        parts.append(cur.token or cur.category)
        cur = cur.children[0] if cur.children and cur.category == "ReferenceType" else None
    return ".".join(parts)


def method_identity(root: AstNode) -> tuple[str, tuple[str, ...]]:
    params = next((c for c in root.children if c.category == "FormalParameters"), None)
    types = []
    for p in params.children if params else []:
        typ = next(c for c in p.children if c.category in ("BasicType", "ReferenceType", "ArrayType"))
        text = _type_text(typ)
        if any(c.category == "VarArgs" for c in p.children):
            text += "..."
        dims = sum(1 for c in p.children if c.category == "Dimension")
        types.append(text + "[]" * dims)
    return root.token, tuple(types)


def find_methods(source: str) -> list[MethodSource]:
    """Locate and parse every method with a body in a Java source file.

    Package/import declarations and fields are skipped; nested classes are
    searched recursively. Any method outside the subset raises ParseError.
    """
    tokens = tokenize(source)
    out: list[MethodSource] = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.text in ("class", "interface") and tok.kind == "keyword":
            j = i
            while j < len(tokens) and tokens[j].text != "{":
                j += 1
            if j == len(tokens):
                raise ParseError("class without body", tok)
            i = _scan_class_body(tokens, j, source, out)
            continue
        if tok.text == "enum" and tok.kind == "keyword":
            raise unsupported("enum", tok)
        i += 1
    return out


def _matching(tokens: list[Token], i: int, open_: str, close: str) -> int:
    depth = 0
    for j in range(i, len(tokens)):
        if tokens[j].kind == "separator":
            if tokens[j].text == open_:
                depth += 1
            elif tokens[j].text == close:
                depth -= 1
                if depth == 0:
                    return j
    raise ParseError(f"unbalanced {open_!r}", tokens[i])


def _scan_class_body(tokens: list[Token], open_idx: int, source: str, out: list[MethodSource]) -> int:
    end = _matching(tokens, open_idx, "{", "}")
    i = open_idx + 1
    while i < end:
        start = i
        j = i
        # Walk one member: stops at ';' (field / abstract method) or at a body.
        while j < end:
            t = tokens[j]
            if t.kind == "keyword" and t.text in ("class", "interface") and not _after_dot(tokens, j):
                k = j
                while tokens[k].text != "{":
                    k += 1
                j = _scan_class_body(tokens, k, source, out) + 1
                break
            if t.kind == "keyword" and t.text == "enum":
                raise unsupported("enum", t)
            if t.text == ";" and t.kind == "separator":
                j += 1
                break
            if t.text == "{" and t.kind == "separator":
                close = _matching(tokens, j, "{", "}")
                member = tokens[start : close + 1]
                if any(m.text == "(" for m in member[: j - start]) and not any(
                    m.text == "=" for m in member[: j - start]
                ):
                    out.append(_method_source(member, source))
                j = close + 1
                break
            if t.text == "=" and t.kind == "operator":
                # Field initializer: skip to the terminating ';' at depth 0.
                k = j
                depth = 0
                while k < end:
                    if tokens[k].text in "({[" and tokens[k].kind == "separator":
                        depth += 1
                    elif tokens[k].text in ")}]" and tokens[k].kind == "separator":
                        depth -= 1
                    elif tokens[k].text == ";" and depth == 0:
                        break
                    k += 1
                j = k + 1
                break
            j += 1
        i = max(j, i + 1)
    return end + 1


def _after_dot(tokens: list[Token], j: int) -> bool:
    return j > 0 and tokens[j - 1].text == "."


def _method_source(member: list[Token], source: str) -> MethodSource:
    root = parse_method(member)
    name, types = method_identity(root)
    text = source[member[0].offset : member[-1].end]
    return MethodSource(name, types, member, text)
