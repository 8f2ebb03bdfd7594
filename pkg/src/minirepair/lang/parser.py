"""Recursive-descent parser for MiniLang.

Implements exactly the grammar documented in docs/minilang.md.
"""

from __future__ import annotations

from minirepair.lang.ast import (
    BOOL,
    FLOAT,
    INT,
    STRING,
    MiniSyntaxError,
    Node,
    Type,
    array_of,
)
from minirepair.lang.lexer import Token, tokenize


class _Parser:
    def __init__(self, path: str, tokens: list[Token]):
        self.path = path
        self.tokens = tokens
        self.pos = 0

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def check(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        if self.check(kind, text):
            return self.advance()
        return None

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            got = tok.text if tok.text else tok.kind
            self.error(tok, f"expected {want!r}, found {got!r}")
        return self.advance()

    def error(self, tok: Token, msg: str):
        raise MiniSyntaxError(self.path, tok.line, msg)

    # -- grammar -----------------------------------------------------------

    def parse_program(self) -> list[Node]:
        functions = []
        while not self.check("eof"):
            functions.append(self.parse_function())
        return functions

    def parse_function(self) -> Node:
        start = self.expect("keyword", "fn")
        name = self.expect("ident").text
        self.expect("op", "(")
        params: list[tuple[str, Type]] = []
        if not self.check("op", ")"):
            while True:
                pname = self.expect("ident").text
                self.expect("op", ":")
                params.append((pname, self.parse_type()))
                if not self.accept("op", ","):
                    break
        self.expect("op", ")")
        ret = None
        if self.accept("op", "->"):
            ret = self.parse_type()
        body = self.parse_block()
        return Node(
            "function", [body], name=name, params=params, ret=ret,
            line=start.line, col=start.col,
        )

    def parse_type(self) -> Type:
        if self.accept("op", "["):
            inner = self.parse_type()
            self.expect("op", "]")
            return array_of(inner)
        tok = self.expect("keyword")
        mapping = {"int": INT, "float": FLOAT, "bool": BOOL, "string": STRING}
        if tok.text not in mapping:
            self.error(tok, f"expected a type, found {tok.text!r}")
        return mapping[tok.text]

    def parse_block(self) -> Node:
        start = self.expect("op", "{")
        statements = []
        while not self.check("op", "}"):
            statements.append(self.parse_statement())
        self.expect("op", "}")
        return Node("block", statements, line=start.line, col=start.col)

    def parse_statement(self) -> Node:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "{":
            return self.parse_block()
        if tok.kind == "keyword":
            if tok.text == "let":
                return self.parse_var_decl()
            if tok.text == "if":
                return self.parse_if()
            if tok.text == "while":
                return self.parse_while()
            if tok.text == "return":
                return self.parse_return()
        return self.parse_assign_or_expr()

    def parse_var_decl(self) -> Node:
        start = self.expect("keyword", "let")
        name = self.expect("ident").text
        ann = None
        if self.accept("op", ":"):
            ann = self.parse_type()
        self.expect("op", "=")
        init = self.parse_expr()
        self.expect("op", ";")
        return Node("var-decl", [init], name=name, type_ann=ann,
                    line=start.line, col=start.col)

    def parse_if(self) -> Node:
        start = self.expect("keyword", "if")
        self.expect("op", "(")
        cond = self.parse_expr()
        self.expect("op", ")")
        then = self.parse_block()
        children = [cond, then]
        if self.accept("keyword", "else"):
            if self.check("keyword", "if"):
                children.append(self.parse_if())
            else:
                children.append(self.parse_block())
        return Node("if", children, line=start.line, col=start.col)

    def parse_while(self) -> Node:
        start = self.expect("keyword", "while")
        self.expect("op", "(")
        cond = self.parse_expr()
        self.expect("op", ")")
        body = self.parse_block()
        return Node("while", [cond, body], line=start.line, col=start.col)

    def parse_return(self) -> Node:
        start = self.expect("keyword", "return")
        children = []
        if not self.check("op", ";"):
            children.append(self.parse_expr())
        self.expect("op", ";")
        return Node("return", children, line=start.line, col=start.col)

    def parse_assign_or_expr(self) -> Node:
        start = self.peek()
        expr = self.parse_expr()
        if self.accept("op", "="):
            if not self._valid_lvalue(expr):
                self.error(start, "invalid assignment target")
            value = self.parse_expr()
            self.expect("op", ";")
            return Node("assign", [expr, value], line=start.line, col=start.col)
        self.expect("op", ";")
        return Node("expr-stmt", [expr], line=start.line, col=start.col)

    def _valid_lvalue(self, node: Node) -> bool:
        while node.kind == "index":
            node = node.children[0]
        return node.kind == "var-ref"

    # -- expressions (precedence climbing) ----------------------------------

    def parse_expr(self) -> Node:
        return self.parse_or()

    def _binary_chain(self, sub, ops: tuple[str, ...]) -> Node:
        left = sub()
        while self.peek().kind == "op" and self.peek().text in ops:
            tok = self.advance()
            right = sub()
            left = Node("binary-op", [left, right], op=tok.text,
                        line=tok.line, col=tok.col)
        return left

    def parse_or(self) -> Node:
        return self._binary_chain(self.parse_and, ("||",))

    def parse_and(self) -> Node:
        return self._binary_chain(self.parse_cmp, ("&&",))

    def parse_cmp(self) -> Node:
        return self._binary_chain(self.parse_add, ("==", "!=", "<", "<=", ">", ">="))

    def parse_add(self) -> Node:
        return self._binary_chain(self.parse_mul, ("+", "-"))

    def parse_mul(self) -> Node:
        return self._binary_chain(self.parse_unary, ("*", "/", "%"))

    def parse_unary(self) -> Node:
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("-", "!"):
            self.advance()
            operand = self.parse_unary()
            return Node("unary-op", [operand], op=tok.text, line=tok.line, col=tok.col)
        return self.parse_postfix()

    def parse_postfix(self) -> Node:
        node = self.parse_primary()
        while self.check("op", "["):
            tok = self.advance()
            sub = self.parse_expr()
            self.expect("op", "]")
            node = Node("index", [node, sub], line=tok.line, col=tok.col)
        return node

    def parse_primary(self) -> Node:
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            return Node("literal", value=int(tok.text), line=tok.line, col=tok.col)
        if tok.kind == "float":
            self.advance()
            return Node("literal", value=float(tok.text), line=tok.line, col=tok.col)
        if tok.kind == "string":
            self.advance()
            return Node("literal", value=tok.text, line=tok.line, col=tok.col)
        if tok.kind == "keyword" and tok.text in ("true", "false"):
            self.advance()
            return Node("literal", value=(tok.text == "true"), line=tok.line, col=tok.col)
        if tok.kind == "op" and tok.text == "[":
            self.advance()
            elems = []
            if not self.check("op", "]"):
                while True:
                    elems.append(self.parse_expr())
                    if not self.accept("op", ","):
                        break
            self.expect("op", "]")
            return Node("literal", elems, op="array", line=tok.line, col=tok.col)
        if tok.kind == "ident":
            self.advance()
            if self.check("op", "("):
                self.advance()
                args = []
                if not self.check("op", ")"):
                    while True:
                        args.append(self.parse_expr())
                        if not self.accept("op", ","):
                            break
                self.expect("op", ")")
                return Node("call", args, name=tok.text, line=tok.line, col=tok.col)
            return Node("var-ref", name=tok.text, line=tok.line, col=tok.col)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect("op", ")")
            return inner
        self.error(tok, f"unexpected token {tok.text or tok.kind!r}")


def parse_file_source(path: str, source: str) -> list[Node]:
    """Parse one file's text into its list of function nodes."""
    return _Parser(path, tokenize(path, source)).parse_program()
