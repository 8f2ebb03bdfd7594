"""Tree-walking interpreter with statement coverage tracing.

Every statement and expression evaluation consumes one step from the step
budget, which replaces wall-clock test timeouts: the same program, entry
and arguments always produce the same trace, on any machine.  Runtime
errors never escape; they are folded into the trace outcome.

Semantics notes:
  - ints are 64-bit signed with two's-complement wraparound;
  - `/` on ints truncates toward zero and `%` takes the dividend's sign;
  - division by zero (int or float) is the runtime error `div-by-zero`;
  - `&&` and `||` short-circuit;
  - arrays are reference values (the only aliasing in the language);
  - falling off the end of a non-void function is `missing-return`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from minirepair.lang.ast import Node, SourceProject, Type

_MIN64 = -(1 << 63)
_WRAP = 1 << 64

MAX_CALL_DEPTH = 200
DEFAULT_STEP_BUDGET = 1_000_000


class Unit:
    """Value of a void function call; not expressible as a literal."""

    _instance: Optional["Unit"] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "unit"


UNIT = Unit()


@dataclass(frozen=True)
class Outcome:
    status: str  # normal | error | timeout
    value: object = None
    error_kind: Optional[str] = None
    error_line: int = 0

    @property
    def is_normal(self) -> bool:
        return self.status == "normal"


@dataclass(frozen=True)
class ExecutionTrace:
    covered: frozenset[int]
    outcome: Outcome
    steps: int


class _Timeout(Exception):
    pass


class _RuntimeFault(Exception):
    def __init__(self, kind: str, node: Node):
        self.kind = kind
        self.node = node


class _Return(Exception):
    def __init__(self, value):
        self.value = value


def _wrap64(x: int) -> int:
    return ((x - _MIN64) % _WRAP) + _MIN64


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def _runtime_matches(value, ty: Type) -> bool:
    if ty.base == "int":
        return isinstance(value, int) and not isinstance(value, bool)
    if ty.base == "float":
        return isinstance(value, float)
    if ty.base == "bool":
        return isinstance(value, bool)
    if ty.base == "string":
        return isinstance(value, str)
    if ty.base == "array":
        return isinstance(value, list) and all(_runtime_matches(v, ty.elem) for v in value)
    return False


class _Run:
    def __init__(self, project: SourceProject, budget: int):
        self.project = project
        self.budget = budget
        self.steps = 0
        self.covered: set[int] = set()
        self.depth = 0

    def step(self, node: Node) -> None:
        self.steps += 1
        if self.steps > self.budget:
            raise _Timeout()

    # -- statements ---------------------------------------------------------

    def exec_block(self, block: Node, scopes: list[dict]) -> None:
        self.covered.add(block.node_id)
        self.step(block)
        scopes.append({})
        try:
            for stmt in block.children:
                self.exec_stmt(stmt, scopes)
        finally:
            scopes.pop()

    def exec_stmt(self, stmt: Node, scopes: list[dict]) -> None:
        kind = stmt.kind
        if kind == "block":
            self.exec_block(stmt, scopes)
            return
        self.covered.add(stmt.node_id)
        self.step(stmt)
        if kind == "var-decl":
            scopes[-1][stmt.name] = self.eval(stmt.children[0], scopes)
        elif kind == "assign":
            self.exec_assign(stmt, scopes)
        elif kind == "expr-stmt":
            self.eval(stmt.children[0], scopes)
        elif kind == "return":
            value = self.eval(stmt.children[0], scopes) if stmt.children else UNIT
            raise _Return(value)
        elif kind == "if":
            cond = self.eval_bool(stmt.children[0], scopes)
            if cond:
                self.exec_block(stmt.children[1], scopes)
            elif len(stmt.children) == 3:
                alt = stmt.children[2]
                if alt.kind == "if":
                    self.exec_stmt(alt, scopes)
                else:
                    self.exec_block(alt, scopes)
        elif kind == "while":
            while self.eval_bool(stmt.children[0], scopes):
                self.exec_block(stmt.children[1], scopes)
        else:
            raise _RuntimeFault("type-error", stmt)

    def exec_assign(self, stmt: Node, scopes: list[dict]) -> None:
        target, value_expr = stmt.children
        value = self.eval(value_expr, scopes)
        if target.kind == "var-ref":
            for scope in reversed(scopes):
                if target.name in scope:
                    scope[target.name] = value
                    return
            raise _RuntimeFault("undefined-variable", target)
        container = self.eval(target.children[0], scopes)
        idx = self.eval(target.children[1], scopes)
        if not isinstance(container, list):
            raise _RuntimeFault("type-error", target)
        if not isinstance(idx, int) or isinstance(idx, bool):
            raise _RuntimeFault("type-error", target)
        if idx < 0 or idx >= len(container):
            raise _RuntimeFault("index-out-of-bounds", target)
        container[idx] = value

    # -- expressions ---------------------------------------------------------

    def eval_bool(self, node: Node, scopes) -> bool:
        value = self.eval(node, scopes)
        if not isinstance(value, bool):
            raise _RuntimeFault("type-error", node)
        return value

    def eval(self, node: Node, scopes):
        self.step(node)
        kind = node.kind
        if kind == "literal":
            if node.op == "array":
                return [self.eval(c, scopes) for c in node.children]
            return node.value
        if kind == "var-ref":
            for scope in reversed(scopes):
                if node.name in scope:
                    return scope[node.name]
            raise _RuntimeFault("undefined-variable", node)
        if kind == "unary-op":
            return self.eval_unary(node, scopes)
        if kind == "binary-op":
            return self.eval_binary(node, scopes)
        if kind == "index":
            return self.eval_index(node, scopes)
        if kind == "call":
            return self.eval_call(node, scopes)
        raise _RuntimeFault("type-error", node)

    def eval_unary(self, node: Node, scopes):
        value = self.eval(node.children[0], scopes)
        if node.op == "-":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise _RuntimeFault("type-error", node)
            return _wrap64(-value) if isinstance(value, int) else -value
        if node.op == "!":
            if not isinstance(value, bool):
                raise _RuntimeFault("type-error", node)
            return not value
        raise _RuntimeFault("type-error", node)

    def eval_binary(self, node: Node, scopes):
        op = node.op
        if op in ("&&", "||"):
            left = self.eval_bool(node.children[0], scopes)
            if op == "&&" and not left:
                return False
            if op == "||" and left:
                return True
            return self.eval_bool(node.children[1], scopes)

        left = self.eval(node.children[0], scopes)
        right = self.eval(node.children[1], scopes)
        if op in ("==", "!="):
            eq = self.values_eq(left, right, node)
            return eq if op == "==" else not eq
        if op in ("<", "<=", ">", ">="):
            return self.eval_order(op, left, right, node)
        return self.eval_arith(op, left, right, node)

    def values_eq(self, a, b, node: Node) -> bool:
        if isinstance(a, bool) or isinstance(b, bool):
            if isinstance(a, bool) and isinstance(b, bool):
                return a is b
            raise _RuntimeFault("type-error", node)
        if isinstance(a, (int, float)) and isinstance(b, (int, float)):
            return float(a) == float(b) if type(a) is not type(b) else a == b
        if isinstance(a, str) and isinstance(b, str):
            return a == b
        if isinstance(a, list) and isinstance(b, list):
            if len(a) != len(b):
                return False
            return all(self.values_eq(x, y, node) for x, y in zip(a, b))
        raise _RuntimeFault("type-error", node)

    def eval_order(self, op: str, a, b, node: Node) -> bool:
        numeric = (
            isinstance(a, (int, float)) and not isinstance(a, bool)
            and isinstance(b, (int, float)) and not isinstance(b, bool)
        )
        if not numeric and not (isinstance(a, str) and isinstance(b, str)):
            raise _RuntimeFault("type-error", node)
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        return a >= b

    def eval_arith(self, op: str, a, b, node: Node):
        if isinstance(a, str) and isinstance(b, str) and op == "+":
            return a + b
        if (
            isinstance(a, bool) or isinstance(b, bool)
            or not isinstance(a, (int, float)) or not isinstance(b, (int, float))
        ):
            raise _RuntimeFault("type-error", node)
        both_int = isinstance(a, int) and isinstance(b, int)
        if op == "%":
            if not both_int:
                raise _RuntimeFault("type-error", node)
            if b == 0:
                raise _RuntimeFault("div-by-zero", node)
            q = _trunc_div(a, b)
            return _wrap64(a - q * b)
        if op == "/":
            if b == 0:
                raise _RuntimeFault("div-by-zero", node)
            if both_int:
                return _wrap64(_trunc_div(a, b))
            return float(a) / float(b)
        if op == "+":
            result = a + b
        elif op == "-":
            result = a - b
        elif op == "*":
            result = a * b
        else:
            raise _RuntimeFault("type-error", node)
        return _wrap64(result) if both_int else result

    def eval_index(self, node: Node, scopes):
        base = self.eval(node.children[0], scopes)
        idx = self.eval(node.children[1], scopes)
        if not isinstance(idx, int) or isinstance(idx, bool):
            raise _RuntimeFault("type-error", node)
        if isinstance(base, list):
            if idx < 0 or idx >= len(base):
                raise _RuntimeFault("index-out-of-bounds", node)
            return base[idx]
        if isinstance(base, str):
            if idx < 0 or idx >= len(base):
                raise _RuntimeFault("index-out-of-bounds", node)
            return base[idx]
        raise _RuntimeFault("type-error", node)

    def eval_call(self, node: Node, scopes):
        args = [self.eval(a, scopes) for a in node.children]
        if node.name == "len":
            if len(args) != 1 or not isinstance(args[0], (str, list)):
                raise _RuntimeFault("type-error", node)
            return len(args[0])
        entry = self.project.functions.get(node.name)
        if entry is None:
            raise _RuntimeFault("undefined-function", node)
        _, fn = entry
        if len(args) != len(fn.params):
            raise _RuntimeFault("bad-arity", node)
        return self.call_function(fn, args, node)

    def call_function(self, fn: Node, args: list, site: Node):
        if self.depth >= MAX_CALL_DEPTH:
            raise _RuntimeFault("stack-overflow", site)
        self.depth += 1
        scopes = [dict(zip((name for name, _ in fn.params), args))]
        try:
            self.exec_block(fn.children[0], scopes)
        except _Return as ret:
            return ret.value
        finally:
            self.depth -= 1
        if fn.ret is None:
            return UNIT
        raise _RuntimeFault("missing-return", fn)


def execute(
    project: SourceProject,
    entry: str,
    args: list,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> ExecutionTrace:
    """Run `entry(args)` under the step budget, tracing statement coverage.

    The covered set contains exactly the statements whose evaluation began.
    All failures (including a missing or mis-typed entry point) are encoded
    in the outcome; this function does not raise.
    """
    if step_budget <= 0:
        raise ValueError("step budget must be positive")
    run = _Run(project, step_budget)

    def finish(outcome: Outcome) -> ExecutionTrace:
        # the step that crossed the budget never completed
        return ExecutionTrace(frozenset(run.covered), outcome, min(run.steps, step_budget))

    fn_entry = project.functions.get(entry)
    if fn_entry is None:
        return finish(Outcome("error", error_kind="undefined-function"))
    _, fn = fn_entry
    if len(args) != len(fn.params):
        return finish(Outcome("error", error_kind="bad-arity", error_line=fn.line))
    for value, (_, ty) in zip(args, fn.params):
        if not _runtime_matches(value, ty):
            return finish(Outcome("error", error_kind="type-error", error_line=fn.line))

    try:
        value = run.call_function(fn, list(args), fn)
    except _Timeout:
        return finish(Outcome("timeout"))
    except _RuntimeFault as fault:
        return finish(Outcome("error", error_kind=fault.kind, error_line=fault.node.line))
    except RecursionError:
        return finish(Outcome("error", error_kind="stack-overflow", error_line=fn.line))
    return finish(Outcome("normal", value=value))
