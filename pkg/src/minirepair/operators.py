"""Repair operator spaces.

Four spaces are provided:

  irr-statements      insert-before / replace / remove of statements
                      (insert and replace consume an ingredient)
  suppression         remove statement, insert a default-valued return
                      before a statement, force an if condition to
                      true or false
  relational-logical  rewrite each relational operator to every other one,
                      swap && with ||, insert or drop a boolean negation
  r-expression        replace any expression (except an assignment's
                      target) with an ingredient expression

Operators never mutate the project they are asked about: `apply_operator`
works on a clone, and the engine applies `mutate` only to throwaway copies.
An operator's `applicable` covers its structural preconditions; whole-
variant scope/type checking happens separately at generation time.
"""

from __future__ import annotations

from dataclasses import dataclass

from minirepair.lang.ast import (
    LOGICAL_OPS,
    RELATIONAL_OPS,
    Node,
    SourceProject,
    Type,
    pre_order,
)

GRANULARITIES = ("statement", "expression", "logical-relational")


class RepairOperator:
    name: str = ""
    granularity: str = "statement"
    needs_ingredient: bool = False

    def applicable(self, project: SourceProject, node: Node) -> bool:
        raise NotImplementedError

    def mutate(self, project: SourceProject, target: Node, ingredient: Node | None) -> None:
        """Apply the transformation in place on a cloned project."""
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<op {self.name}>"


@dataclass(frozen=True)
class OperatorSpace:
    name: str
    operators: tuple[RepairOperator, ...]

    def by_name(self, name: str) -> RepairOperator:
        for op in self.operators:
            if op.name == name:
                return op
        raise KeyError(name)


def _parent_block(project: SourceProject, node: Node) -> Node | None:
    parent = project.parent(node.node_id)
    if parent is not None and parent.kind == "block":
        return parent
    return None


def _replace_child(parent: Node, target: Node, replacement: Node) -> None:
    for i, child in enumerate(parent.children):
        if child is target:
            parent.children[i] = replacement
            return
    raise ValueError("target is not a child of its recorded parent")


def _decl_used_later(project: SourceProject, decl: Node) -> bool:
    """True when a var-decl's name is referenced after it inside its
    function.  Node ids are pre-order, so 'after' is a simple id compare."""
    fn = project.enclosing_function(decl.node_id)
    own = {n.node_id for n in pre_order(decl)}
    for n in pre_order(fn):
        if n.kind == "var-ref" and n.name == decl.name:
            if n.node_id not in own and n.node_id > decl.node_id:
                return True
    return False


def default_return_node(ret: Type | None) -> Node:
    if ret is None:
        return Node("return")
    if ret.base == "int":
        value = Node("literal", value=0)
    elif ret.base == "float":
        value = Node("literal", value=0.0)
    elif ret.base == "bool":
        value = Node("literal", value=False)
    elif ret.base == "string":
        value = Node("literal", value="")
    elif ret.base == "array":
        value = Node("literal", op="array")
    else:
        raise ValueError(f"no default value for return type {ret}")
    return Node("return", [value])


def is_assignment_target_base(project: SourceProject, node: Node) -> bool:
    """True for the lvalue spine of an assignment (the part left of '='
    that names the written location, excluding subscript expressions)."""
    cur = node
    while True:
        parent = project.parent(cur.node_id)
        if parent is None:
            return False
        if parent.kind == "index" and parent.children[0] is cur:
            cur = parent
            continue
        return parent.kind == "assign" and parent.children[0] is cur


class RemoveStatement(RepairOperator):
    name = "remove"
    granularity = "statement"

    def applicable(self, project, node):
        if not node.is_statement() or _parent_block(project, node) is None:
            return False
        if node.kind == "var-decl" and _decl_used_later(project, node):
            return False
        return True

    def mutate(self, project, target, ingredient):
        block = _parent_block(project, target)
        block.children.remove(target)


class InsertBefore(RepairOperator):
    name = "insert-before"
    granularity = "statement"
    needs_ingredient = True

    def applicable(self, project, node):
        return node.is_statement() and _parent_block(project, node) is not None

    def mutate(self, project, target, ingredient):
        block = _parent_block(project, target)
        _replace_child(block, target, Node("block", [ingredient, target]))


class ReplaceStatement(RepairOperator):
    name = "replace"
    granularity = "statement"
    needs_ingredient = True

    def applicable(self, project, node):
        return node.is_statement() and _parent_block(project, node) is not None

    def mutate(self, project, target, ingredient):
        block = _parent_block(project, target)
        _replace_child(block, target, ingredient)


class InsertReturnBefore(RepairOperator):
    name = "insert-return-before"
    granularity = "statement"

    def applicable(self, project, node):
        if not node.is_statement() or _parent_block(project, node) is None:
            return False
        ret = project.enclosing_function(node.node_id).ret
        try:
            default_return_node(ret)
        except ValueError:
            return False
        return True

    def mutate(self, project, target, ingredient):
        ret = project.enclosing_function(target.node_id).ret
        block = _parent_block(project, target)
        _replace_child(block, target, Node("block", [default_return_node(ret), target]))


class IfCondition(RepairOperator):
    granularity = "statement"

    def __init__(self, value: bool):
        self.value = value
        self.name = "if-true" if value else "if-false"

    def applicable(self, project, node):
        return node.kind == "if"

    def mutate(self, project, target, ingredient):
        target.children[0] = Node("literal", value=self.value)


class RelationalTo(RepairOperator):
    granularity = "logical-relational"

    def __init__(self, to_op: str):
        self.to_op = to_op
        self.name = f"relational-to-{to_op}"

    def applicable(self, project, node):
        return node.kind == "binary-op" and node.op in RELATIONAL_OPS and node.op != self.to_op

    def mutate(self, project, target, ingredient):
        target.op = self.to_op


class LogicalSwap(RepairOperator):
    name = "logical-swap"
    granularity = "logical-relational"

    def applicable(self, project, node):
        return node.kind == "binary-op" and node.op in LOGICAL_OPS

    def mutate(self, project, target, ingredient):
        target.op = "||" if target.op == "&&" else "&&"


class NegateInsert(RepairOperator):
    """Wrap a logical binary expression in `!(...)`."""

    name = "negate-insert"
    granularity = "logical-relational"

    def applicable(self, project, node):
        return node.kind == "binary-op" and node.op in LOGICAL_OPS

    def mutate(self, project, target, ingredient):
        parent = project.parent(target.node_id)
        _replace_child(parent, target, Node("unary-op", [target], op="!"))


class NegateRemove(RepairOperator):
    name = "negate-remove"
    granularity = "logical-relational"

    def applicable(self, project, node):
        return node.kind == "unary-op" and node.op == "!"

    def mutate(self, project, target, ingredient):
        parent = project.parent(target.node_id)
        _replace_child(parent, target, target.children[0])


class ReplaceExpression(RepairOperator):
    name = "replace-expression"
    granularity = "expression"
    needs_ingredient = True

    def applicable(self, project, node):
        return node.is_expression() and not is_assignment_target_base(project, node)

    def mutate(self, project, target, ingredient):
        parent = project.parent(target.node_id)
        _replace_child(parent, target, ingredient)


def space_irr_statements() -> OperatorSpace:
    return OperatorSpace(
        "irr-statements", (InsertBefore(), ReplaceStatement(), RemoveStatement())
    )


def space_suppression() -> OperatorSpace:
    return OperatorSpace(
        "suppression",
        (RemoveStatement(), InsertReturnBefore(), IfCondition(True), IfCondition(False)),
    )


def space_relational_logical() -> OperatorSpace:
    ops: list[RepairOperator] = [RelationalTo(op) for op in RELATIONAL_OPS]
    ops.extend([LogicalSwap(), NegateInsert(), NegateRemove()])
    return OperatorSpace("relational-logical", tuple(ops))


def space_r_expression() -> OperatorSpace:
    return OperatorSpace("r-expression", (ReplaceExpression(),))


_SPACES = {
    "irr-statements": space_irr_statements,
    "suppression": space_suppression,
    "relational-logical": space_relational_logical,
    "r-expression": space_r_expression,
}


def operator_space(name: str) -> OperatorSpace:
    try:
        return _SPACES[name]()
    except KeyError:
        raise ValueError(f"unknown operator space {name!r}") from None


def apply_operator(
    project: SourceProject, op: RepairOperator, node_id: int, ingredient: Node | None = None
) -> SourceProject | None:
    """Apply one operator on a clone of the project.

    Returns the transformed project, or None when the operator is not
    applicable at the node.  The input project is never modified.
    """
    node = project.node(node_id)
    if not op.applicable(project, node):
        return None
    if op.needs_ingredient and ingredient is None:
        raise ValueError(f"operator {op.name} needs an ingredient")
    copy = project.clone()
    target = copy.nodes[node_id]
    op.mutate(copy, target, ingredient.clone() if ingredient is not None else None)
    copy.reindex()
    return copy
