"""
GL prover service for icardmaps.
Handles finite tree models, Kripke model checking and a tableau decision
procedure for the provability logic GL that returns finite tree
countermodels for non-theorems.
"""
import logging
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, FrozenSet, Iterable, Iterator, List, NamedTuple, Optional, Tuple, Union

from icardmaps.services.errors import (
    BudgetExceededError,
    InconsistentInputError,
    InputError,
    InternalConsistencyError,
)
from icardmaps.services.formulas import (
    And,
    Bottom,
    Box,
    Diamond,
    Formula,
    Implies,
    Not,
    Or,
    Top,
    Var,
    conjunction,
    diamond_power,
    nnf,
    to_text,
)

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 20000

_VAR_NAME = re.compile(r"^p([0-9]+)$")


# ============ Tree Models ============


@dataclass(frozen=True)
class TreeNode:
    id: int
    valuation: FrozenSet[int] = frozenset()
    children: Tuple[int, ...] = ()


@dataclass(frozen=True)
class TreeModel:
    """Finite rooted tree; accessibility is the strict descendant relation."""

    nodes: Tuple[TreeNode, ...]
    root: int

    def __post_init__(self):
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise InputError("tree model has duplicate node ids")
        known = set(ids)
        if self.root not in known:
            raise InputError(f"root {self.root} is not a node")
        parents: Dict[int, int] = {}
        for n in self.nodes:
            for child in n.children:
                if child not in known:
                    raise InputError(f"node {n.id} has unknown child {child}")
                if child in parents or child == self.root:
                    raise InputError(f"node {child} has more than one parent")
                parents[child] = n.id
        reached = {self.root}
        queue = deque([self.root])
        while queue:
            for child in self.by_id[queue.popleft()].children:
                if child not in reached:
                    reached.add(child)
                    queue.append(child)
        if reached != known:
            raise InputError(f"nodes {sorted(known - reached)} are not reachable from the root")

    @cached_property
    def by_id(self) -> Dict[int, TreeNode]:
        return {n.id: n for n in self.nodes}

    def node(self, node_id: int) -> TreeNode:
        try:
            return self.by_id[node_id]
        except KeyError:
            raise InputError(f"unknown node id {node_id}") from None

    @cached_property
    def _descendants(self) -> Dict[int, Tuple[int, ...]]:
        table: Dict[int, Tuple[int, ...]] = {}

        def visit(node_id: int) -> Tuple[int, ...]:
            if node_id not in table:
                below: List[int] = []
                for child in self.by_id[node_id].children:
                    below.append(child)
                    below.extend(visit(child))
                table[node_id] = tuple(below)
            return table[node_id]

        visit(self.root)
        return table

    def descendants(self, node_id: int) -> Tuple[int, ...]:
        self.node(node_id)
        return self._descendants[node_id]

    def rank(self, node_id: Optional[int] = None) -> int:
        node = self.node(self.root if node_id is None else node_id)
        if not node.children:
            return 0
        return 1 + max(self.rank(child) for child in node.children)

    def to_json(self) -> Dict[str, Any]:
        return {
            "nodes": [
                {"id": n.id, "val": [f"p{i}" for i in sorted(n.valuation)], "children": list(n.children)}
                for n in self.nodes
            ],
            "root": self.root,
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "TreeModel":
        try:
            nodes = tuple(
                TreeNode(
                    id=int(entry["id"]),
                    valuation=frozenset(parse_variable_name(name) for name in entry.get("val", [])),
                    children=tuple(int(c) for c in entry.get("children", [])),
                )
                for entry in data["nodes"]
            )
            root = int(data["root"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed tree model: {exc}") from exc
        return cls(nodes, root)


def parse_variable_name(name: str) -> int:
    match = _VAR_NAME.match(str(name))
    if not match:
        raise InputError(f"invalid variable name {name!r}")
    return int(match.group(1))


def check_tree(model: TreeModel, node_id: int, phi: Formula) -> bool:
    """Kripke truth of phi at node_id, with Diamond ranging over strict descendants."""
    model.node(node_id)
    memo: Dict[Tuple[int, Formula], bool] = {}

    def holds(n: int, f: Formula) -> bool:
        key = (n, f)
        if key in memo:
            return memo[key]
        if isinstance(f, Top):
            value = True
        elif isinstance(f, Bottom):
            value = False
        elif isinstance(f, Var):
            value = f.index in model.by_id[n].valuation
        elif isinstance(f, Not):
            value = not holds(n, f.sub)
        elif isinstance(f, And):
            value = holds(n, f.left) and holds(n, f.right)
        elif isinstance(f, Or):
            value = holds(n, f.left) or holds(n, f.right)
        elif isinstance(f, Implies):
            value = not holds(n, f.left) or holds(n, f.right)
        elif isinstance(f, Box):
            value = all(holds(d, f.sub) for d in model.descendants(n))
        else:
            value = any(holds(d, f.sub) for d in model.descendants(n))
        memo[key] = value
        return value

    return holds(node_id, phi)


# ============ Tableau ============


@dataclass
class _Node:
    valuation: FrozenSet[int]
    children: List["_Node"] = field(default_factory=list)


class _Tableau:
    """
    Depth-first GL tableau over NNF formula sets.

    A saturated set H gets, for every <>psi in H, the successor
    {psi, []~psi} | {chi, []chi : []chi in H}. The added []~psi makes
    successor sets strictly grow in boxed formulas, so search terminates.
    """

    def __init__(self, budget: int):
        self.budget = budget
        self.steps = 0
        self.cache: Dict[FrozenSet[Formula], Optional[_Node]] = {}

    def _charge(self) -> None:
        self.steps += 1
        if self.steps > self.budget:
            raise BudgetExceededError(f"tableau exceeded its budget of {self.budget} nodes")

    def satisfy(self, formulas: FrozenSet[Formula]) -> Optional[_Node]:
        if formulas in self.cache:
            return self.cache[formulas]
        self._charge()
        result = None
        for saturated in self._saturations(formulas):
            children = self._successors(saturated)
            if children is not None:
                valuation = frozenset(f.index for f in saturated if isinstance(f, Var))
                result = _Node(valuation, children)
                break
        self.cache[formulas] = result
        return result

    @staticmethod
    def _clash(formulas: FrozenSet[Formula]) -> bool:
        if any(isinstance(f, Bottom) for f in formulas):
            return True
        return any(isinstance(f, Not) and f.sub in formulas for f in formulas)

    def _saturations(self, formulas: FrozenSet[Formula]) -> Iterator[FrozenSet[Formula]]:
        self._charge()
        if self._clash(formulas):
            return
        linear = [f for f in formulas if isinstance(f, (And, Top))]
        if linear:
            f = min(linear, key=to_text)
            rest = formulas - {f}
            yield from self._saturations(rest if isinstance(f, Top) else rest | {f.left, f.right})
            return
        branching = [f for f in formulas if isinstance(f, Or)]
        if not branching:
            yield formulas
            return
        f = min(branching, key=to_text)
        rest = formulas - {f}
        yield from self._saturations(rest | {f.left})
        yield from self._saturations(rest | {f.right})

    def _successors(self, saturated: FrozenSet[Formula]) -> Optional[List[_Node]]:
        boxes = [f for f in saturated if isinstance(f, Box)]
        boxed = frozenset(boxes) | frozenset(b.sub for b in boxes)
        children: List[_Node] = []
        for diamond in sorted((f for f in saturated if isinstance(f, Diamond)), key=to_text):
            target = boxed | {diamond.sub, Box(nnf(diamond.sub, negate=True))}
            child = self.satisfy(frozenset(target))
            if child is None:
                return None
            if not any(c is child for c in children):
                children.append(child)
        return children


def _to_tree_model(root: _Node) -> TreeModel:
    nodes: List[TreeNode] = []
    queue = deque([(root, 0)])
    next_id = 1
    while queue:
        current, node_id = queue.popleft()
        child_ids = []
        for child in current.children:
            child_ids.append(next_id)
            queue.append((child, next_id))
            next_id += 1
        nodes.append(TreeNode(node_id, current.valuation, tuple(child_ids)))
    return TreeModel(tuple(sorted(nodes, key=lambda n: n.id)), 0)


class Theorem(NamedTuple):
    formula: Formula
    steps: int
    is_theorem: bool = True


class Countermodel(NamedTuple):
    formula: Formula
    model: TreeModel
    steps: int
    is_theorem: bool = False

    @property
    def root(self) -> int:
        return self.model.root


ProofResult = Union[Theorem, Countermodel]


def _model_of(formulas: Iterable[Formula], budget: int) -> Tuple[Optional[TreeModel], int]:
    tableau = _Tableau(budget)
    start = frozenset(nnf(f) for f in formulas)
    found = tableau.satisfy(start)
    logger.debug("tableau explored %d nodes for %d formulas", tableau.steps, len(start))
    return (None if found is None else _to_tree_model(found)), tableau.steps


def prove(phi: Formula, budget: int = DEFAULT_BUDGET) -> ProofResult:
    """
    Decide GL-provability of phi.

    Args:
        phi: Formula to prove
        budget: Cap on tableau nodes

    Returns:
        Theorem, or Countermodel whose root refutes phi
    """
    model, steps = _model_of([Not(phi)], budget)
    if model is None:
        return Theorem(phi, steps)
    if check_tree(model, model.root, phi):
        logger.error("countermodel for %s does not refute it", to_text(phi))
        raise InternalConsistencyError(f"countermodel does not refute {to_text(phi)}")
    return Countermodel(phi, model, steps)


def satisfying_model(formulas: Iterable[Formula], budget: int = DEFAULT_BUDGET) -> Optional[TreeModel]:
    """A finite tree whose root satisfies every formula, or None when GL refutes their conjunction."""
    formulas = list(formulas)
    model, _ = _model_of(formulas, budget)
    if model is not None and not all(check_tree(model, model.root, f) for f in formulas):
        raise InternalConsistencyError("tableau model fails its own formulas")
    return model


def consistent(formulas: Iterable[Formula], budget: int = DEFAULT_BUDGET) -> bool:
    return satisfying_model(formulas, budget) is not None


def require_consistent(formulas: Iterable[Formula], budget: int = DEFAULT_BUDGET) -> TreeModel:
    formulas = list(formulas)
    model = satisfying_model(formulas, budget)
    if model is None:
        refuted = to_text(Not(conjunction(formulas)))
        raise InconsistentInputError(f"GL proves {refuted}", refuted=refuted)
    return model


class CharacteristicBound(NamedTuple):
    value: int
    saturated: bool
    model_rank: int

    def __str__(self) -> str:
        return f">={self.value}" if self.saturated else str(self.value)


def characteristic_bound(formulas: Iterable[Formula], cap: int, budget: int = DEFAULT_BUDGET) -> CharacteristicBound:
    """The largest n <= cap with formulas + {<>^n T} consistent, saturated when n = cap."""
    formulas = list(formulas)
    model = require_consistent(formulas, budget)
    if consistent(formulas + [diamond_power(cap)], budget):
        return CharacteristicBound(cap, True, model.rank())
    low, high = 0, cap
    while high - low > 1:
        middle = (low + high) // 2
        if consistent(formulas + [diamond_power(middle)], budget):
            low = middle
        else:
            high = middle
    if model.rank() > low:
        raise InternalConsistencyError(f"model of rank {model.rank()} exceeds characteristic {low}")
    return CharacteristicBound(low, False, model.rank())
