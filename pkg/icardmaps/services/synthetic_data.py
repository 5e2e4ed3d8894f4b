"""
Synthetic data generation service for icardmaps.
Generates sample bouquets, random tree models and random formulas for
selftests, fuzzing and the default data directory, plus exhaustive
enumerations of small trees and formulas for the semantic oracles.
"""
import itertools
import random
from typing import Callable, Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

from icardmaps.services import ordinals
from icardmaps.services.bouquet import BouquetSpec, ChildSlot, chain, chain_family, leaf
from icardmaps.services.formulas import (
    BOTTOM,
    TOP,
    And,
    Box,
    Diamond,
    Formula,
    Implies,
    Not,
    Or,
    Var,
)
from icardmaps.services.gl_prover import DEFAULT_BUDGET, TreeModel, TreeNode, consistent
from icardmaps.services.ordinal_parser import parse_ordinal

SAMPLE_LAMBDAS = ["1", "w", "w^(2)", "w+1"]


def sample_bouquets() -> Dict[str, BouquetSpec]:
    """
    The six bouquets used by the selftest.

    Ranks 0, 1, 2 and 3 (the last with an w-multiplicity slot), a rank-w root
    over chains of every length, and a rank w+1 root above it.
    """
    two_leaves = BouquetSpec("two", frozenset(), (ChildSlot(leaf("two.0", frozenset({0}))), ChildSlot(leaf("two.1"))))
    spread = BouquetSpec(
        "spread",
        frozenset(),
        (ChildSlot(chain(3, prefix="spread.c")), ChildSlot(leaf("spread.l", frozenset({1})), None)),
    )
    chains = BouquetSpec("chains", frozenset(), (), chain_family({"start": 0, "step": 1}))
    above = BouquetSpec(
        "above",
        frozenset({0}),
        (ChildSlot(BouquetSpec("above.chains", frozenset(), (), chain_family({"start": 0, "step": 1}))), ChildSlot(leaf("above.l"))),
    )
    return {
        "leaf": leaf("leaf"),
        "two": two_leaves,
        "chain3": chain(3, prefix="chain3"),
        "spread": spread,
        "chains": chains,
        "above": above,
    }


def sample_lambdas() -> List[ordinals.OrdTerm]:
    return [parse_ordinal(text) for text in SAMPLE_LAMBDAS]


def random_tree_model(rng: random.Random, max_nodes: int = 8, variables: int = 3) -> TreeModel:
    """A random rooted tree, parents numbered before children, with random valuations."""
    count = rng.randint(1, max_nodes)
    children: Dict[int, List[int]] = {0: []}
    for node_id in range(1, count):
        parent = rng.randrange(node_id)
        children[parent].append(node_id)
        children[node_id] = []
    nodes = []
    for node_id in range(count):
        valuation = frozenset(v for v in range(variables) if rng.random() < 0.5)
        nodes.append(TreeNode(node_id, valuation, tuple(children[node_id])))
    return TreeModel(tuple(nodes), 0)


def random_formula(rng: random.Random, depth: int = 3, variables: int = 2) -> Formula:
    if depth <= 0 or rng.random() < 0.25:
        roll = rng.random()
        if roll < 0.1:
            return TOP
        if roll < 0.15:
            return BOTTOM
        return Var(rng.randrange(variables))
    kind = rng.choice(["not", "and", "or", "implies", "box", "diamond"])
    if kind == "not":
        return Not(random_formula(rng, depth - 1, variables))
    if kind == "box":
        return Box(random_formula(rng, depth - 1, variables))
    if kind == "diamond":
        return Diamond(random_formula(rng, depth - 1, variables))
    left = random_formula(rng, depth - 1, variables)
    right = random_formula(rng, depth - 1, variables)
    return {"and": And, "or": Or, "implies": Implies}[kind](left, right)


def random_consistent_set(
    rng: random.Random,
    size: int = 3,
    depth: int = 3,
    variables: int = 2,
    budget: int = DEFAULT_BUDGET,
    attempts: int = 50,
) -> Optional[List[Formula]]:
    """Random formulas kept only while the set stays GL-consistent."""
    chosen: List[Formula] = []
    for _ in range(attempts):
        if len(chosen) >= size:
            break
        candidate = random_formula(rng, depth, variables)
        if consistent(chosen + [candidate], budget):
            chosen.append(candidate)
    return chosen or None


# ============ Exhaustive Enumeration ============


def tree_shapes(max_nodes: int) -> Iterator[Tuple[int, ...]]:
    """
    Parent arrays of rooted trees with up to max_nodes nodes.

    Node i > 0 hangs below parents[i-1]; parents never decrease, which is
    breadth-first numbering, so every tree shape occurs at least once.
    """
    for count in range(1, max_nodes + 1):
        yield from _parent_arrays(count - 1, 0, ())


def _parent_arrays(remaining: int, low: int, prefix: Tuple[int, ...]) -> Iterator[Tuple[int, ...]]:
    if not remaining:
        yield prefix
        return
    node_id = len(prefix) + 1
    for parent in range(low, node_id):
        yield from _parent_arrays(remaining - 1, parent, prefix + (parent,))


def tree_from_parents(parents: Sequence[int], valuations: Sequence[FrozenSet[int]]) -> TreeModel:
    children: Dict[int, List[int]] = {node_id: [] for node_id in range(len(parents) + 1)}
    for child, parent in enumerate(parents, start=1):
        children[parent].append(child)
    nodes = tuple(TreeNode(node_id, valuations[node_id], tuple(children[node_id])) for node_id in children)
    return TreeModel(nodes, 0)


def all_tree_models(max_nodes: int, variables: int) -> Iterator[TreeModel]:
    """Every tree shape up to max_nodes under every valuation of p0..p(variables-1)."""
    labels = [frozenset(chosen) for k in range(variables + 1) for chosen in itertools.combinations(range(variables), k)]
    for parents in tree_shapes(max_nodes):
        for valuations in itertools.product(labels, repeat=len(parents) + 1):
            yield tree_from_parents(parents, valuations)


def all_formulas(
    max_connectives: int,
    variables: int,
    unary: Sequence[Callable[[Formula], Formula]] = (Not, Box, Diamond),
    binary: Sequence[Callable[[Formula, Formula], Formula]] = (And,),
    bottom: bool = True,
) -> List[Formula]:
    """All formulas with at most max_connectives connectives over the given atoms and operators."""
    atoms: List[Formula] = [Var(i) for i in range(variables)]
    if bottom:
        atoms.append(BOTTOM)
    by_size: List[List[Formula]] = [atoms]
    for n in range(1, max_connectives + 1):
        layer = [op(sub) for op in unary for sub in by_size[n - 1]]
        for k in range(n):
            for op in binary:
                layer.extend(op(left, right) for left in by_size[k] for right in by_size[n - 1 - k])
        by_size.append(layer)
    return [phi for layer in by_size for phi in layer]
