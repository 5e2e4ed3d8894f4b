"""
Bouquet service for icardmaps.
Handles finitely presented omega-bouquets: ranks, daughter enumerations,
dominating subsequences, model checking in the bouquet topology, and the
JSON file format.

A node has finitely many child slots, each with a finite multiplicity or
multiplicity w (infinitely many copies sharing one spec), plus an optional
generated family i -> spec for nodes of limit rank. Nodes inside a bouquet
are addressed by paths of DaughterRef steps.
"""
import enum
import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Dict, FrozenSet, Iterator, List, Mapping, NamedTuple, Optional, Tuple

from icardmaps.services import ordinals
from icardmaps.services.errors import InputError, IntegrityError, OrdinalDomainError
from icardmaps.services.formulas import (
    TOP,
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
    diamond_tower_height,
)
from icardmaps.services.gl_prover import TreeModel, TreeNode, consistent, parse_variable_name
from icardmaps.services.ordinal_parser import parse_ordinal
from icardmaps.services.ordinals import OrdTerm, Ordering3, compare

logger = logging.getLogger(__name__)

FAMILY = -1
RANK_SAMPLE = 4
DEFAULT_SEARCH_BUDGET = 4096
DEFAULT_MC_PREFIX = 8


# ============ Specs ============


@dataclass(frozen=True)
class ChildSlot:
    spec: "BouquetSpec"
    multiplicity: Optional[int] = 1  # None means w copies

    def __post_init__(self):
        if self.multiplicity is not None and self.multiplicity < 1:
            raise InputError(f"multiplicity must be >= 1 or w, got {self.multiplicity}")

    @property
    def infinite(self) -> bool:
        return self.multiplicity is None


@dataclass(frozen=True, eq=False)
class GeneratedFamily:
    """Children i -> generator(i) of a limit-rank node, memoized on first use."""

    schema: str
    params: Mapping[str, Any]
    generator: Callable[[int], "BouquetSpec"] = field(compare=False)
    limit_rank: OrdTerm = ordinals.OMEGA
    cache: Dict[int, "BouquetSpec"] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not ordinals.is_limit(self.limit_rank):
            raise IntegrityError(f"declared family rank {self.limit_rank} is not a limit")

    def member(self, i: int) -> "BouquetSpec":
        if i not in self.cache:
            member = self.generator(i)
            if member.family is not None:
                raise IntegrityError(f"{self.schema} member {i} is not finite")
            self.cache[i] = member
            logger.debug("materialized %s member %d", self.schema, i)
        return self.cache[i]


@dataclass(frozen=True, eq=False)
class BouquetSpec:
    node_id: str
    valuation: FrozenSet[int] = frozenset()
    children: Tuple[ChildSlot, ...] = ()
    family: Optional[GeneratedFamily] = None

    @property
    def is_leaf(self) -> bool:
        return not self.children and self.family is None

    @cached_property
    def rank(self) -> OrdTerm:
        child_ranks = [slot.spec.rank for slot in self.children]
        if self.family is None:
            if not child_ranks:
                return ordinals.ZERO
            return ordinals.successor(ordinals.max_term(*child_ranks))
        declared = self.family.limit_rank
        for child_rank in child_ranks:
            if compare(child_rank, declared) is not Ordering3.LESS:
                raise IntegrityError(f"child of rank {child_rank} at {self.node_id} reaches declared rank {declared}")
        sampled = [self.family.member(i).rank for i in range(RANK_SAMPLE)]
        for i, member_rank in enumerate(sampled):
            if compare(member_rank, declared) is not Ordering3.LESS:
                raise IntegrityError(f"family member {i} of {self.node_id} has rank {member_rank} >= {declared}")
        half = RANK_SAMPLE // 2
        if compare(ordinals.max_term(*sampled[half:]), ordinals.max_term(*sampled[:half])) is not Ordering3.GREATER:
            raise IntegrityError(f"family ranks of {self.node_id} do not grow on the sampled prefix {sampled}")
        return declared


def rank(b: BouquetSpec) -> OrdTerm:
    return b.rank


def leaf(node_id: str, valuation: FrozenSet[int] = frozenset()) -> BouquetSpec:
    return BouquetSpec(node_id, frozenset(valuation))


def chain(length: int, valuation: FrozenSet[int] = frozenset(), prefix: str = "c") -> BouquetSpec:
    """A chain of length nodes (rank length-1), ids prefix.0 (root) ... prefix.(length-1)."""
    if length < 1:
        raise InputError("a chain has at least one node")
    node = leaf(f"{prefix}.{length - 1}", valuation)
    for depth in range(length - 2, -1, -1):
        node = BouquetSpec(f"{prefix}.{depth}", frozenset(valuation), (ChildSlot(node),))
    return node


# ============ Paths ============


class DaughterRef(NamedTuple):
    slot: int
    copy: int

    def __str__(self) -> str:
        return f"{'f' if self.slot == FAMILY else self.slot}.{self.copy}"


Path = Tuple[DaughterRef, ...]


def format_path(path: Path) -> str:
    return "/".join(str(step) for step in path)


def parse_path(text: str) -> Path:
    text = text.strip().strip("/")
    if not text:
        return ()
    steps = []
    for part in text.split("/"):
        try:
            slot_text, copy_text = part.split(".")
            slot = FAMILY if slot_text == "f" else int(slot_text)
            steps.append(DaughterRef(slot, int(copy_text)))
        except ValueError:
            raise InputError(f"invalid path step {part!r}, expected SLOT.COPY or f.INDEX") from None
    return tuple(steps)


def daughter(b: BouquetSpec, ref: DaughterRef) -> BouquetSpec:
    if ref.copy < 0:
        raise InputError(f"negative copy index in {ref}")
    if ref.slot == FAMILY:
        if b.family is None:
            raise InputError(f"{b.node_id} has no generated family")
        return b.family.member(ref.copy)
    if not 0 <= ref.slot < len(b.children):
        raise InputError(f"{b.node_id} has no child slot {ref.slot}")
    slot = b.children[ref.slot]
    if not slot.infinite and ref.copy >= slot.multiplicity:
        raise InputError(f"slot {ref.slot} of {b.node_id} has only {slot.multiplicity} copies")
    return slot.spec


def resolve_path(b: BouquetSpec, path: Path) -> BouquetSpec:
    node = b
    for ref in path:
        node = daughter(node, ref)
    return node


# ============ Enumerations ============


class EnumMode(str, enum.Enum):
    EACH_ONCE = "each_once"
    INFINITELY_OFTEN = "infinitely_often"


def _each_once(b: BouquetSpec) -> Iterator[DaughterRef]:
    for index, slot in enumerate(b.children):
        if not slot.infinite:
            for copy in range(slot.multiplicity):
                yield DaughterRef(index, copy)
    sources = [index for index, slot in enumerate(b.children) if slot.infinite]
    if b.family is not None:
        sources.append(FAMILY)
    if not sources:
        return
    for copy in itertools.count():
        for index in sources:
            yield DaughterRef(index, copy)


def _each_once_is_finite(b: BouquetSpec) -> bool:
    return b.family is None and all(not slot.infinite for slot in b.children)


class DaughterEnum:
    """
    Lazily materialized daughter sequence i -> DaughterRef.

    With lead set, index 0 is lead and index i >= 1 is the base
    enumeration's index i-1. In each-once mode the base skips lead, so
    every daughter still appears exactly once.
    """

    def __init__(self, bouquet: BouquetSpec, mode: EnumMode, lead: Optional[DaughterRef] = None):
        if mode is EnumMode.INFINITELY_OFTEN and bouquet.is_leaf:
            raise InputError(f"{bouquet.node_id} is a leaf: no daughters to enumerate")
        self.bouquet = bouquet
        self.mode = mode
        self.lead = lead
        self._cycle: Optional[List[DaughterRef]] = None
        if mode is EnumMode.INFINITELY_OFTEN and _each_once_is_finite(bouquet):
            self._cycle = list(_each_once(bouquet))
        self._items: List[DaughterRef] = []
        self._source = self._generate()

    def _generate(self) -> Iterator[DaughterRef]:
        if self.lead is not None:
            yield self.lead
        if self.mode is EnumMode.EACH_ONCE:
            yield from (ref for ref in _each_once(self.bouquet) if ref != self.lead)
        else:
            seen: List[DaughterRef] = []
            base = _each_once(self.bouquet)
            for _ in itertools.count():
                seen.append(next(base))
                yield from seen

    @property
    def period(self) -> Optional[int]:
        """p with self[i] == self[i % p] for all i, when the sequence is a plain cycle."""
        if self._cycle is None or self.lead is not None:
            return None
        return len(self._cycle)

    @property
    def length(self) -> Optional[int]:
        if self.mode is EnumMode.EACH_ONCE and _each_once_is_finite(self.bouquet):
            return sum(slot.multiplicity for slot in self.bouquet.children)
        return None

    def __getitem__(self, i: int) -> DaughterRef:
        if i < 0:
            raise IndexError(i)
        if self._cycle is not None:
            if self.lead is not None:
                if i == 0:
                    return self.lead
                i -= 1
            return self._cycle[i % len(self._cycle)]
        while len(self._items) <= i:
            try:
                self._items.append(next(self._source))
            except StopIteration:
                raise IndexError(f"enumeration of {self.bouquet.node_id} has only {len(self._items)} daughters") from None
        return self._items[i]

    def spec(self, i: int) -> BouquetSpec:
        return daughter(self.bouquet, self[i])

    def rank(self, i: int) -> OrdTerm:
        return self.spec(i).rank

    def prefix(self, n: int) -> List[DaughterRef]:
        limit = n if self.length is None else min(n, self.length)
        return [self[i] for i in range(limit)]

    def first_index(self, ref: DaughterRef, budget: int = DEFAULT_SEARCH_BUDGET) -> int:
        daughter(self.bouquet, ref)
        for i in range(budget if self.length is None else min(budget, self.length)):
            if self[i] == ref:
                return i
        raise IntegrityError(f"daughter {ref} of {self.bouquet.node_id} not enumerated within {budget} steps")


def daughters(b: BouquetSpec, mode: EnumMode) -> DaughterEnum:
    return DaughterEnum(b, mode)


class DominatingSubsequence:
    """Greedy m_i: least j > m_(i-1) with rank_j > max(rank_i, rank_m(i-1))."""

    def __init__(self, enumeration: DaughterEnum, budget: int = DEFAULT_SEARCH_BUDGET):
        self.enumeration = enumeration
        self.budget = budget
        self._indices: List[int] = []

    def __getitem__(self, i: int) -> int:
        while len(self._indices) <= i:
            self._extend()
        return self._indices[i]

    def _extend(self) -> None:
        i = len(self._indices)
        enum_ = self.enumeration
        if self._indices:
            previous = self._indices[-1]
            floor = ordinals.max_term(enum_.rank(i), enum_.rank(previous))
        else:
            previous = -1
            floor = enum_.rank(0)
        for j in range(previous + 1, previous + 1 + self.budget):
            try:
                candidate = enum_.rank(j)
            except IndexError:
                break
            if compare(candidate, floor) is Ordering3.GREATER:
                self._indices.append(j)
                logger.debug("dominating subsequence m_%d = %d (rank %s)", i, j, candidate)
                return
        raise IntegrityError(
            f"no daughter of {enum_.bouquet.node_id} dominates index {i} within {self.budget} steps"
        )

    def prefix(self, n: int) -> List[int]:
        return [self[i] for i in range(n)]


def dominating_subsequence(enumeration: DaughterEnum, budget: int = DEFAULT_SEARCH_BUDGET) -> DominatingSubsequence:
    return DominatingSubsequence(enumeration, budget)


# ============ Model Checking ============


class McVerdict(NamedTuple):
    value: bool
    exact: bool
    prefix: int

    def __str__(self) -> str:
        if self.exact:
            return str(self.value)
        return f"{'TrueUpTo' if self.value else 'FalseUpTo'}({self.prefix})"


class _Truth(NamedTuple):
    value: bool
    exact: bool


class _BouquetChecker:
    def __init__(self, prefix: int, budget: int):
        self.prefix = prefix
        self.budget = budget
        self.memo: Dict[Tuple[int, Formula, bool], _Truth] = {}
        self.keep: List[BouquetSpec] = []

    def _remember(self, spec: BouquetSpec, phi: Formula, anywhere: bool, truth: _Truth) -> _Truth:
        self.keep.append(spec)
        self.memo[(id(spec), phi, anywhere)] = truth
        return truth

    def holds(self, spec: BouquetSpec, phi: Formula) -> _Truth:
        key = (id(spec), phi, False)
        if key in self.memo:
            return self.memo[key]
        if isinstance(phi, Top):
            truth = _Truth(True, True)
        elif isinstance(phi, Bottom):
            truth = _Truth(False, True)
        elif isinstance(phi, Var):
            truth = _Truth(phi.index in spec.valuation, True)
        elif isinstance(phi, Not):
            inner = self.holds(spec, phi.sub)
            truth = _Truth(not inner.value, inner.exact)
        elif isinstance(phi, And):
            truth = _conj(self.holds(spec, phi.left), self.holds(spec, phi.right))
        elif isinstance(phi, Or):
            truth = _disj(self.holds(spec, phi.left), self.holds(spec, phi.right))
        elif isinstance(phi, Implies):
            left = self.holds(spec, phi.left)
            truth = _disj(_Truth(not left.value, left.exact), self.holds(spec, phi.right))
        elif isinstance(phi, Box):
            inner = self.diamond(spec, Not(phi.sub))
            truth = _Truth(not inner.value, inner.exact)
        else:
            truth = self.diamond(spec, phi.sub)
        return self._remember(spec, phi, False, truth)

    def diamond(self, spec: BouquetSpec, phi: Formula) -> _Truth:
        if isinstance(phi, Not) and isinstance(phi.sub, Bottom):
            phi = TOP
        height = diamond_tower_height(phi)
        if height is not None:
            # <>^(n+1) T holds exactly at points of rank > n
            return _Truth(compare(spec.rank, ordinals.nat(height)) is Ordering3.GREATER, True)
        if spec.family is None:
            return _any(self.somewhere(slot.spec, phi) for slot in spec.children)
        # cofinitely many daughters: decided by w-slots, refuted structurally, else sampled
        evidence = []
        for slot in spec.children:
            if slot.infinite:
                found = self.somewhere(slot.spec, phi)
                if found.value and found.exact:
                    return found
                evidence.append(found.value)
        if not consistent([phi], self.budget):
            return _Truth(False, True)
        # cofinally many daughters: the latest of the first prefix generated children
        # stands in for the tail, so a witness confined to early members does not count
        if self.prefix > 0:
            evidence.append(self.somewhere(spec.family.member(self.prefix - 1), phi).value)
        return _Truth(any(evidence), False)

    def somewhere(self, spec: BouquetSpec, phi: Formula) -> _Truth:
        """phi at spec or at some node below it."""
        key = (id(spec), phi, True)
        if key in self.memo:
            return self.memo[key]
        parts = [self.holds(spec, phi)]
        parts.extend(self.somewhere(slot.spec, phi) for slot in spec.children)
        truth = _any(parts)
        if spec.family is not None and not (truth.value and truth.exact):
            members = [self.somewhere(spec.family.member(i), phi) for i in range(self.prefix)]
            found = _any(members)
            if found.value:
                truth = _Truth(True, True)
            elif not consistent([phi], self.budget):
                truth = _Truth(False, truth.exact)
            else:
                truth = _Truth(truth.value, False)
        return self._remember(spec, phi, True, truth)


def _conj(left: _Truth, right: _Truth) -> _Truth:
    for part in (left, right):
        if part.exact and not part.value:
            return part
    return _Truth(left.value and right.value, left.exact and right.exact)


def _disj(left: _Truth, right: _Truth) -> _Truth:
    for part in (left, right):
        if part.exact and part.value:
            return part
    return _Truth(left.value or right.value, left.exact and right.exact)


def _any(parts) -> _Truth:
    result = _Truth(False, True)
    for part in parts:
        result = _disj(result, part)
        if result.value and result.exact:
            break
    return result


def mc_bouquet(
    b: BouquetSpec,
    path: Path,
    phi: Formula,
    prefix: int = DEFAULT_MC_PREFIX,
    budget: int = 20000,
) -> McVerdict:
    """
    Truth of phi at the node reached by path.

    Args:
        b: Bouquet
        path: Daughter steps from the root
        phi: Formula
        prefix: Generated family members examined at limit-rank nodes

    Returns:
        McVerdict; inexact verdicts are qualified by the prefix.
    """
    node = resolve_path(b, path)
    truth = _BouquetChecker(prefix, budget).holds(node, phi)
    return McVerdict(truth.value, truth.exact, prefix)


# ============ Inspection ============


class MaterializedNode(NamedTuple):
    path: Path
    node_id: str
    rank: OrdTerm
    valuation: FrozenSet[int]


def child_refs(b: BouquetSpec, prefix: int) -> List[DaughterRef]:
    """Daughters of b, with w-slots and the family cut at prefix copies."""
    refs = []
    for index, slot in enumerate(b.children):
        copies = prefix if slot.infinite else slot.multiplicity
        refs.extend(DaughterRef(index, copy) for copy in range(copies))
    if b.family is not None:
        refs.extend(DaughterRef(FAMILY, i) for i in range(prefix))
    return refs


def materialize(b: BouquetSpec, depth: int, prefix: int) -> List[MaterializedNode]:
    rows: List[MaterializedNode] = []

    def visit(node: BouquetSpec, path: Path) -> None:
        rows.append(MaterializedNode(path, node.node_id, node.rank, node.valuation))
        if len(path) >= depth:
            return
        for ref in child_refs(node, prefix):
            visit(daughter(node, ref), path + (ref,))

    visit(b, ())
    return rows


# ============ Conversions ============


def from_tree_model(model: TreeModel, prefix: str = "") -> BouquetSpec:
    def build(node_id: int) -> BouquetSpec:
        node = model.node(node_id)
        children = tuple(ChildSlot(build(child)) for child in node.children)
        return BouquetSpec(f"{prefix}{node_id}", node.valuation, children)

    return build(model.root)


def to_tree_model(b: BouquetSpec) -> TreeModel:
    if not _is_finite_tree(b):
        raise InputError(f"{b.node_id} is not a finite tree")
    nodes: List[TreeNode] = []
    counter = itertools.count()

    def visit(spec: BouquetSpec) -> int:
        node_id = next(counter)
        child_ids = []
        for ref in child_refs(spec, 0):
            child_ids.append(visit(daughter(spec, ref)))
        nodes.append(TreeNode(node_id, spec.valuation, tuple(child_ids)))
        return node_id

    root = visit(b)
    return TreeModel(tuple(sorted(nodes, key=lambda n: n.id)), root)


def _is_finite_tree(b: BouquetSpec) -> bool:
    if b.family is not None:
        return False
    return all(not slot.infinite and _is_finite_tree(slot.spec) for slot in b.children)


# ============ Families and JSON ============


def chain_family(params: Mapping[str, Any]) -> GeneratedFamily:
    start = int(params.get("start", 0))
    step = int(params.get("step", 1))
    if start < 0 or step < 1:
        raise InputError("chain family needs start >= 0 and step >= 1")
    valuation = frozenset(parse_variable_name(name) for name in params.get("val", []))

    def member(i: int) -> BouquetSpec:
        return chain(start + step * i + 1, valuation, prefix=f"chain{i}")

    return GeneratedFamily("chain", dict(params), member)


def make_family(schema: str, params: Mapping[str, Any], limit_rank: OrdTerm = ordinals.OMEGA) -> GeneratedFamily:
    if schema == "chain":
        family = chain_family(params)
    elif schema == "prover":
        from icardmaps.services.satisfy import prover_family

        family = prover_family(params)
    else:
        raise InputError(f"unknown family schema {schema!r}")
    if limit_rank != family.limit_rank:
        family = GeneratedFamily(family.schema, family.params, family.generator, limit_rank)
    return family


def bouquet_from_json(data: Mapping[str, Any], default_id: str = "r") -> BouquetSpec:
    """Build a spec from nested {"id", "val", "mult", "children", "family"} objects."""
    if not isinstance(data, Mapping):
        raise InputError(f"bouquet node must be an object, got {type(data).__name__}")
    node_id = str(data.get("id", default_id))
    valuation = frozenset(parse_variable_name(name) for name in data.get("val", []))
    slots = []
    for index, child in enumerate(data.get("children", [])):
        spec = bouquet_from_json(child, f"{node_id}.{index}")
        slots.append(ChildSlot(spec, _parse_multiplicity(child.get("mult", 1))))
    family = None
    if data.get("family") is not None:
        entry = data["family"]
        try:
            limit_rank = parse_ordinal(str(entry.get("limit_rank", "w")))
            family = make_family(entry["schema"], entry.get("params", {}), limit_rank)
        except KeyError as exc:
            raise InputError(f"family of {node_id} is missing {exc}") from exc
    return BouquetSpec(node_id, valuation, tuple(slots), family)


def _parse_multiplicity(value: Any) -> Optional[int]:
    if value in ("w", "omega"):
        return None
    try:
        return int(value)
    except (TypeError, ValueError):
        raise InputError(f"multiplicity must be a positive integer or 'w', got {value!r}") from None


def bouquet_to_json(b: BouquetSpec) -> Dict[str, Any]:
    data: Dict[str, Any] = {"id": b.node_id, "val": [f"p{i}" for i in sorted(b.valuation)]}
    if b.children:
        data["children"] = []
        for slot in b.children:
            child = bouquet_to_json(slot.spec)
            child["mult"] = "w" if slot.infinite else slot.multiplicity
            data["children"].append(child)
    if b.family is not None:
        data["family"] = {
            "schema": b.family.schema,
            "params": dict(b.family.params),
            "limit_rank": str(b.family.limit_rank),
        }
    return data
