"""
D-map service for icardmaps.
Handles the surjective d-maps f from the ordinal Icard space
(e^lambda(Theta) + 1, lambda) onto an omega-bouquet of rank Theta:
point evaluation, block and W-set location, preimage witnesses and the
block tables shown by the CLI.

lambda = a + w^b is reduced to its indecomposable part: f(xi) is the
w^b-map evaluated at l^a(xi). Each bouquet node then gets a frame that
splits its local domain [0, e^core(rank)] among its daughters:

    leaf        domain {0}
    blocks      core = 1: consecutive blocks [alpha_i, alpha_i + e(theta_i)]
    successor   core >= w, rank Theta+1: blocks X_iota split into Y and Z
    limit       core >= w, limit rank: segments of h plus the W windows
"""
import enum
import logging
from typing import Dict, Iterator, List, NamedTuple, Optional, Tuple

from icardmaps.services import ordinals
from icardmaps.services.bouquet import (
    DEFAULT_SEARCH_BUDGET,
    BouquetSpec,
    DaughterEnum,
    DaughterRef,
    DominatingSubsequence,
    EnumMode,
    Path,
    daughter,
    format_path,
    resolve_path,
)
from icardmaps.services.errors import BudgetExceededError, InternalConsistencyError, OrdinalDomainError
from icardmaps.services.ordinals import OrdTerm, Ordering3, compare

logger = logging.getLogger(__name__)


class Stage(str, enum.Enum):
    LEAF = "leaf"
    BLOCKS = "blocks"
    SUCCESSOR = "successor"
    LIMIT = "limit"


class Descent(NamedTuple):
    """One recursion step: which daughter, and the point handed to it."""

    ref: DaughterRef
    point: OrdTerm
    block: str


def _le(x: OrdTerm, y: OrdTerm) -> bool:
    return compare(x, y) is not Ordering3.GREATER


def _lt(x: OrdTerm, y: OrdTerm) -> bool:
    return compare(x, y) is Ordering3.LESS


def _fail(message: str) -> InternalConsistencyError:
    logger.error(message)
    return InternalConsistencyError(message)


# ============ Frames ============


class Frame:
    stage: Stage

    def __init__(self, spec: "DMapSpec", node: BouquetSpec):
        self.spec = spec
        self.node = node
        self.core = spec.core
        self.rank = node.rank
        self.top = ordinals.hyper_exp(self.core, self.rank)
        self.enumeration: Optional[DaughterEnum] = None

    def daughter_top(self, ref: DaughterRef) -> OrdTerm:
        return self.spec.frame(daughter(self.node, ref)).top

    def descend(self, point: OrdTerm) -> Descent:
        raise NotImplementedError

    def lift(self, ref: DaughterRef, witness: OrdTerm) -> OrdTerm:
        raise NotImplementedError

    def late_witnesses(self, ref: DaughterRef, witness: OrdTerm) -> Iterator[OrdTerm]:
        """Points mapping into ref's subtree that converge to the frame top."""
        raise NotImplementedError


class LeafFrame(Frame):
    stage = Stage.LEAF

    def descend(self, point: OrdTerm) -> Descent:
        raise _fail(f"leaf {self.node.node_id} has no points below its top")


class BlockFrame(Frame):
    """core = 1: blocks [alpha_i, alpha_i + e(theta_i)] with alpha_(i+1) = beta_i + 1."""

    stage = Stage.BLOCKS

    def __init__(self, spec: "DMapSpec", node: BouquetSpec):
        super().__init__(spec, node)
        mode = EnumMode.INFINITELY_OFTEN if ordinals.is_successor(self.rank) else EnumMode.EACH_ONCE
        self.enumeration = DaughterEnum(node, mode)
        self._alphas: List[OrdTerm] = [ordinals.ZERO]

    def alpha(self, i: int) -> OrdTerm:
        period = self.enumeration.period
        if period is not None and i > period:
            # a cyclic enumeration repeats the same run of blocks every period
            cycles, r = divmod(i, period)
            return ordinals.add(ordinals.times_nat(self.alpha(period), cycles), self.alpha(r))
        while len(self._alphas) <= i:
            self._alphas.append(ordinals.successor(self.beta(len(self._alphas) - 1)))
        return self._alphas[i]

    def beta(self, i: int) -> OrdTerm:
        return ordinals.add(self.alpha(i), ordinals.hyper_exp(ordinals.ONE_TERM, self.enumeration.rank(i)))

    def locate(self, point: OrdTerm) -> int:
        period = self.enumeration.period
        if period is not None:
            return self._locate_cyclic(point, period)
        for i in range(self.spec.search_budget):
            if _le(point, self.beta(i)):
                return i
        raise BudgetExceededError(f"no block of {self.node.node_id} reaches {point} within {self.spec.search_budget}")

    def _locate_cyclic(self, point: OrdTerm, period: int) -> int:
        span = self.alpha(period)
        head, per_cycle = span.summands[0]
        coefficient = 0
        if point and ordinals.compare_summands(ordinals.leading(point), head) is Ordering3.EQUAL:
            coefficient = point.summands[0][1]
        cycles = coefficient // per_cycle
        if cycles and not _le(ordinals.times_nat(span, cycles), point):
            cycles -= 1
        offset = ordinals.left_subtract(ordinals.times_nat(span, cycles), point)
        for r in range(period):
            if _le(offset, self.beta(r)):
                logger.debug("located %s in block %d of %s", point, cycles * period + r, self.node.node_id)
                return cycles * period + r
        raise _fail(f"{point} lies past every block of cycle {cycles} of {self.node.node_id}")

    def descend(self, point: OrdTerm) -> Descent:
        i = self.locate(point)
        local = ordinals.left_subtract(self.alpha(i), point)
        return Descent(self.enumeration[i], local, f"X{i}")

    def lift(self, ref: DaughterRef, witness: OrdTerm) -> OrdTerm:
        return ordinals.add(self.alpha(self.enumeration.first_index(ref, self.spec.search_budget)), witness)

    def late_witnesses(self, ref: DaughterRef, witness: OrdTerm) -> Iterator[OrdTerm]:
        if self.enumeration.mode is EnumMode.EACH_ONCE:
            yield self.lift(ref, witness)
            return
        for i in range(self.spec.search_budget):
            if self.enumeration[i] == ref:
                yield ordinals.add(self.alpha(i), witness)


class SuccessorFrame(Frame):
    """
    Rank Theta+1 over core >= w. With E = e^core(Theta):
      alpha_iota = e^iota(E+1) at limit iota, beta_iota + 1 at successors,
      beta_iota = e^(iota+1)(E + 1 + e^core(theta_k(iota))),
      Y_iota: l^(iota+1) xi <= E, sent to daughter 0 (rank Theta),
      Z_iota: the rest, sent to daughter k(iota) at l^(iota+2) xi.
    """

    stage = Stage.SUCCESSOR

    def __init__(self, spec: "DMapSpec", node: BouquetSpec):
        super().__init__(spec, node)
        self.inner = ordinals.predecessor(self.rank)
        self.base = ordinals.hyper_exp(self.core, self.inner)
        self.seed = ordinals.successor(self.base)
        self.enumeration = DaughterEnum(node, EnumMode.INFINITELY_OFTEN, lead=self._leading_daughter())

    def _leading_daughter(self) -> DaughterRef:
        each = DaughterEnum(self.node, EnumMode.EACH_ONCE)
        limit = self.spec.search_budget if each.length is None else min(self.spec.search_budget, each.length)
        for i in range(limit):
            if each.rank(i) == self.inner:
                return each[i]
        raise BudgetExceededError(f"{self.node.node_id} has no daughter of rank {self.inner} within {limit} steps")

    def part(self, iota: OrdTerm) -> OrdTerm:
        return ordinals.hyper_exp(self.core, self.enumeration.rank(ordinals.finite_remainder(iota)))

    def alpha(self, iota: OrdTerm) -> OrdTerm:
        if not iota:
            return ordinals.ZERO
        if ordinals.is_limit(iota):
            return ordinals.hyper_exp(iota, self.seed)
        return ordinals.successor(self.beta(ordinals.predecessor(iota)))

    def beta(self, iota: OrdTerm) -> OrdTerm:
        return ordinals.hyper_exp(ordinals.successor(iota), ordinals.add(self.seed, self.part(iota)))

    def locate(self, point: OrdTerm) -> OrdTerm:
        # e^iota(seed) <= alpha_iota and beta_iota < e^(iota+2)(seed), so with m the
        # largest degree where e^m(seed) <= point the block is m-1 or m
        floor = ordinals.max_limit_exponent(self.seed, point, self.core)
        found = ordinals.max_degree_below(self.seed, point)
        if found is None:
            candidates = [ordinals.ZERO]
        else:
            top = found.maximum()
            if top is None:
                raise _fail(f"{point} has no largest degree over {self.seed}")
            candidates = [ordinals.predecessor(top), top] if ordinals.is_successor(top) else [top]
        for iota in candidates:
            if ordinals.limit_part(iota) != floor:
                continue
            if _le(self.alpha(iota), point) and _le(point, self.beta(iota)):
                logger.debug("located %s in block %s of %s", point, iota, self.node.node_id)
                return iota
        raise _fail(f"{point} lies in no block X_iota of {self.node.node_id} for iota in {candidates}")

    def in_y(self, iota: OrdTerm, point: OrdTerm) -> bool:
        return _le(ordinals.hyper_log(ordinals.successor(iota), point), self.base)

    def descend(self, point: OrdTerm) -> Descent:
        iota = self.locate(point)
        level = ordinals.hyper_log(ordinals.successor(iota), point)
        if _le(level, self.base):
            return Descent(self.enumeration[0], level, f"Y{iota}")
        if not _le(level, ordinals.add(self.seed, self.part(iota))):
            raise _fail(f"{point} in Z{iota} has {ordinals.successor(iota)}-log {level} above its bound")
        k = ordinals.finite_remainder(iota)
        local = ordinals.end_log(level)
        return Descent(self.enumeration[k], local, f"Z{iota}")

    def _z_point(self, iota: OrdTerm, witness: OrdTerm) -> OrdTerm:
        inner = self.seed if not witness else ordinals.add(self.seed, ordinals.omega_power(witness))
        return ordinals.hyper_exp(ordinals.successor(iota), inner)

    def lift(self, ref: DaughterRef, witness: OrdTerm) -> OrdTerm:
        i = self.enumeration.first_index(ref, self.spec.search_budget)
        return self._z_point(ordinals.nat(i), witness)

    def late_witnesses(self, ref: DaughterRef, witness: OrdTerm) -> Iterator[OrdTerm]:
        for n in range(1, self.spec.search_budget):
            base = ordinals.fund_seq(self.core, n)
            start = ordinals.finite_remainder(base) + n
            for i in range(start, start + self.spec.search_budget):
                if self.enumeration[i] == ref:
                    yield self._z_point(ordinals.add(ordinals.limit_part(base), ordinals.nat(i)), witness)
                    break


class LimitFrame(Frame):
    """
    Limit rank over core >= w, daughters enumerated once, m dominating.
    Outside the W windows the map is h: segment (B_(i-1), B_i] goes to
    daughter m_i, where B_i = e^core(theta_(m_i)). With A = B_(j+1),
    B = B_j and C = e^core(theta_j):
      gamma_(j,iota) = A + e^iota(B+1)
      delta_(j,iota) = gamma_(j,iota) + e^iota(B+1+C)
      W_(j,iota) = (gamma, delta]_0 & (B, A+1+C]_iota, sent to daughter j.
    """

    stage = Stage.LIMIT

    def __init__(self, spec: "DMapSpec", node: BouquetSpec):
        super().__init__(spec, node)
        self.enumeration = DaughterEnum(node, EnumMode.EACH_ONCE)
        self.dominating = DominatingSubsequence(self.enumeration, spec.search_budget)

    def part(self, j: int) -> OrdTerm:
        return ordinals.hyper_exp(self.core, self.enumeration.rank(j))

    def breakpoint(self, i: int) -> OrdTerm:
        return self.part(self.dominating[i])

    def window(self, j: int) -> Tuple[OrdTerm, OrdTerm, OrdTerm]:
        return self.breakpoint(j + 1), self.breakpoint(j), self.part(j)

    def gamma(self, j: int, iota: OrdTerm) -> OrdTerm:
        upper, lower, _ = self.window(j)
        return ordinals.add(upper, ordinals.hyper_exp(iota, ordinals.successor(lower)))

    def delta(self, j: int, iota: OrdTerm) -> OrdTerm:
        _, lower, part = self.window(j)
        width = ordinals.hyper_exp(iota, ordinals.add(ordinals.successor(lower), part))
        return ordinals.add(self.gamma(j, iota), width)

    def in_w(self, j: int, iota: OrdTerm, point: OrdTerm) -> bool:
        if not _lt(iota, self.core):
            return False
        upper, lower, part = self.window(j)
        if not (_lt(self.gamma(j, iota), point) and _le(point, self.delta(j, iota))):
            return False
        level = ordinals.hyper_log(iota, point)
        return _lt(lower, level) and _le(level, ordinals.add(ordinals.successor(upper), part))

    def segment(self, point: OrdTerm) -> int:
        for i in range(self.spec.search_budget):
            if _le(point, self.breakpoint(i)):
                return i
        raise BudgetExceededError(f"no segment of {self.node.node_id} reaches {point} within {self.spec.search_budget}")

    def locate_w(self, point: OrdTerm) -> Optional[Tuple[int, OrdTerm]]:
        i = self.segment(point)
        if i < 2:
            return None
        j = i - 2
        upper, lower, _ = self.window(j)
        offset = ordinals.left_subtract(upper, point)
        found = ordinals.max_degree_below(ordinals.successor(lower), offset, strict=True)
        if found is None or found.contains(self.core):
            return None
        iota = found.maximum()
        if iota is None or not self.in_w(j, iota, point):
            return None
        return j, iota

    def descend(self, point: OrdTerm) -> Descent:
        located = self.locate_w(point)
        if located is not None:
            j, iota = located
            local = ordinals.hyper_log(ordinals.successor(iota), point)
            if not _le(local, self.part(j)):
                raise _fail(f"{point} in W({j},{iota}) has log {local} above {self.part(j)}")
            return Descent(self.enumeration[j], local, f"W{j},{iota}")
        i = self.segment(point)
        return Descent(self.enumeration[self.dominating[i]], point, f"h{i}")

    def _w_point(self, j: int, iota: OrdTerm, witness: OrdTerm) -> OrdTerm:
        upper, lower, part = self.window(j)
        if not witness and not part:
            return self.delta(j, iota)
        inner = ordinals.add(ordinals.successor(lower), ordinals.omega_power(witness))
        return ordinals.add(upper, ordinals.hyper_exp(iota, inner))

    def lift(self, ref: DaughterRef, witness: OrdTerm) -> OrdTerm:
        j = self.enumeration.first_index(ref, self.spec.search_budget)
        return self._w_point(j, ordinals.ONE_TERM, witness)

    def late_witnesses(self, ref: DaughterRef, witness: OrdTerm) -> Iterator[OrdTerm]:
        j = self.enumeration.first_index(ref, self.spec.search_budget)
        for n in range(1, self.spec.search_budget):
            iota = ordinals.successor(ordinals.fund_seq(self.core, n))
            yield self._w_point(j, iota, witness)


# ============ Specs ============


class DMapImage(NamedTuple):
    path: Path
    node: BouquetSpec

    @property
    def path_text(self) -> str:
        return format_path(self.path)


class EvalStep(NamedTuple):
    node_id: str
    stage: Stage
    block: str
    point: OrdTerm
    ref: Optional[DaughterRef]


class DMapSpec:
    """
    A realized d-map onto a bouquet.

    Frames are built lazily per bouquet node and cached, so enumerations
    and dominating subsequences are fixed once per spec.
    """

    def __init__(
        self,
        lam: OrdTerm,
        bouquet: BouquetSpec,
        search_budget: int = DEFAULT_SEARCH_BUDGET,
        check_ranks: bool = False,
    ):
        if not lam:
            raise OrdinalDomainError("a d-map needs lambda > 0")
        self.lam = lam
        self.prefix, exponent = ordinals.split_lambda(lam)
        self.core = ordinals.omega_power(exponent)
        self.bouquet = bouquet
        self.theta = bouquet.rank
        self.top = ordinals.hyper_exp(lam, self.theta)
        self.search_budget = search_budget
        self.check_ranks = check_ranks
        self._frames: Dict[int, Tuple[BouquetSpec, Frame]] = {}

    def frame(self, node: BouquetSpec) -> Frame:
        entry = self._frames.get(id(node))
        if entry is None:
            entry = (node, _make_frame(self, node))
            self._frames[id(node)] = entry
        return entry[1]

    def __repr__(self) -> str:
        return f"DMapSpec(lambda={self.lam}, root={self.bouquet.node_id}, Theta={self.theta})"


def _make_frame(spec: DMapSpec, node: BouquetSpec) -> Frame:
    rank_ = node.rank
    if not rank_:
        return LeafFrame(spec, node)
    if spec.core == ordinals.ONE_TERM:
        return BlockFrame(spec, node)
    if ordinals.is_successor(rank_):
        return SuccessorFrame(spec, node)
    return LimitFrame(spec, node)


def build(lam: OrdTerm, b: BouquetSpec, search_budget: int = DEFAULT_SEARCH_BUDGET, check_ranks: bool = False) -> DMapSpec:
    spec = DMapSpec(lam, b, search_budget, check_ranks)
    logger.debug("built %r with top %s", spec, spec.top)
    return spec


def sub_spec(s: DMapSpec, path: Path) -> DMapSpec:
    """The map onto the sub-bouquet at path over the indecomposable part of lambda."""
    return DMapSpec(s.core, resolve_path(s.bouquet, path), s.search_budget, s.check_ranks)


# ============ Evaluation ============


def eval_trace(s: DMapSpec, xi: OrdTerm) -> List[EvalStep]:
    """Recursion steps for f(xi), ending with the image node."""
    if compare(xi, s.top) is Ordering3.GREATER:
        raise OrdinalDomainError(f"{xi} lies above the domain top {s.top}")
    point = ordinals.hyper_log(s.prefix, xi)
    node = s.bouquet
    steps: List[EvalStep] = []
    while True:
        frame = s.frame(node)
        if point == frame.top:
            steps.append(EvalStep(node.node_id, frame.stage, "top", point, None))
            return steps
        descent = frame.descend(point)
        steps.append(EvalStep(node.node_id, frame.stage, descent.block, point, descent.ref))
        node, point = daughter(node, descent.ref), descent.point
        if compare(point, s.frame(node).top) is Ordering3.GREATER:
            raise _fail(f"{descent.block} of {steps[-1].node_id} sent {steps[-1].point} beyond {node.node_id}")


def evaluate(s: DMapSpec, xi: OrdTerm) -> DMapImage:
    """f(xi) as a path from the root."""
    steps = eval_trace(s, xi)
    path = tuple(step.ref for step in steps[:-1])
    image = DMapImage(path, resolve_path(s.bouquet, path))
    if s.check_ranks and ordinals.hyper_log(s.lam, xi) != image.node.rank:
        raise _fail(f"rank not preserved at {xi}: {ordinals.hyper_log(s.lam, xi)} vs {image.node.rank}")
    return image


def locate_block_succ(s: DMapSpec, xi: OrdTerm) -> OrdTerm:
    """Block index iota with alpha_iota <= xi <= beta_iota at a successor-stage root."""
    frame = s.frame(s.bouquet)
    if not isinstance(frame, SuccessorFrame):
        raise OrdinalDomainError(f"root of {s!r} is not at a successor stage")
    return frame.locate(ordinals.hyper_log(s.prefix, xi))


def locate_w(s: DMapSpec, xi: OrdTerm) -> Optional[Tuple[int, OrdTerm]]:
    """(j, iota) with xi in W_(j,iota) at a limit-stage root, or None."""
    frame = s.frame(s.bouquet)
    if not isinstance(frame, LimitFrame):
        raise OrdinalDomainError(f"root of {s!r} is not at a limit stage")
    return frame.locate_w(ordinals.hyper_log(s.prefix, xi))


def preimage_witness(s: DMapSpec, path: Path) -> OrdTerm:
    """
    A point that f sends to the node at path.

    Args:
        s: D-map spec
        path: Daughter steps from the root

    Returns:
        Witness xi, verified by evaluating it.
    """
    nodes = [s.bouquet]
    for ref in path:
        nodes.append(daughter(nodes[-1], ref))
    witness = s.frame(nodes[-1]).top
    for parent, ref in reversed(list(zip(nodes, path))):
        witness = s.frame(parent).lift(ref, witness)
    xi = ordinals.hyper_exp(s.prefix, witness)
    image = evaluate(s, xi)
    if image.path != tuple(path):
        raise _fail(f"witness {xi} for {format_path(path)} evaluates to {image.path_text}")
    return xi


# ============ Block Tables ============


class BlockRow(NamedTuple):
    index: str
    start: OrdTerm
    end: OrdTerm
    daughter: DaughterRef


def block_table(s: DMapSpec, count: int) -> Tuple[Stage, List[BlockRow]]:
    """First blocks of the root frame: (alpha, beta) per block, or (gamma, delta) of W_(j,1) at a limit stage."""
    frame = s.frame(s.bouquet)
    rows: List[BlockRow] = []
    if isinstance(frame, BlockFrame):
        rows = [BlockRow(str(i), frame.alpha(i), frame.beta(i), frame.enumeration[i]) for i in range(count)]
    elif isinstance(frame, SuccessorFrame):
        for i in range(count):
            iota = ordinals.nat(i)
            rows.append(BlockRow(str(i), frame.alpha(iota), frame.beta(iota), frame.enumeration[i]))
    elif isinstance(frame, LimitFrame):
        for j in range(count):
            rows.append(BlockRow(f"W{j},1", frame.gamma(j, ordinals.ONE_TERM), frame.delta(j, ordinals.ONE_TERM), frame.enumeration[j]))
    return frame.stage, rows
