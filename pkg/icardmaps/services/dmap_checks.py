"""
D-map certificate service for icardmaps.
Handles per-point checks of realized d-maps (rank preservation, block
partition, W-set disjointness, local openness) and the selftest that
runs them over a grid of lambdas and bouquets, with optional report files.
"""
import logging
import random
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

from icardmaps.services import file_ops, ordinals
from icardmaps.services.bouquet import BouquetSpec, DaughterRef, child_refs, daughter, format_path, materialize
from icardmaps.services.dmap import (
    DMapSpec,
    Frame,
    BlockFrame,
    LimitFrame,
    SuccessorFrame,
    block_table,
    build,
    eval_trace,
    evaluate,
    preimage_witness,
    sub_spec,
)
from icardmaps.services.errors import IcardError
from icardmaps.services.ordinals import OrdTerm, Ordering3, compare
from icardmaps.services.topology import BasicNbhd, SimpleFn, basic_nbhd_member, rank_lambda

logger = logging.getLogger(__name__)

WITNESS_DEPTH = 4
WITNESS_PREFIX = 8
OPENNESS_DAUGHTERS = 3


def _le(x: OrdTerm, y: OrdTerm) -> bool:
    return compare(x, y) is not Ordering3.GREATER


# ============ Per-Point Checks ============


def rank_preservation_check(s: DMapSpec, xi: OrdTerm) -> bool:
    """The image node's bouquet rank equals the lambda-rank of xi."""
    image = evaluate(s, xi)
    return rank_lambda(s.lam, xi) == image.node.rank


class CheckResult(NamedTuple):
    ok: bool
    detail: str


def partition_check(s: DMapSpec, xi: OrdTerm) -> CheckResult:
    """
    The root block holding xi is well formed.

    At a successor stage: alpha_iota <= xi <= beta_iota, the next block starts
    at beta_iota + 1, and xi lies in exactly one of Y_iota and Z_iota. With
    core 1: xi lies in exactly its located block.
    """
    frame = s.frame(s.bouquet)
    point = ordinals.hyper_log(s.prefix, xi)
    if point == frame.top:
        return CheckResult(True, "top")
    if isinstance(frame, SuccessorFrame):
        iota = frame.locate(point)
        alpha, beta = frame.alpha(iota), frame.beta(iota)
        if not (_le(alpha, point) and _le(point, beta)):
            return CheckResult(False, f"{point} outside X{iota} = [{alpha}, {beta}]")
        if frame.alpha(ordinals.successor(iota)) != ordinals.successor(beta):
            return CheckResult(False, f"X{iota} and its successor block are not adjacent")
        level = ordinals.hyper_log(ordinals.successor(iota), point)
        in_y = _le(level, frame.base)
        z_bound = ordinals.add(frame.seed, frame.part(iota))
        in_z = compare(frame.base, level) is Ordering3.LESS and _le(level, z_bound)
        if in_y == in_z:
            return CheckResult(False, f"{point} in X{iota} is in {'both' if in_y else 'neither'} of Y and Z")
        return CheckResult(True, f"{'Y' if in_y else 'Z'}{iota}")
    if isinstance(frame, BlockFrame):
        i = frame.locate(point)
        if not _le(frame.alpha(i), point):
            return CheckResult(False, f"{point} precedes block {i}")
        if i > 0 and _le(point, frame.beta(i - 1)):
            return CheckResult(False, f"{point} also lies in block {i - 1}")
        return CheckResult(True, f"X{i}")
    return CheckResult(True, frame.stage.value)


def w_check(s: DMapSpec, xi: OrdTerm) -> CheckResult:
    """At a limit-stage root, xi lies in at most one W window and locate_w finds it."""
    frame = s.frame(s.bouquet)
    if not isinstance(frame, LimitFrame):
        return CheckResult(True, frame.stage.value)
    point = ordinals.hyper_log(s.prefix, xi)
    if point == frame.top:
        return CheckResult(True, "top")
    located = frame.locate_w(point)
    segment = frame.segment(point)
    candidates: List[Tuple[int, OrdTerm]] = []
    for j in {max(segment - 3, 0), max(segment - 2, 0), max(segment - 1, 0)}:
        levels = [ordinals.ZERO, ordinals.ONE_TERM, ordinals.nat(2)]
        if located is not None:
            levels += [located[1], ordinals.successor(located[1])]
        for iota in levels:
            if frame.in_w(j, iota, point) and (j, iota) not in candidates:
                candidates.append((j, iota))
    if located is None:
        if candidates:
            return CheckResult(False, f"{point} lies in W{candidates[0]} but locate_w found none")
        return CheckResult(True, f"h{segment}")
    if candidates != [located]:
        return CheckResult(False, f"{point} lies in windows {candidates}, located {located}")
    return CheckResult(True, f"W{located[0]},{located[1]}")


# ============ Local Openness ============


@dataclass
class OpennessReport:
    point: str
    image_path: str
    trivial: bool
    neighborhoods: List[str] = field(default_factory=list)
    daughters: List[str] = field(default_factory=list)
    witnesses: Dict[str, List[str]] = field(default_factory=dict)
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, Any]:
        return {
            "point": self.point,
            "image_path": self.image_path,
            "trivial": self.trivial,
            "neighborhoods": self.neighborhoods,
            "daughters": self.daughters,
            "witnesses": self.witnesses,
            "violations": self.violations,
            "ok": self.ok,
        }


def _sample_levels(rng: random.Random, core: OrdTerm) -> List[OrdTerm]:
    levels = [ordinals.ZERO]
    if core != ordinals.ONE_TERM:
        extra = ordinals.random_ordinal_below(rng, core)
        if extra and extra not in levels:
            levels.append(extra)
    return levels


def _sample_nbhd(rng: random.Random, center: OrdTerm, core: OrdTerm) -> BasicNbhd:
    thresholds = {}
    for level in _sample_levels(rng, core):
        thresholds[level] = ordinals.random_ordinal_below(rng, rank_lambda(level, center))
    return BasicNbhd(center, SimpleFn.from_mapping(thresholds))


def _nbhd_text(b: BasicNbhd) -> str:
    return ", ".join(f"r({level})={threshold}" for level, threshold in b.r) or "r empty"


def local_openness_check(s: DMapSpec, xi: OrdTerm, sample_budget: int, seed: int = 0) -> OpennessReport:
    """
    Spot-check openness of f at xi.

    The check runs in the local coordinates of the image node t, where xi's
    local point is the top of t's frame. For every sampled basic
    neighborhood U of that top it looks for late preimages of t's daughters
    inside U: at successor rank every sampled daughter must be hit, at limit
    rank all daughters from some index on. Every preimage found is pulled
    back through evaluation and must land in its daughter's subtree.
    """
    rng = random.Random(seed)
    trace = eval_trace(s, xi)
    path = tuple(step.ref for step in trace[:-1])
    report = OpennessReport(point=str(xi), image_path=format_path(path), trivial=False)
    local = sub_spec(s, path)
    node = local.bouquet
    if not node.rank:
        report.trivial = True
        return report
    frame = local.frame(node)
    cofinite = ordinals.is_limit(node.rank)
    fixed = child_refs(node, 2)[:OPENNESS_DAUGHTERS]

    for _ in range(sample_budget):
        nbhd = _sample_nbhd(rng, frame.top, local.core)
        report.neighborhoods.append(_nbhd_text(nbhd))
        refs = _tail_daughters(local, frame, nbhd) if cofinite else fixed
        if refs is None:
            report.violations.append(f"no tail of daughters reaches U({_nbhd_text(nbhd)})")
            continue
        for ref in refs:
            if str(ref) not in report.daughters:
                report.daughters.append(str(ref))
            found = _late_witness(local, frame, ref, nbhd, local.search_budget)
            if found is None:
                report.violations.append(f"no preimage of {ref} in U({_nbhd_text(nbhd)})")
                continue
            report.witnesses.setdefault(str(ref), []).append(str(found))
            image = evaluate(local, found)
            if image.path[:1] != (ref,):
                report.violations.append(f"preimage {found} of {ref} evaluates to {image.path_text}")
    logger.debug("openness at %s: %d violations", xi, len(report.violations))
    return report


TAIL_TRIES = 32


def _tail_daughters(local: DMapSpec, frame: Frame, nbhd: BasicNbhd) -> Optional[List[DaughterRef]]:
    # at limit rank U only has to meet the daughters from some index on
    for j in range(local.search_budget):
        if _late_witness(local, frame, frame.enumeration[j], nbhd, TAIL_TRIES) is not None:
            return [frame.enumeration[i] for i in range(j, j + OPENNESS_DAUGHTERS)]
    return None


def _late_witness(local: DMapSpec, frame: Frame, ref: DaughterRef, nbhd: BasicNbhd, tries: int) -> Optional[OrdTerm]:
    witness = local.frame(daughter(frame.node, ref)).top
    for count, candidate in enumerate(frame.late_witnesses(ref, witness)):
        if count >= tries:
            break
        if basic_nbhd_member(candidate, nbhd):
            return candidate
    return None


# ============ Selftest ============


@dataclass
class CertificateReport:
    rank_checks: int = 0
    partition_checks: int = 0
    w_checks: int = 0
    roundtrips: int = 0
    top_checks: int = 0
    failures: List[Dict[str, str]] = field(default_factory=list)
    rows: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, check: str, s: DMapSpec, point: str, detail: str) -> None:
        logger.error("%s failed for lambda=%s on %s at %s: %s", check, s.lam, s.bouquet.node_id, point, detail)
        self.failures.append(
            {"check": check, "lambda": str(s.lam), "bouquet": s.bouquet.node_id, "point": point, "detail": detail}
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rank_checks": self.rank_checks,
            "partition_checks": self.partition_checks,
            "w_checks": self.w_checks,
            "roundtrips": self.roundtrips,
            "top_checks": self.top_checks,
            "failures": self.failures,
            "ok": self.ok,
        }


REPORT_COLUMNS = ["lambda", "bouquet", "theta", "stage", "points", "roundtrips", "failures"]


def sample_points(s: DMapSpec, samples: int, rng: random.Random) -> List[OrdTerm]:
    """Domain top, root block boundaries, then random points below the top."""
    points = [s.top]
    if not s.top:
        return points
    _, rows = block_table(s, 4)
    for row in rows:
        for local in (row.start, row.end):
            point = ordinals.hyper_exp(s.prefix, local)
            if _le(point, s.top):
                points.append(point)
    while len(points) < samples:
        points.append(ordinals.random_ordinal_below(rng, s.top))
    return points


def check_spec(
    s: DMapSpec,
    samples: int,
    rng: random.Random,
    report: CertificateReport,
    depth: int = WITNESS_DEPTH,
    prefix: int = WITNESS_PREFIX,
) -> None:
    """Run every certificate check on one spec, accumulating into report."""
    before = len(report.failures)
    try:
        if evaluate(s, s.top).path != ():
            report.fail("top", s, str(s.top), "domain top does not map to the root")
        report.top_checks += 1
    except IcardError as exc:
        report.fail("top", s, str(s.top), str(exc))

    points = sample_points(s, samples, rng)
    for xi in points:
        for name, check in (("rank", _rank_result), ("partition", partition_check), ("w", w_check)):
            try:
                result = check(s, xi)
            except IcardError as exc:
                report.fail(name, s, str(xi), str(exc))
                continue
            if name == "rank":
                report.rank_checks += 1
            elif name == "partition":
                report.partition_checks += 1
            else:
                report.w_checks += 1
            if not result.ok:
                report.fail(name, s, str(xi), result.detail)

    trips = 0
    for row in materialize(s.bouquet, depth, prefix):
        try:
            preimage_witness(s, row.path)
            trips += 1
        except IcardError as exc:
            report.fail("roundtrip", s, format_path(row.path), str(exc))
    report.roundtrips += trips
    report.rows.append(
        {
            "lambda": str(s.lam),
            "bouquet": s.bouquet.node_id,
            "theta": str(s.theta),
            "stage": s.frame(s.bouquet).stage.value,
            "points": len(points),
            "roundtrips": trips,
            "failures": len(report.failures) - before,
        }
    )


def _rank_result(s: DMapSpec, xi: OrdTerm) -> CheckResult:
    image = evaluate(s, xi)
    expected = rank_lambda(s.lam, xi)
    if expected != image.node.rank:
        return CheckResult(False, f"l^lambda = {expected} but {image.path_text or 'root'} has rank {image.node.rank}")
    return CheckResult(True, image.path_text)


def run_selftest(
    lambdas: Sequence[OrdTerm],
    bouquets: Sequence[BouquetSpec],
    samples: int,
    seed: int = 0,
    search_budget: int = 4096,
    depth: int = WITNESS_DEPTH,
    prefix: int = WITNESS_PREFIX,
) -> CertificateReport:
    """
    Certificate checks over every (lambda, bouquet) pair.

    Args:
        lambdas: Nonzero ordinals
        bouquets: Bouquet specs
        samples: Points sampled per spec (top and block boundaries included)
        seed: Seed for point sampling

    Returns:
        CertificateReport with check counts and failures
    """
    rng = random.Random(seed)
    report = CertificateReport()
    for lam in lambdas:
        for b in bouquets:
            try:
                s = build(lam, b, search_budget=search_budget, check_ranks=True)
            except IcardError as exc:
                report.failures.append(
                    {"check": "build", "lambda": str(lam), "bouquet": b.node_id, "point": "", "detail": str(exc)}
                )
                continue
            check_spec(s, samples, rng, report, depth, prefix)
    logger.info(
        "selftest: %d rank, %d partition, %d w, %d roundtrip checks, %d failures",
        report.rank_checks, report.partition_checks, report.w_checks, report.roundtrips, len(report.failures),
    )
    return report


def save_report(report: CertificateReport, identifier: str, reports_dir: str = file_ops.REPORTS_DIR) -> Tuple[str, str]:
    """Write the report JSON and its CSV summary; returns both filenames."""
    filename = file_ops.create_versioned_filename("selftest", identifier)
    file_ops.write_json(f"{reports_dir}/{filename}", report.to_dict())
    table = filename.rsplit(".", 1)[0] + ".csv"
    file_ops.write_report_table(f"{reports_dir}/{table}", report.rows, REPORT_COLUMNS)
    logger.info("saved selftest report %s", filename)
    return filename, table
