"""
Command dispatch shared by the CLI and the HTTP routers.
Each command parses its text inputs, calls the domain services and returns
a JSON-ready dict. Commands with a yes/no answer carry it under "ok"; a
False "ok" is a negative verdict, not an error.
"""
import logging
from typing import Any, Dict, Mapping, Optional, Sequence

from icardmaps.services import file_ops, ordinals
from icardmaps.services.bouquet import (
    BouquetSpec,
    DaughterEnum,
    EnumMode,
    bouquet_from_json,
    dominating_subsequence,
    format_path,
    materialize,
    mc_bouquet,
    parse_path,
)
from icardmaps.services.dmap import block_table, build, eval_trace, evaluate, preimage_witness
from icardmaps.services.dmap_checks import local_openness_check, run_selftest, save_report
from icardmaps.services.errors import InputError
from icardmaps.services.formulas import parse_formula, to_text
from icardmaps.services.gl_prover import (
    DEFAULT_BUDGET,
    TreeModel,
    characteristic_bound,
    check_tree,
    prove,
    satisfying_model,
)
from icardmaps.services.ordinal_parser import parse_ordinal
from icardmaps.services.ordinals import OrdTerm, Ordering3
from icardmaps.services.satisfy import cmd_satisfy, stream_from_params
from icardmaps.services.synthetic_data import sample_bouquets, sample_lambdas
from icardmaps.services.topology import (
    BasicNbhd,
    SimpleFn,
    basic_nbhd_member,
    converging_sequence,
    interval_member,
    parse_interval,
    rank_lambda,
    shrink_nbhd,
)

logger = logging.getLogger(__name__)

_ORDERING_SYMBOLS = {Ordering3.LESS: "<", Ordering3.EQUAL: "=", Ordering3.GREATER: ">"}


def _text(x: Optional[OrdTerm]) -> Optional[str]:
    return None if x is None else str(x)


# ============ Ordinals ============


def ord_eval(x: str) -> Dict[str, Any]:
    value = parse_ordinal(x)
    preds = ordinals.predicates(value)._asdict()
    preds["predecessor"] = _text(preds["predecessor"])
    return {"value": str(value), "predicates": preds}


def ord_cmp(x: str, y: str) -> Dict[str, Any]:
    result = ordinals.compare(parse_ordinal(x), parse_ordinal(y))
    return {"x": x, "y": y, "result": _ORDERING_SYMBOLS[result]}


def ord_add(x: str, y: str) -> Dict[str, Any]:
    return {"value": str(ordinals.add(parse_ordinal(x), parse_ordinal(y)))}


def ord_sub(a: str, b: str) -> Dict[str, Any]:
    """-a+b, defined for a <= b."""
    return {"value": str(ordinals.left_subtract(parse_ordinal(a), parse_ordinal(b)))}


def ord_log(degree: str, x: str) -> Dict[str, Any]:
    return {"value": str(ordinals.hyper_log(parse_ordinal(degree), parse_ordinal(x)))}


def ord_exp(degree: str, x: str) -> Dict[str, Any]:
    return {"value": str(ordinals.hyper_exp(parse_ordinal(degree), parse_ordinal(x)))}


def ord_fundseq(x: str, count: int) -> Dict[str, Any]:
    value = parse_ordinal(x)
    return {"value": str(value), "sequence": [str(ordinals.fund_seq(value, n)) for n in range(count)]}


def ord_pred(x: str) -> Dict[str, Any]:
    return {"value": str(ordinals.predecessor(parse_ordinal(x)))}


def ord_decompose(x: str) -> Dict[str, Any]:
    degree, mantissa = ordinals.hnf_decompose(parse_ordinal(x))
    return {"degree": str(degree), "mantissa": str(mantissa)}


# ============ Topology ============


def parse_simple_fn(entries: Mapping[str, str]) -> SimpleFn:
    return SimpleFn.from_mapping({parse_ordinal(level): parse_ordinal(value) for level, value in entries.items()})


def parse_simple_fn_text(text: str) -> SimpleFn:
    """"L:T,L:T" pairs of level and threshold; empty text is the empty function."""
    entries: Dict[str, str] = {}
    for part in filter(None, (piece.strip() for piece in text.split(","))):
        if ":" not in part:
            raise InputError(f"simple function entry {part!r} is not LEVEL:THRESHOLD")
        level, value = part.split(":", 1)
        entries[level.strip()] = value.strip()
    return parse_simple_fn(entries)


def topology_rank(lam: str, xi: str) -> Dict[str, Any]:
    return {"rank": str(rank_lambda(parse_ordinal(lam), parse_ordinal(xi)))}


def topology_member(xi: str, interval: str) -> Dict[str, Any]:
    iv = parse_interval(interval)
    member = interval_member(parse_ordinal(xi), iv)
    return {"interval": str(iv), "member": member, "ok": member}


def topology_nbhd_member(center: str, r: SimpleFn, xi: str) -> Dict[str, Any]:
    member = basic_nbhd_member(parse_ordinal(xi), BasicNbhd(parse_ordinal(center), r))
    return {"member": member, "ok": member}


def topology_shrink(lam: str, theta: str, r: SimpleFn) -> Dict[str, Any]:
    shrunk = shrink_nbhd(parse_ordinal(lam), parse_ordinal(theta), r)
    return {"eta": str(shrunk.eta), "gamma": str(shrunk.gamma), "interval": str(shrunk.interval)}


def topology_converge(lam: str, theta: str, count: int) -> Dict[str, Any]:
    lam_, theta_ = parse_ordinal(lam), parse_ordinal(theta)
    return {"sequence": [str(converging_sequence(lam_, theta_, n)) for n in range(count)]}


# ============ GL ============


def gl_prove(formula: str, budget: int = DEFAULT_BUDGET) -> Dict[str, Any]:
    result = prove(parse_formula(formula), budget)
    data = {
        "formula": to_text(result.formula),
        "verdict": "theorem" if result.is_theorem else "non-theorem",
        "steps": result.steps,
        "ok": result.is_theorem,
    }
    if not result.is_theorem:
        data["countermodel"] = result.model.to_json()
    return data


def gl_model(formulas: Sequence[str], budget: int = DEFAULT_BUDGET) -> Dict[str, Any]:
    model = satisfying_model([parse_formula(text) for text in formulas], budget)
    if model is None:
        return {"consistent": False, "model": None, "ok": False}
    return {"consistent": True, "model": model.to_json(), "rank": model.rank(), "ok": True}


def gl_check(model: Mapping[str, Any], node: Optional[int], formula: str) -> Dict[str, Any]:
    tree = TreeModel.from_json(dict(model))
    node_id = tree.root if node is None else node
    holds = check_tree(tree, node_id, parse_formula(formula))
    return {"node": node_id, "holds": holds, "ok": holds}


def gl_consistent(formulas: Sequence[str], budget: int = DEFAULT_BUDGET) -> Dict[str, Any]:
    found = gl_model(formulas, budget)["consistent"]
    return {"consistent": found, "ok": found}


def gl_characteristic(formulas: Sequence[str], cap: int, budget: int = DEFAULT_BUDGET) -> Dict[str, Any]:
    bound = characteristic_bound([parse_formula(text) for text in formulas], cap, budget)
    return {"characteristic": str(bound), "value": bound.value, "saturated": bound.saturated, "model_rank": bound.model_rank}


# ============ Bouquets ============


def resolve_bouquet(data: Optional[Mapping[str, Any]] = None, sample: Optional[str] = None) -> BouquetSpec:
    """A bouquet from its JSON object or by sample name."""
    if sample is not None:
        samples = sample_bouquets()
        if sample not in samples:
            raise InputError(f"unknown sample bouquet {sample!r}; known: {', '.join(samples)}")
        return samples[sample]
    if data is None:
        raise InputError("a bouquet JSON object or a sample name is required")
    return bouquet_from_json(data)


def bouquet_rank(b: BouquetSpec) -> Dict[str, Any]:
    return {"node_id": b.node_id, "rank": str(b.rank)}


def bouquet_mc(b: BouquetSpec, path: str, formula: str, prefix: int, budget: int = DEFAULT_BUDGET) -> Dict[str, Any]:
    verdict = mc_bouquet(b, parse_path(path), parse_formula(formula), prefix=prefix, budget=budget)
    return {"path": path, "verdict": str(verdict), "value": verdict.value, "exact": verdict.exact, "ok": verdict.value}


def bouquet_materialize(b: BouquetSpec, depth: int, prefix: int) -> Dict[str, Any]:
    rows = [
        {
            "path": format_path(row.path),
            "node_id": row.node_id,
            "rank": str(row.rank),
            "val": [f"p{v}" for v in sorted(row.valuation)],
        }
        for row in materialize(b, depth, prefix)
    ]
    return {"nodes": rows}


def bouquet_daughters(b: BouquetSpec, mode: str, count: int, dominating: bool = False) -> Dict[str, Any]:
    try:
        enum_mode = EnumMode(mode)
    except ValueError:
        raise InputError(f"mode must be one of {[m.value for m in EnumMode]}, got {mode!r}") from None
    enumeration = DaughterEnum(b, enum_mode)
    refs = enumeration.prefix(count)
    data: Dict[str, Any] = {
        "mode": enum_mode.value,
        "daughters": [
            {"index": i, "ref": format_path((ref,)), "rank": str(enumeration.rank(i))} for i, ref in enumerate(refs)
        ],
    }
    if dominating:
        data["dominating"] = dominating_subsequence(enumeration).prefix(count)
    return data


# ============ D-maps ============


def dmap_eval(lam: str, b: BouquetSpec, xi: str, trace: bool = False, search_budget: int = 4096) -> Dict[str, Any]:
    s = build(parse_ordinal(lam), b, search_budget, check_ranks=True)
    point = parse_ordinal(xi)
    image = evaluate(s, point)
    data: Dict[str, Any] = {
        "point": str(point),
        "path": image.path_text,
        "node_id": image.node.node_id,
        "rank": str(image.node.rank),
    }
    if trace:
        data["trace"] = [
            {
                "node_id": step.node_id,
                "stage": step.stage.value,
                "block": step.block,
                "point": str(step.point),
                "daughter": None if step.ref is None else format_path((step.ref,)),
            }
            for step in eval_trace(s, point)
        ]
    return data


def dmap_witness(lam: str, b: BouquetSpec, path: str, search_budget: int = 4096) -> Dict[str, Any]:
    s = build(parse_ordinal(lam), b, search_budget, check_ranks=True)
    witness = preimage_witness(s, parse_path(path))
    return {"path": path, "witness": str(witness), "top": str(s.top)}


def dmap_blocks(lam: str, b: BouquetSpec, count: int, search_budget: int = 4096) -> Dict[str, Any]:
    s = build(parse_ordinal(lam), b, search_budget)
    stage, rows = block_table(s, count)
    return {
        "stage": stage.value,
        "top": str(s.top),
        "blocks": [
            {"index": row.index, "start": str(row.start), "end": str(row.end), "daughter": format_path((row.daughter,))}
            for row in rows
        ],
    }


def dmap_openness(lam: str, b: BouquetSpec, xi: str, samples: int, seed: int = 0) -> Dict[str, Any]:
    s = build(parse_ordinal(lam), b)
    report = local_openness_check(s, parse_ordinal(xi), samples, seed)
    return report.to_dict()


def dmap_selftest(
    lambdas: Sequence[str] = (),
    bouquets: Optional[Mapping[str, BouquetSpec]] = None,
    samples: int = 60,
    seed: int = 0,
    search_budget: int = 4096,
    save: bool = False,
    reports_dir: str = file_ops.REPORTS_DIR,
) -> Dict[str, Any]:
    """Certificate checks over lambdas x bouquets; defaults to the sample grid."""
    lams = [parse_ordinal(text) for text in lambdas] or sample_lambdas()
    specs = list((bouquets or sample_bouquets()).values())
    report = run_selftest(lams, specs, samples, seed, search_budget)
    data = report.to_dict()
    data["rows"] = report.rows
    if save:
        identifier = "seed" + str(seed)
        data["report_file"], data["table_file"] = save_report(report, identifier, reports_dir)
    return data


# ============ Satisfy ============


def satisfy(
    formulas: Sequence[str] = (),
    lam: str = "1",
    stream: Optional[Mapping[str, Any]] = None,
    k: int = 5,
    budget: int = DEFAULT_BUDGET,
    samples: int = 20,
    seed: int = 0,
    ambient: Optional[str] = None,
) -> Dict[str, Any]:
    report = cmd_satisfy(
        gamma=list(formulas),
        lam=parse_ordinal(lam),
        stream=None if stream is None else stream_from_params(stream),
        k=k,
        budget=budget,
        samples=samples,
        seed=seed,
        ambient=None if ambient is None else parse_ordinal(ambient),
    )
    return report.to_dict()


# ============ Reports ============


def list_reports(reports_dir: str = file_ops.REPORTS_DIR) -> Dict[str, Any]:
    names = file_ops.list_files(reports_dir, ".json")
    return {
        "reports": [
            {"filename": name, "modified": file_ops.get_file_modified_time(f"{reports_dir}/{name}")} for name in names
        ]
    }


def show_report(filename: str, reports_dir: str = file_ops.REPORTS_DIR) -> Dict[str, Any]:
    if "/" in filename or "\\" in filename or filename.startswith("."):
        raise InputError(f"invalid report name {filename!r}")
    path = f"{reports_dir}/{filename}"
    if not file_ops.file_exists(path):
        raise InputError(f"report not found: {filename}")
    return file_ops.read_json(path)


