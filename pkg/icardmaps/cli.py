"""
icardmaps command line.

Exit codes: 0 success, 1 negative verdict, 2 usage or input error,
3 internal-consistency error (including failed certificates).
"""
import json
import logging
from typing import Any, Callable, Dict, List, Optional, Sequence

import click

from icardmaps import __version__
from icardmaps.services import commands, config_manager, file_ops
from icardmaps.services.config_manager import EngineConfig
from icardmaps.services.errors import IcardError, InputError, exit_code_for
from icardmaps.services.log_setup import configure_logging

logger = logging.getLogger(__name__)

NEGATIVE_VERDICT = 1
CERTIFICATE_FAILURE = 3


class CliState:
    def __init__(self, as_json: bool, verbose: bool, overrides: Dict[str, Any]):
        self.as_json = as_json
        self.verbose = verbose
        self.overrides = overrides
        self._config: Optional[EngineConfig] = None

    @property
    def config(self) -> EngineConfig:
        if self._config is None:
            self._config = config_manager.get_engine_config(**self.overrides)
        return self._config


def _run(
    ctx: click.Context,
    action: Callable[[CliState], Dict[str, Any]],
    render: Callable[[Dict[str, Any]], str],
    negative_code: int = NEGATIVE_VERDICT,
) -> None:
    """Run one command, print its result and exit with its verdict class."""
    state: CliState = ctx.obj
    try:
        data = action(state)
    except IcardError as exc:
        if state.as_json:
            click.echo(json.dumps({"error": type(exc).__name__, "detail": str(exc)}, indent=2))
        else:
            click.echo(f"error: {exc}", err=True)
        ctx.exit(exit_code_for(exc))
    click.echo(json.dumps(data, indent=2) if state.as_json else render(data))
    if data.get("ok") is False:
        ctx.exit(negative_code)


def _value(data: Dict[str, Any]) -> str:
    return data["value"]


def _read_formulas(formulas: Sequence[str], path: Optional[str]) -> List[str]:
    items = list(formulas)
    if path is not None:
        loaded = file_ops.load_json_path(path)
        if not isinstance(loaded, list) or not all(isinstance(item, str) for item in loaded):
            raise InputError(f"{path} must hold a JSON list of formula strings")
        items.extend(loaded)
    return items


def _bouquet(path: Optional[str], sample: Optional[str]):
    if path is not None:
        return commands.resolve_bouquet(file_ops.load_json_path(path))
    return commands.resolve_bouquet(sample=sample)


bouquet_options = [
    click.option("--bouquet", "bouquet_path", type=click.Path(dir_okay=False), help="Bouquet JSON file"),
    click.option("--sample", help="Built-in sample bouquet name"),
]


def with_bouquet(fn):
    for option in reversed(bouquet_options):
        fn = option(fn)
    return fn


@click.group()
@click.version_option(__version__, prog_name="icardmaps")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable JSON output")
@click.option("--budget", type=int, default=None, help="Tableau node cap")
@click.option("--seed", type=int, default=None, help="Seed for sampled checks")
@click.option("-v", "--verbose", is_flag=True, help="Debug logging")
@click.pass_context
def cli(ctx: click.Context, as_json: bool, budget: Optional[int], seed: Optional[int], verbose: bool):
    """Ordinal Icard spaces, GL, and d-maps onto omega-bouquets."""
    configure_logging(logging.DEBUG if verbose else logging.WARNING)
    ctx.obj = CliState(as_json, verbose, {"budget": budget, "seed": seed})


# ============ ord ============


@cli.group("ord")
def ord_group():
    """Ordinal calculator."""


@ord_group.command("eval")
@click.argument("x")
@click.pass_context
def ord_eval(ctx, x):
    """Normal form of X."""
    _run(ctx, lambda state: commands.ord_eval(x), _value)


@ord_group.command("cmp")
@click.argument("x")
@click.argument("y")
@click.pass_context
def ord_cmp(ctx, x, y):
    _run(ctx, lambda state: commands.ord_cmp(x, y), lambda d: f"{d['x']} {d['result']} {d['y']}")


@ord_group.command("add")
@click.argument("x")
@click.argument("y")
@click.pass_context
def ord_add(ctx, x, y):
    _run(ctx, lambda state: commands.ord_add(x, y), _value)


@ord_group.command("sub")
@click.argument("a")
@click.argument("b")
@click.pass_context
def ord_sub(ctx, a, b):
    """Left subtraction -A+B (A <= B)."""
    _run(ctx, lambda state: commands.ord_sub(a, b), _value)


@ord_group.command("log")
@click.argument("degree")
@click.argument("x")
@click.pass_context
def ord_log(ctx, degree, x):
    """Hyperlogarithm l^DEGREE(X)."""
    _run(ctx, lambda state: commands.ord_log(degree, x), _value)


@ord_group.command("exp")
@click.argument("degree")
@click.argument("x")
@click.pass_context
def ord_exp(ctx, degree, x):
    """Hyperexponential e^DEGREE(X)."""
    _run(ctx, lambda state: commands.ord_exp(degree, x), _value)


@ord_group.command("fundseq")
@click.argument("x")
@click.option("--count", "-n", type=click.IntRange(1, 1000), default=5)
@click.pass_context
def ord_fundseq(ctx, x, count):
    _run(ctx, lambda state: commands.ord_fundseq(x, count), lambda d: "\n".join(d["sequence"]))


@ord_group.command("pred")
@click.argument("x")
@click.pass_context
def ord_pred(ctx, x):
    _run(ctx, lambda state: commands.ord_pred(x), _value)


@ord_group.command("decompose")
@click.argument("x")
@click.pass_context
def ord_decompose(ctx, x):
    """Hyperexponential normal form e^degree(mantissa)."""
    _run(ctx, lambda state: commands.ord_decompose(x), lambda d: f"e[{d['degree']}]({d['mantissa']})")


# ============ topology ============


@cli.group("topology")
def topology_group():
    """Icard topology ranks and neighborhoods."""


@topology_group.command("rank")
@click.argument("lam", metavar="LAMBDA")
@click.argument("xi")
@click.pass_context
def topology_rank(ctx, lam, xi):
    _run(ctx, lambda state: commands.topology_rank(lam, xi), lambda d: d["rank"])


@topology_group.command("member")
@click.argument("xi")
@click.argument("interval")
@click.pass_context
def topology_member(ctx, xi, interval):
    """Whether XI lies in INTERVAL, written "(A, B]_L" or "[0, B]_L"."""
    _run(ctx, lambda state: commands.topology_member(xi, interval), lambda d: str(d["member"]).lower())


@topology_group.command("nbhd")
@click.argument("center")
@click.argument("xi")
@click.option("--r", "r_text", default="", help='Thresholds as "LEVEL:VALUE,..."')
@click.pass_context
def topology_nbhd(ctx, center, xi, r_text):
    """Whether XI lies in the basic neighborhood B_r(CENTER)."""
    _run(
        ctx,
        lambda state: commands.topology_nbhd_member(center, commands.parse_simple_fn_text(r_text), xi),
        lambda d: str(d["member"]).lower(),
    )


@topology_group.command("shrink")
@click.argument("lam", metavar="LAMBDA")
@click.argument("theta")
@click.option("--r", "r_text", default="", help='Thresholds as "LEVEL:VALUE,..."')
@click.pass_context
def topology_shrink(ctx, lam, theta, r_text):
    _run(
        ctx,
        lambda state: commands.topology_shrink(lam, theta, commands.parse_simple_fn_text(r_text)),
        lambda d: d["interval"],
    )


@topology_group.command("converge")
@click.argument("lam", metavar="LAMBDA")
@click.argument("theta")
@click.option("--count", "-n", type=click.IntRange(1, 1000), default=5)
@click.pass_context
def topology_converge(ctx, lam, theta, count):
    _run(ctx, lambda state: commands.topology_converge(lam, theta, count), lambda d: "\n".join(d["sequence"]))


# ============ gl ============


@cli.group("gl")
def gl_group():
    """GL prover and countermodels."""


def _render_prove(data: Dict[str, Any]) -> str:
    if data["ok"]:
        return "theorem"
    return "non-theorem\n" + json.dumps(data["countermodel"], indent=2)


@gl_group.command("prove")
@click.argument("formula")
@click.pass_context
def gl_prove(ctx, formula):
    _run(ctx, lambda state: commands.gl_prove(formula, state.config.budget), _render_prove)


@gl_group.command("model")
@click.argument("formulas", nargs=-1)
@click.option("--file", "-f", "path", type=click.Path(dir_okay=False), help="JSON list of formulas")
@click.pass_context
def gl_model(ctx, formulas, path):
    """A finite tree model whose root satisfies FORMULAS."""
    _run(
        ctx,
        lambda state: commands.gl_model(_read_formulas(formulas, path), state.config.budget),
        lambda d: json.dumps(d["model"], indent=2) if d["ok"] else "inconsistent",
    )


@gl_group.command("check")
@click.argument("formula")
@click.option("--model", "model_path", required=True, type=click.Path(dir_okay=False), help="TreeModel JSON file")
@click.option("--node", type=int, default=None, help="Node id (default: root)")
@click.pass_context
def gl_check(ctx, formula, model_path, node):
    _run(
        ctx,
        lambda state: commands.gl_check(file_ops.load_json_path(model_path), node, formula),
        lambda d: str(d["holds"]).lower(),
    )


@gl_group.command("consistent")
@click.argument("formulas", nargs=-1)
@click.option("--file", "-f", "path", type=click.Path(dir_okay=False))
@click.pass_context
def gl_consistent(ctx, formulas, path):
    _run(
        ctx,
        lambda state: commands.gl_consistent(_read_formulas(formulas, path), state.config.budget),
        lambda d: "consistent" if d["ok"] else "inconsistent",
    )


@gl_group.command("characteristic")
@click.argument("formulas", nargs=-1)
@click.option("--file", "-f", "path", type=click.Path(dir_okay=False))
@click.option("--cap", type=click.IntRange(0, 64), default=8)
@click.pass_context
def gl_characteristic(ctx, formulas, path, cap):
    """Largest n <= CAP with <>^n T consistent alongside FORMULAS."""
    _run(
        ctx,
        lambda state: commands.gl_characteristic(_read_formulas(formulas, path), cap, state.config.budget),
        lambda d: d["characteristic"],
    )


# ============ bouquet ============


@cli.group("bouquet")
def bouquet_group():
    """Omega-bouquets: ranks, model checking, inspection."""


@bouquet_group.command("rank")
@with_bouquet
@click.pass_context
def bouquet_rank(ctx, bouquet_path, sample):
    _run(ctx, lambda state: commands.bouquet_rank(_bouquet(bouquet_path, sample)), lambda d: d["rank"])


@bouquet_group.command("mc")
@click.argument("formula")
@with_bouquet
@click.option("--path", default="", help='Node path "SLOT.COPY/..." (f.I for family members)')
@click.option("--prefix", type=click.IntRange(1), default=None, help="Family members examined")
@click.pass_context
def bouquet_mc(ctx, formula, bouquet_path, sample, path, prefix):
    def action(state: CliState) -> Dict[str, Any]:
        b = _bouquet(bouquet_path, sample)
        return commands.bouquet_mc(b, path, formula, prefix or state.config.mc_prefix, state.config.budget)

    _run(ctx, action, lambda d: d["verdict"])


def _render_rows(data: Dict[str, Any]) -> str:
    return "\n".join(
        f"{row['path'] or '(root)'}\t{row['node_id']}\trank {row['rank']}\t{{{', '.join(row['val'])}}}"
        for row in data["nodes"]
    )


@bouquet_group.command("materialize")
@with_bouquet
@click.option("--depth", type=click.IntRange(0, 8), default=2)
@click.option("--prefix", type=click.IntRange(1, 64), default=4)
@click.pass_context
def bouquet_materialize(ctx, bouquet_path, sample, depth, prefix):
    _run(ctx, lambda state: commands.bouquet_materialize(_bouquet(bouquet_path, sample), depth, prefix), _render_rows)


@bouquet_group.command("daughters")
@with_bouquet
@click.option("--mode", type=click.Choice(["each_once", "infinitely_often"]), default="each_once")
@click.option("--count", "-n", type=click.IntRange(1, 4096), default=8)
@click.option("--dominating", is_flag=True, help="Also list the dominating subsequence")
@click.pass_context
def bouquet_daughters(ctx, bouquet_path, sample, mode, count, dominating):
    def render(data: Dict[str, Any]) -> str:
        lines = [f"{d['index']}\t{d['ref']}\trank {d['rank']}" for d in data["daughters"]]
        if "dominating" in data:
            lines.append("dominating: " + ", ".join(str(m) for m in data["dominating"]))
        return "\n".join(lines)

    _run(ctx, lambda state: commands.bouquet_daughters(_bouquet(bouquet_path, sample), mode, count, dominating), render)


# ============ dmap ============


@cli.group("dmap")
def dmap_group():
    """D-maps from ordinal Icard spaces onto bouquets."""


lambda_option = click.option("--lambda", "lam", default=None, help="Nonzero ordinal (default: config default_lambda)")


@dmap_group.command("eval")
@lambda_option
@with_bouquet
@click.option("--xi", required=True)
@click.option("--trace", is_flag=True, help="Show the recursion steps")
@click.pass_context
def dmap_eval(ctx, lam, bouquet_path, sample, xi, trace):
    """Image of XI as a path from the root."""

    def action(state: CliState) -> Dict[str, Any]:
        b = _bouquet(bouquet_path, sample)
        return commands.dmap_eval(
            lam or state.config.default_lambda, b, xi, trace or state.verbose, state.config.search_budget
        )

    def render(data: Dict[str, Any]) -> str:
        lines = [f"{step['node_id']}\t{step['stage']}\t{step['block']}\t{step['point']}" for step in data.get("trace", [])]
        lines.append(f"{data['node_id']}\t{data['path'] or '(root)'}\trank {data['rank']}")
        return "\n".join(lines)

    _run(ctx, action, render)


@dmap_group.command("witness")
@lambda_option
@with_bouquet
@click.option("--path", default="", help='Node path "SLOT.COPY/..."')
@click.pass_context
def dmap_witness(ctx, lam, bouquet_path, sample, path):
    """A point mapped to the node at PATH, verified by evaluation."""

    def action(state: CliState) -> Dict[str, Any]:
        b = _bouquet(bouquet_path, sample)
        return commands.dmap_witness(lam or state.config.default_lambda, b, path, state.config.search_budget)

    _run(ctx, action, lambda d: d["witness"])


@dmap_group.command("blocks")
@lambda_option
@with_bouquet
@click.option("--count", "-n", type=click.IntRange(1, 256), default=6)
@click.pass_context
def dmap_blocks(ctx, lam, bouquet_path, sample, count):
    def action(state: CliState) -> Dict[str, Any]:
        b = _bouquet(bouquet_path, sample)
        return commands.dmap_blocks(lam or state.config.default_lambda, b, count, state.config.search_budget)

    def render(data: Dict[str, Any]) -> str:
        lines = [f"stage {data['stage']}, top {data['top']}"]
        lines += [f"{row['index']}\t[{row['start']}, {row['end']}]\t-> {row['daughter']}" for row in data["blocks"]]
        return "\n".join(lines)

    _run(ctx, action, render)


@dmap_group.command("openness")
@lambda_option
@with_bouquet
@click.option("--xi", required=True)
@click.option("--samples", type=click.IntRange(1, 256), default=8, help="Neighborhoods sampled")
@click.pass_context
def dmap_openness(ctx, lam, bouquet_path, sample, xi, samples):
    """Sampled check that neighborhoods of XI map onto neighborhoods of its image."""

    def action(state: CliState) -> Dict[str, Any]:
        b = _bouquet(bouquet_path, sample)
        return commands.dmap_openness(lam or state.config.default_lambda, b, xi, samples, state.config.seed)

    _run(
        ctx,
        action,
        lambda d: "open" if d["ok"] else "violations:\n" + "\n".join(d["violations"]),
        negative_code=CERTIFICATE_FAILURE,
    )


@dmap_group.command("selftest")
@click.option("--lambda", "lambdas", multiple=True, help="Lambda to test (repeatable; default: sample grid)")
@click.option("--samples", type=click.IntRange(1), default=None, help="Points sampled per spec")
@click.option("--save", is_flag=True, help="Write the report and CSV summary under the reports directory")
@click.pass_context
def dmap_selftest(ctx, lambdas, samples, save):
    """Certificate checks on the sample bouquets."""

    def action(state: CliState) -> Dict[str, Any]:
        config = state.config
        return commands.dmap_selftest(
            lambdas,
            samples=samples or config.samples,
            seed=config.seed,
            search_budget=config.search_budget,
            save=save,
            reports_dir=config.reports_dir,
        )

    def render(data: Dict[str, Any]) -> str:
        lines = [
            f"rank checks: {data['rank_checks']}",
            f"partition checks: {data['partition_checks']}",
            f"w checks: {data['w_checks']}",
            f"roundtrips: {data['roundtrips']}",
            f"failures: {len(data['failures'])}",
        ]
        lines += [f"  {f['check']} lambda={f['lambda']} {f['bouquet']} at {f['point']}: {f['detail']}" for f in data["failures"]]
        if "report_file" in data:
            lines.append(f"saved {data['report_file']}")
        return "\n".join(lines)

    _run(ctx, action, render, negative_code=CERTIFICATE_FAILURE)


# ============ satisfy ============


def _render_witness(data: Dict[str, Any]) -> str:
    lines = [
        f"lambda {data['lambda']}, Theta {data['theta']}",
        f"witness {data['witness']}",
    ]
    lines += [f"  {v['where']}: {v['formula']} -> {v['verdict']}" for v in data["verdicts"]]
    certificate = data["certificate"]
    lines.append(
        f"certificate: {certificate.get('rank_checks', 0)} rank checks, "
        f"{certificate.get('roundtrips', 0)} roundtrips, {len(certificate.get('failures', []))} failures"
    )
    if data["open_in_ambient"] is not None:
        lines.append(f"lambda-open in {data['ambient']}: {str(data['open_in_ambient']).lower()}")
    return "\n".join(lines)


@cli.command("satisfy")
@click.argument("formulas", nargs=-1)
@click.option("--file", "-f", "path", type=click.Path(dir_okay=False), help="JSON list of formulas")
@lambda_option
@click.option("--stream", help="Named formula stream")
@click.option("--psi", help="psi template with {i}/{n} placeholders")
@click.option("--phi", help="phi template with {i}/{n} placeholders")
@click.option("-k", "k", type=click.IntRange(1), default=None, help="Stream prefix length")
@click.option("--samples", type=click.IntRange(1), default=20, help="Certificate points sampled")
@click.option("--ambient", default=None, help="Ambient ordinal for the openness note")
@click.pass_context
def satisfy(ctx, formulas, path, lam, stream, psi, phi, k, samples, ambient):
    """Witness point for a consistent formula set or stream."""

    def action(state: CliState) -> Dict[str, Any]:
        config = state.config
        stream_params: Optional[Dict[str, Any]] = None
        if stream is not None:
            stream_params = {"stream": stream}
        elif psi is not None or phi is not None:
            stream_params = {"psi": psi or "T", "phi": phi or "T"}
        return commands.satisfy(
            _read_formulas(formulas, path),
            lam=lam or config.default_lambda,
            stream=stream_params,
            k=k or config.prefix,
            budget=config.budget,
            samples=samples,
            seed=config.seed,
            ambient=ambient,
        )

    _run(ctx, action, _render_witness, negative_code=CERTIFICATE_FAILURE)


# ============ report ============


@cli.group("report")
def report_group():
    """Saved selftest reports."""


@report_group.command("list")
@click.pass_context
def report_list(ctx):
    _run(
        ctx,
        lambda state: commands.list_reports(state.config.reports_dir),
        lambda d: "\n".join(r["filename"] for r in d["reports"]) or "no reports",
    )


@report_group.command("show")
@click.argument("filename")
@click.pass_context
def report_show(ctx, filename):
    _run(ctx, lambda state: commands.show_report(filename, state.config.reports_dir), lambda d: json.dumps(d, indent=2))


# ============ serve ============


@cli.command("serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
@click.option("--reload", is_flag=True)
def serve(host, port, reload):
    """Run the HTTP API with uvicorn."""
    import uvicorn

    uvicorn.run("icardmaps.main:app", host=host, port=port, reload=reload)


def main() -> None:
    cli(prog_name="icardmaps")


if __name__ == "__main__":
    main()
