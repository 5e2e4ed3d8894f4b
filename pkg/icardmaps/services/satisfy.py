"""
Satisfaction pipeline service for icardmaps.
Handles formula streams and their slices Gamma(i), the prefix bouquets
that satisfy them, and the end-to-end witness: a consistent set is
realized on a bouquet, a d-map is built onto it, and the point
e^lambda(Theta) of the ordinal space is reported with its checks.
"""
import logging
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Sequence

from icardmaps.services import ordinals
from icardmaps.services.bouquet import (
    FAMILY,
    BouquetSpec,
    DaughterRef,
    GeneratedFamily,
    from_tree_model,
    mc_bouquet,
)
from icardmaps.services.dmap import DMapSpec, build, evaluate
from icardmaps.services.dmap_checks import CertificateReport, check_spec
from icardmaps.services.errors import InconsistentInputError, InputError
from icardmaps.services.formulas import And, Box, Diamond, Formula, parse_formula, to_text
from icardmaps.services.gl_prover import DEFAULT_BUDGET, TreeModel, check_tree, parse_variable_name, require_consistent
from icardmaps.services.ordinals import OrdTerm, Ordering3, compare

logger = logging.getLogger(__name__)


# ============ Streams ============


@dataclass(frozen=True, eq=False)
class FormulaStreamPair:
    """
    psi(i): formulas that must be reachable, each recurring infinitely often;
    phi(j): formulas boxed at the root. root holds the root's true variables.
    """

    name: str
    psi: Callable[[int], Formula]
    phi: Callable[[int], Formula]
    root: FrozenSet[int] = frozenset()
    params: Mapping[str, Any] = field(default_factory=dict)

    @classmethod
    def from_templates(
        cls,
        psi: str,
        phi: str,
        root: Iterable[str] = (),
        name: str = "custom",
    ) -> "FormulaStreamPair":
        """Streams from formula templates with {i} (the index) and {n} (index + 1) placeholders."""
        root_vars = frozenset(parse_variable_name(v) for v in root)
        params = {"psi": psi, "phi": phi, "root": sorted(f"p{v}" for v in root_vars)}
        return cls(name, _template(psi), _template(phi), root_vars, params)


def _template(text: str) -> Callable[[int], Formula]:
    def generate(i: int) -> Formula:
        try:
            return parse_formula(text.format(i=i, n=i + 1))
        except (KeyError, IndexError, ValueError) as exc:
            raise InputError(f"bad stream template {text!r}: {exc}") from exc

    generate(0)
    return generate


STREAMS: Dict[str, Dict[str, str]] = {
    # {<>p0} + {[](p_j -> <>p_(j+1))}: finitely satisfiable, not satisfiable on a finite tree
    "noncompact": {"psi": "p0", "phi": "p{i} -> <>p{n}"},
    "trivial": {"psi": "T", "phi": "T"},
}


def named_stream(name: str, root: Iterable[str] = ()) -> FormulaStreamPair:
    if name not in STREAMS:
        raise InputError(f"unknown stream {name!r}; known streams: {', '.join(sorted(STREAMS))}")
    entry = STREAMS[name]
    stream = FormulaStreamPair.from_templates(entry["psi"], entry["phi"], root, name=name)
    stream.params.update({"stream": name})
    return stream


def stream_from_params(params: Mapping[str, Any]) -> FormulaStreamPair:
    """{"stream": name} or {"psi": template, "phi": template, "root": [...]}."""
    root = params.get("root", [])
    if "stream" in params:
        return named_stream(str(params["stream"]), root)
    try:
        return FormulaStreamPair.from_templates(str(params["psi"]), str(params["phi"]), root)
    except KeyError as exc:
        raise InputError(f"stream needs a name or psi/phi templates, missing {exc}") from exc


def gamma_slice(s: FormulaStreamPair, i: int) -> List[Formula]:
    """Gamma(i) = {psi_i} + {phi_j & []phi_j : j < i}."""
    if i < 0:
        raise InputError(f"slice index must be >= 0, got {i}")
    phis = [s.phi(j) for j in range(i)]
    return [s.psi(i)] + [And(phi, Box(phi)) for phi in phis]


def root_formulas(s: FormulaStreamPair, k: int) -> List[Formula]:
    """The part of the original set visible from a prefix of length k."""
    diamonds = {to_text(Diamond(s.psi(i))): Diamond(s.psi(i)) for i in range(k)}
    boxes = [Box(s.phi(j)) for j in range(max(k - 1, 0))]
    return list(diamonds.values()) + boxes


# ============ Prefix Bouquets ============


class StreamPrefix(NamedTuple):
    bouquet: BouquetSpec
    models: List[TreeModel]
    slices: List[List[Formula]]


def _slice_model(s: FormulaStreamPair, i: int, budget: int) -> TreeModel:
    try:
        return require_consistent(gamma_slice(s, i), budget)
    except InconsistentInputError as exc:
        raise InconsistentInputError(f"slice {i} of stream {s.name} is inconsistent: {exc}", refuted=exc.refuted) from exc


def prover_family(params: Mapping[str, Any]) -> GeneratedFamily:
    """Family whose i-th member is the tableau model of Gamma(i)."""
    stream = params["_stream"] if "_stream" in params else stream_from_params(params)
    budget = int(params.get("budget", DEFAULT_BUDGET))
    models: Dict[int, TreeModel] = params.get("_models", {})

    def member(i: int) -> BouquetSpec:
        if i not in models:
            models[i] = _slice_model(stream, i, budget)
        return from_tree_model(models[i], prefix=f"g{i}.")

    public = {key: value for key, value in params.items() if not key.startswith("_")}
    return GeneratedFamily("prover", public, member)


def satisfy_stream_prefix(s: FormulaStreamPair, k: int, budget: int = DEFAULT_BUDGET) -> StreamPrefix:
    """
    Root over the tableau models of Gamma(0), ..., Gamma(k-1).

    Args:
        s: Formula streams
        k: Number of slices checked and materialized
        budget: Tableau node cap per slice

    Returns:
        StreamPrefix; the root's generated family continues past k on demand
        and declares rank w.

    Raises:
        InconsistentInputError: naming the first inconsistent slice
    """
    if k < 0:
        raise InputError(f"prefix must be >= 0, got {k}")
    models: Dict[int, TreeModel] = {}
    slices = []
    for i in range(k):
        slices.append(gamma_slice(s, i))
        models[i] = _slice_model(s, i, budget)
        logger.debug("slice %d of %s: model of rank %d", i, s.name, models[i].rank())
    params = {**s.params, "budget": budget, "_stream": s, "_models": models}
    family = prover_family(params)
    root = BouquetSpec("root", s.root, (), family)
    return StreamPrefix(root, [models[i] for i in range(k)], slices)


# ============ Witness Reports ============


class Verdict(NamedTuple):
    formula: str
    where: str
    verdict: str
    ok: bool


@dataclass
class WitnessReport:
    formulas: List[str]
    lam: str
    theta: str
    witness: str
    stream: Optional[str] = None
    prefix: Optional[int] = None
    verdicts: List[Verdict] = field(default_factory=list)
    point_valuation: List[str] = field(default_factory=list)
    certificate: Dict[str, Any] = field(default_factory=dict)
    ambient: Optional[str] = None
    open_in_ambient: Optional[bool] = None

    @property
    def ok(self) -> bool:
        return all(v.ok for v in self.verdicts) and not self.certificate.get("failures")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "formulas": self.formulas,
            "stream": self.stream,
            "prefix": self.prefix,
            "lambda": self.lam,
            "theta": self.theta,
            "witness": self.witness,
            "verdicts": [v._asdict() for v in self.verdicts],
            "point_valuation": self.point_valuation,
            "certificate": self.certificate,
            "ambient": self.ambient,
            "open_in_ambient": self.open_in_ambient,
            "ok": self.ok,
        }


def point_valuation(s: DMapSpec, xi: OrdTerm) -> FrozenSet[int]:
    """Variables true at xi under the pulled-back valuation [[p]] = f^-1([[p]]_T)."""
    return evaluate(s, xi).node.valuation


def ambient_open(lam: OrdTerm, ambient: OrdTerm) -> bool:
    """Whether e^lambda(w) < ambient, so the witness space is lambda-open inside it."""
    return compare(ordinals.hyper_exp(lam, ordinals.OMEGA), ambient) is Ordering3.LESS


def _mc_verdict(bouquet: BouquetSpec, path, phi: Formula, where: str, prefix: int, budget: int) -> Verdict:
    result = mc_bouquet(bouquet, path, phi, prefix=prefix, budget=budget)
    return Verdict(to_text(phi), where, str(result), result.value)


def _certify(s: DMapSpec, samples: int, seed: int, depth: int, prefix: int) -> Dict[str, Any]:
    report = CertificateReport()
    check_spec(s, samples, random.Random(seed), report, depth=depth, prefix=prefix)
    return report.to_dict()


def satisfy_formulas(
    formulas: Sequence[Formula],
    lam: OrdTerm,
    budget: int = DEFAULT_BUDGET,
    samples: int = 20,
    seed: int = 0,
    ambient: Optional[OrdTerm] = None,
) -> WitnessReport:
    """Witness for a finite consistent set on (e^lambda(Theta) + 1, lambda)."""
    formulas = list(formulas)
    model = require_consistent(formulas, budget)
    bouquet = from_tree_model(model, prefix="n")
    s = build(lam, bouquet, check_ranks=True)
    report = WitnessReport(
        formulas=[to_text(f) for f in formulas],
        lam=str(lam),
        theta=str(s.theta),
        witness=str(s.top),
    )
    for phi in formulas:
        report.verdicts.append(_mc_verdict(bouquet, (), phi, "root", 0, budget))
        holds = check_tree(model, model.root, phi)
        report.verdicts.append(Verdict(to_text(phi), "tree root", str(holds), holds))
    report.point_valuation = [f"p{v}" for v in sorted(point_valuation(s, s.top))]
    report.certificate = _certify(s, samples, seed, depth=4, prefix=8)
    _attach_ambient(report, lam, ambient)
    logger.info("satisfied %d formulas at %s with Theta = %s", len(formulas), s.top, s.theta)
    return report


def satisfy_stream(
    stream: FormulaStreamPair,
    lam: OrdTerm,
    k: int,
    budget: int = DEFAULT_BUDGET,
    samples: int = 20,
    seed: int = 0,
    ambient: Optional[OrdTerm] = None,
) -> WitnessReport:
    """Witness for a stream: slices Gamma(i), i < k, checked in the generated members."""
    prefix = satisfy_stream_prefix(stream, k, budget)
    bouquet = prefix.bouquet
    s = build(lam, bouquet, check_ranks=True)
    report = WitnessReport(
        formulas=[to_text(f) for f in root_formulas(stream, k)],
        lam=str(lam),
        theta=str(s.theta),
        witness=str(s.top),
        stream=stream.name,
        prefix=k,
    )
    for i, slice_ in enumerate(prefix.slices):
        path = (DaughterRef(FAMILY, i),)
        for phi in slice_:
            report.verdicts.append(_mc_verdict(bouquet, path, phi, f"member {i}", k, budget))
    for phi in root_formulas(stream, k):
        report.verdicts.append(_mc_verdict(bouquet, (), phi, "root", k, budget))
    report.point_valuation = [f"p{v}" for v in sorted(point_valuation(s, s.top))]
    report.certificate = _certify(s, samples, seed, depth=2, prefix=k)
    _attach_ambient(report, lam, ambient)
    logger.info("satisfied stream %s up to %d at %s", stream.name, k, s.top)
    return report


def _attach_ambient(report: WitnessReport, lam: OrdTerm, ambient: Optional[OrdTerm]) -> None:
    if ambient is not None:
        report.ambient = str(ambient)
        report.open_in_ambient = ambient_open(lam, ambient)


def cmd_satisfy(
    gamma: Sequence[str] = (),
    lam: OrdTerm = ordinals.ONE_TERM,
    stream: Optional[FormulaStreamPair] = None,
    k: int = 5,
    budget: int = DEFAULT_BUDGET,
    samples: int = 20,
    seed: int = 0,
    ambient: Optional[OrdTerm] = None,
) -> WitnessReport:
    """
    End-to-end witness for a finite formula list or a stream.

    Args:
        gamma: Formula texts (ignored when stream is given)
        lam: Nonzero ordinal for the Icard topology
        stream: Optional formula streams
        k: Stream prefix length

    Returns:
        WitnessReport with the witness point e^lambda(Theta)
    """
    if stream is not None:
        return satisfy_stream(stream, lam, k, budget, samples, seed, ambient)
    if not gamma:
        raise InputError("satisfy needs formulas or a stream")
    formulas = [parse_formula(text) for text in gamma]
    return satisfy_formulas(formulas, lam, budget, samples, seed, ambient)
