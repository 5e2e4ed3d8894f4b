import random

import pytest

from icardmaps.services import ordinals
from icardmaps.services.errors import InconsistentInputError, InputError, IntegrityError, ParseError
from icardmaps.services.formulas import parse_formula, to_text
from icardmaps.services.gl_prover import satisfying_model
from icardmaps.services.ordinal_parser import parse_ordinal as o
from icardmaps.services.ordinals import OMEGA, Ordering3, compare, nat
from icardmaps.services.satisfy import (
    FormulaStreamPair,
    ambient_open,
    cmd_satisfy,
    gamma_slice,
    named_stream,
    root_formulas,
    satisfy_stream_prefix,
    stream_from_params,
)
from icardmaps.services.synthetic_data import random_consistent_set


class TestStreams:
    def test_noncompact_slices(self):
        stream = named_stream("noncompact")
        assert [to_text(f) for f in gamma_slice(stream, 0)] == ["p0"]
        assert [to_text(f) for f in gamma_slice(stream, 2)] == [
            "p0",
            "(p0 -> <>p1) & [](p0 -> <>p1)",
            "(p1 -> <>p2) & [](p1 -> <>p2)",
        ]

    def test_root_formulas_deduplicate_diamonds(self):
        texts = [to_text(f) for f in root_formulas(named_stream("noncompact"), 3)]
        assert texts == ["<>p0", "[](p0 -> <>p1)", "[](p1 -> <>p2)"]

    def test_templates_and_params(self):
        stream = stream_from_params({"psi": "<>p{i}", "phi": "[]p{n} | p{i}", "root": ["p3"]})
        assert stream.psi(2) == parse_formula("<>p2")
        assert stream.phi(0) == parse_formula("[]p1 | p0")
        assert stream.root == frozenset({3})
        assert stream_from_params({"stream": "trivial"}).name == "trivial"

    @pytest.mark.parametrize(
        "params",
        [{"stream": "nope"}, {"psi": "p0"}, {"psi": "p{j}", "phi": "T"}],
    )
    def test_bad_stream_params(self, params):
        with pytest.raises(InputError):
            stream_from_params(params)

    def test_template_syntax_errors(self):
        with pytest.raises(ParseError):
            stream_from_params({"psi": "p0 &", "phi": "T"})

    def test_negative_slice_index(self):
        with pytest.raises(InputError):
            gamma_slice(named_stream("trivial"), -1)


class TestPrefixBouquet:
    def test_noncompact_prefix(self):
        prefix = satisfy_stream_prefix(named_stream("noncompact"), 4)
        assert [model.rank() for model in prefix.models] == [0, 1, 2, 3]
        assert prefix.bouquet.rank == OMEGA

    def test_trivial_stream_members_are_single_nodes(self):
        prefix = satisfy_stream_prefix(named_stream("trivial"), 3)
        assert all(model.rank() == 0 and len(model.nodes) == 1 for model in prefix.models)

    def test_inconsistent_slice_is_named(self):
        stream = FormulaStreamPair.from_templates("p0 & ~p0", "T")
        with pytest.raises(InconsistentInputError) as excinfo:
            satisfy_stream_prefix(stream, 2)
        assert "slice 0" in str(excinfo.value)


class TestCmdSatisfy:
    def test_two_leaves(self):
        report = cmd_satisfy(["<>(p0 & []F)", "<>(~p0 & []F)"], lam=nat(1), samples=8)
        assert report.witness == "w"
        assert report.theta == "1"
        assert report.ok, report.to_dict()

    def test_top_alone_is_witnessed_at_zero(self):
        report = cmd_satisfy(["T"], lam=OMEGA, samples=4)
        assert report.witness == "0"
        assert report.ok

    def test_root_valuation_is_pulled_back(self):
        report = cmd_satisfy(["p1", "<>p0"], lam=OMEGA, samples=6)
        assert report.point_valuation == ["p1"]
        assert report.ok

    def test_noncompact_stream(self):
        report = cmd_satisfy(stream=named_stream("noncompact"), lam=OMEGA, k=5, samples=8)
        data = report.to_dict()
        assert data["witness"] == str(o("e[w](w)"))
        assert data["theta"] == "w"
        assert data["prefix"] == 5
        members = {v["where"] for v in data["verdicts"] if v["where"].startswith("member")}
        assert members == {f"member {i}" for i in range(5)}
        assert data["ok"], data

    def test_ambient_openness(self):
        report = cmd_satisfy(["<>T"], lam=nat(1), samples=4, ambient=o("w^(w)+1"))
        assert report.open_in_ambient is True
        assert ambient_open(OMEGA, o("e[w](w)")) is False
        assert ambient_open(OMEGA, o("e[w](w)+1"))

    def test_inconsistent_input(self):
        with pytest.raises(InconsistentInputError):
            cmd_satisfy(["<>T", "[]F"])

    def test_needs_formulas_or_stream(self):
        with pytest.raises(InputError):
            cmd_satisfy([])

    def test_random_consistent_sets_at_lambda_one(self):
        for seed in range(50):
            gamma = random_consistent_set(random.Random(seed), size=3)
            assert gamma
            report = cmd_satisfy([to_text(phi) for phi in gamma], lam=nat(1), samples=6, seed=seed)
            assert report.ok, report.to_dict()
            theta = o(report.theta)
            assert report.witness == str(ordinals.hyper_exp(nat(1), theta))
            assert compare(theta, nat(satisfying_model(gamma).rank())) is not Ordering3.GREATER

    def test_bounded_stream_cannot_declare_a_limit_rank(self):
        with pytest.raises(IntegrityError):
            cmd_satisfy(stream=named_stream("trivial"), lam=OMEGA, k=3)
