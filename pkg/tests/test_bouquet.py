import random

import pytest

from icardmaps.services import ordinals
from icardmaps.services.bouquet import (
    FAMILY,
    BouquetSpec,
    ChildSlot,
    DaughterEnum,
    DaughterRef,
    EnumMode,
    GeneratedFamily,
    McVerdict,
    bouquet_from_json,
    bouquet_to_json,
    chain,
    chain_family,
    daughters,
    dominating_subsequence,
    format_path,
    from_tree_model,
    leaf,
    materialize,
    mc_bouquet,
    parse_path,
    resolve_path,
    to_tree_model,
)
from icardmaps.services.errors import InputError, IntegrityError
from icardmaps.services.formulas import Diamond, Not, diamond_power, parse_formula, to_text
from icardmaps.services.gl_prover import check_tree
from icardmaps.services.ordinal_parser import parse_ordinal as o
from icardmaps.services.synthetic_data import all_formulas, all_tree_models, random_formula, random_tree_model


class TestRank:
    @pytest.mark.parametrize(
        "name, expected",
        [("leaf", "0"), ("two", "1"), ("chain3", "2"), ("spread", "3"), ("chains", "w"), ("above", "w+1")],
    )
    def test_sample_ranks(self, bouquets, name, expected):
        assert bouquets[name].rank == o(expected)

    def test_chain_rank_counts_edges(self):
        assert chain(5).rank == ordinals.nat(4)
        with pytest.raises(InputError):
            chain(0)

    def test_children_rank_below_parent(self, bouquets):
        for b in bouquets.values():
            for slot in b.children:
                assert slot.spec.rank < b.rank

    def test_family_ranks_must_grow(self):
        flat = GeneratedFamily("flat", {}, lambda i: leaf(f"l{i}"))
        with pytest.raises(IntegrityError):
            BouquetSpec("r", family=flat).rank

    def test_family_needs_limit_rank(self):
        with pytest.raises(IntegrityError):
            GeneratedFamily("chain", {}, lambda i: leaf("x"), limit_rank=o("w+1"))

    def test_family_child_may_not_reach_declared_rank(self, bouquets):
        b = BouquetSpec("r", children=(ChildSlot(bouquets["chains"]),), family=chain_family({}))
        with pytest.raises(IntegrityError):
            b.rank


class TestPaths:
    def test_format_and_parse(self):
        path = (DaughterRef(0, 1), DaughterRef(FAMILY, 3))
        assert format_path(path) == "0.1/f.3"
        assert parse_path("0.1/f.3") == path
        assert parse_path("") == ()

    @pytest.mark.parametrize("text", ["x", "0", "1.2.3", "f.a"])
    def test_bad_steps(self, text):
        with pytest.raises(InputError):
            parse_path(text)

    def test_resolve_checks_slots_and_copies(self, bouquets):
        assert resolve_path(bouquets["spread"], parse_path("1.40")).node_id == "spread.l"
        assert resolve_path(bouquets["chains"], parse_path("f.2")).rank == ordinals.nat(2)
        for text in ["2.0", "0.1"]:
            with pytest.raises(InputError):
                resolve_path(bouquets["two"], parse_path(text))
        with pytest.raises(InputError):
            resolve_path(bouquets["two"], parse_path("f.0"))


class TestEnumerations:
    def test_each_once_on_finite_children(self, bouquets):
        enum_ = daughters(bouquets["two"], EnumMode.EACH_ONCE)
        assert enum_.length == 2
        assert enum_.prefix(5) == [DaughterRef(0, 0), DaughterRef(1, 0)]

    def test_infinitely_often_round_robin(self, bouquets):
        enum_ = daughters(bouquets["two"], EnumMode.INFINITELY_OFTEN)
        assert [str(ref) for ref in enum_.prefix(5)] == ["0.0", "1.0", "0.0", "1.0", "0.0"]

    def test_omega_copies_are_distinct(self):
        b = BouquetSpec("r", children=(ChildSlot(leaf("a"), None),))
        assert daughters(b, EnumMode.EACH_ONCE).prefix(3) == [DaughterRef(0, 0), DaughterRef(0, 1), DaughterRef(0, 2)]

    def test_dovetailing_revisits_every_daughter(self, bouquets):
        enum_ = daughters(bouquets["spread"], EnumMode.INFINITELY_OFTEN)
        refs = enum_.prefix(60)
        for ref in [DaughterRef(0, 0), DaughterRef(1, 0), DaughterRef(1, 3)]:
            assert refs.count(ref) >= 2

    def test_leaf_has_no_infinite_enumeration(self, bouquets):
        with pytest.raises(InputError):
            daughters(bouquets["leaf"], EnumMode.INFINITELY_OFTEN)

    def test_lead_comes_first(self, bouquets):
        enum_ = DaughterEnum(bouquets["two"], EnumMode.EACH_ONCE, lead=DaughterRef(1, 0))
        assert enum_.prefix(5) == [DaughterRef(1, 0), DaughterRef(0, 0)]
        assert enum_.length == 2
        assert enum_.first_index(DaughterRef(0, 0)) == 1

    def test_each_once_with_lead_lists_every_daughter_once(self, bouquets):
        b = bouquets["spread"]
        plain = daughters(b, EnumMode.EACH_ONCE).prefix(40)
        led = DaughterEnum(b, EnumMode.EACH_ONCE, lead=DaughterRef(1, 5)).prefix(40)
        assert led[0] == DaughterRef(1, 5)
        assert len(set(led)) == len(led)
        assert set(led[1:]) <= set(plain)

    def test_cycle_indexes_far_out(self, bouquets):
        enum_ = daughters(bouquets["two"], EnumMode.INFINITELY_OFTEN)
        assert enum_.period == 2
        assert enum_[10**9] == DaughterRef(0, 0)
        assert enum_[10**9 + 1] == DaughterRef(1, 0)
        led = DaughterEnum(bouquets["two"], EnumMode.INFINITELY_OFTEN, lead=DaughterRef(1, 0))
        assert led.period is None
        assert led.prefix(4) == [DaughterRef(1, 0), DaughterRef(0, 0), DaughterRef(1, 0), DaughterRef(0, 0)]
        assert led[4999] == DaughterRef(0, 0)

    def test_family_interleaves_with_omega_slots(self):
        b = BouquetSpec("r", children=(ChildSlot(leaf("a"), None),), family=chain_family({}))
        assert [str(ref) for ref in daughters(b, EnumMode.EACH_ONCE).prefix(4)] == ["0.0", "f.0", "0.1", "f.1"]


class TestDominatingSubsequence:
    def test_alternating_ranks(self):
        b = BouquetSpec("r", children=(ChildSlot(leaf("a"), None),), family=chain_family({"start": 1}))
        enum_ = daughters(b, EnumMode.EACH_ONCE)
        assert [enum_.rank(i) for i in range(6)] == [o(t) for t in ["0", "1", "0", "2", "0", "3"]]
        m = dominating_subsequence(enum_)
        assert m.prefix(3) == [1, 3, 5]
        assert [enum_.rank(j) for j in m.prefix(3)] == [o("1"), o("2"), o("3")]

    def test_increasing_ranks(self, bouquets):
        m = dominating_subsequence(daughters(bouquets["chains"], EnumMode.EACH_ONCE))
        assert m.prefix(3) == [1, 2, 3]

    def test_conditions_hold_on_prefix(self, bouquets):
        enum_ = daughters(bouquets["above"].children[0].spec, EnumMode.EACH_ONCE)
        m = dominating_subsequence(enum_).prefix(8)
        assert m == sorted(set(m))
        for i, j in enumerate(m):
            assert enum_.rank(i) < enum_.rank(j)

    def test_bounded_ranks_are_not_cofinal(self):
        b = BouquetSpec("r", children=(ChildSlot(chain(2), None),))
        with pytest.raises(IntegrityError):
            dominating_subsequence(daughters(b, EnumMode.EACH_ONCE), budget=50)[0]


class TestModelChecking:
    def test_leaf_satisfies_box_false(self, bouquets):
        verdict = mc_bouquet(bouquets["leaf"], (), parse_formula("[]F"))
        assert verdict == McVerdict(True, True, 8)
        assert str(verdict) == "True"

    @pytest.mark.parametrize("n", range(6))
    def test_limit_root_has_every_finite_diamond_power(self, bouquets, n):
        verdict = mc_bouquet(bouquets["chains"], (), diamond_power(n))
        assert verdict.value and verdict.exact

    def test_two_leaves_are_told_apart(self, bouquets):
        phi = parse_formula("<>(p0 & []F) & <>(~p0 & []F)")
        assert str(mc_bouquet(bouquets["two"], (), phi)) == "True"

    def test_omega_slot_witness_is_exact(self, bouquets):
        assert str(mc_bouquet(bouquets["spread"], (), parse_formula("<>p1"))) == "True"
        assert str(mc_bouquet(bouquets["spread"], parse_path("1.5"), parse_formula("p1"))) == "True"

    def test_generated_family_verdicts_are_qualified(self, bouquets):
        assert str(mc_bouquet(bouquets["chains"], (), parse_formula("<>p0"), prefix=6)) == "FalseUpTo(6)"
        assert str(mc_bouquet(bouquets["chains"], (), parse_formula("<>[]F"), prefix=6)) == "TrueUpTo(6)"

    def test_family_diamond_needs_late_witnesses(self):
        def early_only(i):
            return leaf(f"e{i}", frozenset({0})) if i == 0 else chain(i + 1, prefix=f"e{i}")

        early = BouquetSpec("r", family=GeneratedFamily("early", {}, early_only))
        assert str(mc_bouquet(early, (), parse_formula("<>p0"), prefix=6)) == "FalseUpTo(6)"
        everywhere = BouquetSpec("r", family=chain_family({"val": ["p0"]}))
        assert str(mc_bouquet(everywhere, (), parse_formula("<>p0"), prefix=6)) == "TrueUpTo(6)"

    def test_structural_refutation_is_exact(self, bouquets):
        verdict = mc_bouquet(bouquets["chains"], (), parse_formula("<>(p0 & ~p0)"))
        assert verdict.exact and not verdict.value

    @pytest.mark.slow
    def test_agrees_with_kripke_semantics_on_finite_trees(self):
        two_variable = all_formulas(3, variables=2, unary=(Not, Diamond), bottom=False)
        one_variable = all_formulas(3, variables=1, unary=(Not, Diamond), bottom=False)
        for model in all_tree_models(5, variables=2):
            if len(model.nodes) == 5 and any(1 in node.valuation for node in model.nodes):
                continue
            b = from_tree_model(model)
            formulas = one_variable if len(model.nodes) == 5 else two_variable
            for phi in formulas:
                verdict = mc_bouquet(b, (), phi)
                assert verdict.exact
                assert verdict.value == check_tree(model, model.root, phi), (to_text(phi), model.to_json())

    def test_agrees_with_kripke_semantics_on_random_formulas(self):
        rng = random.Random(5)
        for _ in range(200):
            model = random_tree_model(rng, max_nodes=5, variables=2)
            b = from_tree_model(model)
            phi = random_formula(rng, depth=3, variables=2)
            verdict = mc_bouquet(b, (), phi)
            assert verdict.exact
            assert verdict.value == check_tree(model, model.root, phi)


class TestMaterializeAndJson:
    def test_materialize_cuts_omega_slots(self, bouquets):
        rows = materialize(bouquets["spread"], depth=1, prefix=2)
        assert [format_path(row.path) for row in rows] == ["", "0.0", "1.0", "1.1"]
        assert rows[2].valuation == frozenset({1})

    def test_materialize_depth_zero(self, bouquets):
        rows = materialize(bouquets["above"], depth=0, prefix=4)
        assert len(rows) == 1 and rows[0].rank == o("w+1")

    def test_json_round_trip(self, bouquets):
        for b in bouquets.values():
            data = bouquet_to_json(b)
            again = bouquet_from_json(data)
            assert bouquet_to_json(again) == data
            assert again.rank == b.rank

    def test_json_family_and_multiplicity(self):
        b = bouquet_from_json(
            {"id": "r", "children": [{"id": "a", "val": ["p1"], "mult": "w"}], "family": {"schema": "chain", "params": {"start": 1}}}
        )
        assert b.children[0].infinite
        assert b.rank == ordinals.OMEGA

    @pytest.mark.parametrize(
        "data",
        [
            {"id": "r", "children": [{"id": "a", "mult": "many"}]},
            {"id": "r", "children": [{"id": "a", "mult": 0}]},
            {"id": "r", "family": {"schema": "nope"}},
            {"id": "r", "family": {"params": {}}},
            {"id": "r", "val": ["q"]},
            ["not", "an", "object"],
        ],
    )
    def test_malformed_json(self, data):
        with pytest.raises(InputError):
            bouquet_from_json(data)

    def test_tree_model_conversions(self, bouquets):
        model = to_tree_model(bouquets["chain3"])
        assert model.rank() == 2
        assert from_tree_model(model).rank == ordinals.nat(2)
        with pytest.raises(InputError):
            to_tree_model(bouquets["spread"])
