import random

import pytest

from icardmaps.services.errors import BudgetExceededError, InconsistentInputError, InputError
from icardmaps.services.formulas import modal_depth, parse_formula, to_text
from icardmaps.services.gl_prover import (
    Countermodel,
    Theorem,
    TreeModel,
    TreeNode,
    characteristic_bound,
    check_tree,
    consistent,
    prove,
    require_consistent,
    satisfying_model,
)
from icardmaps.services.synthetic_data import all_formulas, all_tree_models, random_formula, random_tree_model


def _parse_all(texts):
    return [parse_formula(text) for text in texts]


class TestProve:
    @pytest.mark.parametrize(
        "text",
        ["[]([]p0 -> p0) -> []p0", "[]p0 -> [][]p0", "[](p0 -> p1) -> []p0 -> []p1", "<>T -> <>[]F", "p0 | ~p0"],
    )
    def test_theorems(self, text):
        result = prove(parse_formula(text))
        assert isinstance(result, Theorem)
        assert result.is_theorem

    @pytest.mark.parametrize("text", ["<>T", "[]p0 -> p0", "~[]F", "p0", "[][]F"])
    def test_non_theorems_get_refuting_countermodels(self, text):
        phi = parse_formula(text)
        result = prove(phi)
        assert isinstance(result, Countermodel)
        assert not check_tree(result.model, result.root, phi)

    def test_budget_is_enforced(self):
        with pytest.raises(BudgetExceededError):
            prove(parse_formula("[]([]p0 -> p0) -> []p0"), budget=2)

    @pytest.mark.slow
    def test_agrees_with_validity_on_small_formulas(self):
        trees = list(all_tree_models(4, variables=1))
        checked = 0
        for phi in all_formulas(4, variables=1):
            if modal_depth(phi) > 2:
                continue
            valid = all(check_tree(model, model.root, phi) for model in trees)
            result = prove(phi)
            assert result.is_theorem == valid, to_text(phi)
            if not valid:
                assert not check_tree(result.model, result.root, phi)
            checked += 1
        assert checked > 1000

    def test_theorems_hold_on_random_trees(self):
        rng = random.Random(11)
        trees = [random_tree_model(rng, max_nodes=6, variables=2) for _ in range(50)]
        for _ in range(500):
            phi = random_formula(rng, depth=3, variables=2)
            result = prove(phi)
            if isinstance(result, Theorem):
                for model in trees:
                    assert all(check_tree(model, n.id, phi) for n in model.nodes), to_text(phi)
            else:
                assert not check_tree(result.model, result.root, phi), to_text(phi)


class TestConsistency:
    def test_examples(self):
        assert consistent(_parse_all(["<>p0", "[]~p0 | p1"]))
        assert not consistent(_parse_all(["<>T", "[]F"]))
        assert not consistent(_parse_all(["[]p0", "<>~p0"]))
        assert consistent([])

    def test_satisfying_model_satisfies_every_formula(self):
        formulas = _parse_all(["<><>p0", "[]p1", "~p1"])
        model = satisfying_model(formulas)
        assert model is not None
        assert all(check_tree(model, model.root, f) for f in formulas)
        assert model.rank() >= 2

    def test_require_consistent_names_the_refuted_conjunction(self):
        with pytest.raises(InconsistentInputError) as excinfo:
            require_consistent(_parse_all(["p0", "~p0"]))
        assert excinfo.value.refuted == "~(p0 & ~p0)"


class TestCharacteristic:
    def test_examples(self):
        assert characteristic_bound(_parse_all(["[][]F"]), 10).value == 1
        assert characteristic_bound(_parse_all(["[]F"]), 10).value == 0
        saturated = characteristic_bound(_parse_all(["<>p0"]), 10)
        assert saturated.saturated
        assert str(saturated) == ">=10"

    def test_model_rank_stays_within_bound(self):
        bound = characteristic_bound(_parse_all(["[][][]F", "<>p1"]), 8)
        assert bound.value == 2
        assert 1 <= bound.model_rank <= 2

    def test_inconsistent_input_is_rejected(self):
        with pytest.raises(InconsistentInputError):
            characteristic_bound(_parse_all(["<>T", "[]F"]), 4)


class TestTreeModel:
    def test_json_round_trip(self):
        model = TreeModel(
            (TreeNode(0, frozenset(), (1, 2)), TreeNode(1, frozenset({0}), ()), TreeNode(2, frozenset({1}), (3,)), TreeNode(3)),
            0,
        )
        data = model.to_json()
        assert data["nodes"][1] == {"id": 1, "val": ["p0"], "children": []}
        assert TreeModel.from_json(data) == model
        assert model.rank() == 2
        assert model.descendants(0) == (1, 2, 3)

    @pytest.mark.parametrize(
        "data",
        [
            {"nodes": [{"id": 0, "children": [1]}], "root": 0},
            {"nodes": [{"id": 0}, {"id": 1}], "root": 0},
            {"nodes": [{"id": 0, "val": ["x"]}], "root": 0},
            {"nodes": [{"id": 0}], "root": 5},
            {"root": 0},
        ],
    )
    def test_malformed_models_are_rejected(self, data):
        with pytest.raises(InputError):
            TreeModel.from_json(data)

    def test_diamond_ranges_over_strict_descendants(self):
        model = TreeModel((TreeNode(0, frozenset({0}), (1,)), TreeNode(1, frozenset(), (2,)), TreeNode(2, frozenset({1}))), 0)
        assert check_tree(model, 0, parse_formula("<>p1"))
        assert not check_tree(model, 0, parse_formula("<>p0"))
        assert check_tree(model, 2, parse_formula("[]F"))
