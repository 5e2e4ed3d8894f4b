import random

from hypothesis import given, settings
from hypothesis import strategies as st

from icardmaps.services.formulas import size, to_text
from icardmaps.services.gl_prover import check_tree, consistent
from icardmaps.services.synthetic_data import (
    SAMPLE_LAMBDAS,
    all_formulas,
    all_tree_models,
    random_consistent_set,
    random_formula,
    random_tree_model,
    sample_bouquets,
    sample_lambdas,
    tree_shapes,
)


def test_sample_names():
    assert list(sample_bouquets()) == ["leaf", "two", "chain3", "spread", "chains", "above"]


def test_sample_lambdas_parse():
    assert [str(lam) for lam in sample_lambdas()] == SAMPLE_LAMBDAS


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=50, deadline=None)
def test_random_trees_are_well_formed(seed):
    model = random_tree_model(random.Random(seed), max_nodes=6)
    assert model.root == 0
    for node in model.nodes:
        assert all(child > node.id for child in node.children)
    assert check_tree(model, 0, random_formula(random.Random(seed), depth=2)) in (True, False)


def test_random_formulas_use_requested_variables():
    rng = random.Random(7)
    for _ in range(50):
        text = to_text(random_formula(rng, depth=3, variables=2))
        assert "p2" not in text


def test_random_consistent_set():
    gamma = random_consistent_set(random.Random(3), size=3)
    assert gamma
    assert consistent(gamma)


def test_tree_shapes_cover_every_small_tree():
    shapes = list(tree_shapes(4))
    assert len(shapes) == 9
    assert (0, 0, 0) in shapes and (0, 1, 2) in shapes
    assert all(list(parents) == sorted(parents) for parents in shapes)


def test_all_tree_models_count():
    models = list(all_tree_models(2, variables=1))
    assert len(models) == 2 + 4
    assert all(check_tree(m, m.root, all_formulas(0, 1)[0]) in (True, False) for m in models)


def test_all_formulas_by_connectives():
    formulas = all_formulas(1, variables=1)
    assert len(formulas) == 2 + 3 * 2 + 2 * 2
    assert len(set(formulas)) == len(formulas)
    assert {size(phi) for phi in all_formulas(2, variables=1)} == {0, 1, 2}
