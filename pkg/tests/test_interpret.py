import numpy as np
import pytest

from normboost.binning import Dataset
from normboost.boosting import BoostConfig, BoostModel, IterationRecord, train
from normboost.interpret import combine_scores, combined_ranking, feature_importance
from normboost.synth import generate
from normboost.tree import RegressionTree, TreeConfig


def leaf(v=0.0, cover=10):
    return RegressionTree.from_nodes([{"leaf_value": v, "cover": cover}])


def stump(feature, gain):
    return RegressionTree.from_nodes([
        {"feature": feature, "threshold": 0.5, "left": 1, "right": 2, "gain": gain, "cover": 10},
        {"leaf_value": -1.0, "cover": 5},
        {"leaf_value": 1.0, "cover": 5},
    ])


def model_of(mu_trees, psi_trees, d=4):
    its = [IterationRecord(1.0, a, b) for a, b in zip(mu_trees, psi_trees)]
    return BoostModel(0.0, 0.0, 0.1, its, [f"f{j}" for j in range(d)])


def test_all_leaf_variance_trees():
    m = model_of([stump(0, 3.0)] * 3, [leaf()] * 3)
    t = feature_importance(m, "variance")
    assert t.weight.tolist() == [0, 0, 0, 0]
    assert t.gain.tolist() == [0.0] * 4


def test_average_gain_per_use():
    m = model_of([leaf(), leaf(), leaf()], [stump(3, 4.0), leaf(), stump(3, 6.0)])
    t = feature_importance(m, "variance")
    assert t.weight[3] == 2 and t.gain[3] == 5.0 and t.total_gain[3] == 10.0
    assert t.weight.sum() == 2


def test_weight_sum_matches_internal_nodes():
    data = generate(1000, seed=4)
    model = train(Dataset(data.X, data.y), BoostConfig(iterations=20, tree=TreeConfig(max_depth=3))).model
    for name, attr in (("mean", "tree_mu"), ("variance", "tree_psi")):
        internal = sum(int((getattr(r, attr).feature >= 0).sum()) for r in model.iterations)
        t = feature_importance(model, name)
        assert t.weight.sum() == internal
        assert np.all(t.gain[t.weight == 0] == 0)
        assert np.all(t.gain >= 0)


def test_renaming_does_not_change_importance():
    m = model_of([stump(1, 2.0)], [stump(2, 7.0)])
    renamed = BoostModel(m.init_mu, m.init_psi, m.eta, m.iterations, ["a", "b", "c", "d"])
    for s in ("mean", "variance"):
        a, b = feature_importance(m, s), feature_importance(renamed, s)
        assert np.array_equal(a.weight, b.weight) and np.array_equal(a.gain, b.gain)


def test_combined_score_arithmetic():
    order, scores = combine_scores([0.8, 0.2], [0.0, 1.0], alpha=0.5)
    assert scores.tolist() == pytest.approx([0.4, 0.6])
    assert order == [1, 0]


def test_combined_extremes_match_single_sets():
    data = generate(1000, seed=6)
    model = train(Dataset(data.X, data.y), BoostConfig(iterations=30, tree=TreeConfig(max_depth=3))).model
    for kind in ("weight", "gain"):
        only_mean = [j for _, j, _ in combined_ranking(model, 1.0, kind)]
        only_var = [j for _, j, _ in combined_ranking(model, 0.0, kind)]
        assert only_mean == feature_importance(model, "mean").ranking(kind)
        assert only_var == feature_importance(model, "variance").ranking(kind)


def test_zero_importance_set_stays_zero():
    m = model_of([stump(0, 5.0)], [leaf()])
    ranked = combined_ranking(m, 0.5, "gain")
    assert ranked[0][:2] == ("f0", 0) and ranked[0][2] == 0.5
    assert all(score == 0 for _, _, score in ranked[1:])


def test_bad_arguments():
    m = model_of([leaf()], [leaf()])
    with pytest.raises(ValueError):
        feature_importance(m, "median")
    with pytest.raises(ValueError):
        combined_ranking(m, 1.5)
