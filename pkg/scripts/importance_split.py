"""Mean-tree vs variance-tree feature importance on synthetic data where the
noise scale depends on x2 only."""
import argparse

from normboost import BoostConfig, Dataset, TreeConfig, train
from normboost.interpret import combined_ranking, feature_importance
from normboost.synth import generate

ap = argparse.ArgumentParser()
ap.add_argument("--seed", type=int, default=0)
ap.add_argument("--alpha", type=float, default=0.5)
args = ap.parse_args()

data = generate(5000, seed=args.seed)
model = train(Dataset(data.X, data.y, data.feature_names),
              BoostConfig(iterations=200, learning_rate=0.1, tree=TreeConfig(max_depth=3))).model
mean_t = feature_importance(model, "mean")
var_t = feature_importance(model, "variance")

print(f"{'feature':8s} {'mean_w':>7s} {'mean_gain':>10s} {'var_w':>7s} {'var_gain':>10s}")
for j, name in enumerate(model.feature_names):
    print(f"{name:8s} {mean_t.weight[j]:7d} {mean_t.gain[j]:10.3f} {var_t.weight[j]:7d} {var_t.gain[j]:10.3f}")

print(f"\ncombined ranking (alpha={args.alpha}):")
for name, _, score in combined_ranking(model, args.alpha):
    print(f"  {name:8s} {score:.3f}")
