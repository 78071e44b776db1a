"""Accuracy vs predicted-uncertainty buckets on synthetic heteroscedastic data.

    python scripts/calibration_curve.py --seeds 5 --buckets 10
"""
import argparse

import numpy as np
from scipy.stats import spearmanr

from normboost import BoostConfig, Dataset, TreeConfig, predict, train
from normboost.metrics import EvalInput, calibration_report
from normboost.synth import generate


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--buckets", type=int, default=10)
    ap.add_argument("--n-train", type=int, default=5000)
    ap.add_argument("--n-test", type=int, default=1000)
    ap.add_argument("--iterations", type=int, default=200)
    args = ap.parse_args()

    cfg = BoostConfig(iterations=args.iterations, learning_rate=0.1, tree=TreeConfig(max_depth=3))
    curves = []
    for seed in range(args.seeds):
        tr = generate(args.n_train, seed=seed)
        te = generate(args.n_test, seed=1000 + seed)
        p = predict(train(Dataset(tr.X, tr.y, tr.feature_names), cfg).model, te.X)
        rep = calibration_report(EvalInput(p, te.y, np.exp(te.y)), args.buckets)
        acc = rep.column("accuracy")
        curves.append((acc, rep.column("mape")))
        print(f"seed {seed}: spearman(sigma_hat, sigma) = {spearmanr(p.sigma, te.sigma)[0]:.3f}, "
              f"spearman(bucket, accuracy) = {spearmanr(np.arange(len(acc)), acc)[0]:.3f}")

    print("\nbucket  mean_accuracy  mean_mape")
    mean_acc, mean_mape = np.mean(curves, axis=0)
    for k, (a, m) in enumerate(zip(mean_acc, mean_mape), start=1):
        print(f"{k:6d}  {a:13.3f}  {m:9.3f}")


if __name__ == "__main__":
    main()
