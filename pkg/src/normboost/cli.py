"""Command line: train, predict, evaluate, importance, synth.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""
import argparse
import csv
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import synth as synth_mod
from .binning import Dataset
from .boosting import BoostConfig, load_model, predict, save_model, train
from .dist_normal import NormalParams, point_prediction, relative_std
from .errors import IngestionError, InvalidInputError, ModelFormatError
from .interpret import combine_scores, feature_importance
from .metrics import EvalInput, accuracy_within, calibration_report, mape, nll_mean
from .tree import TreeConfig

log = logging.getLogger("normboost")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    input: str = None
    output: str = None
    model: str = None
    target: str = "y"
    log_transform: bool = False
    seed: int = 42

    def require(self, *names):
        for name in names:
            if not getattr(self, name):
                raise UsageError(f"{self.subcommand}: --{name} is required")


def read_csv(path, target=None, required_target=True):
    """Returns (feature_names, X, y or None). Every cell must be a finite number."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise IngestionError(f"{path} is empty") from None
        if len(set(header)) != len(header):
            raise IngestionError(f"{path} has duplicate column names")
        if target is not None and target not in header:
            if required_target:
                raise IngestionError(f"target column {target!r} not found in {path}")
            target = None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise IngestionError(
                    f"expected {len(header)} cells, got {len(row)}", row=lineno
                )
            values = []
            for name, cell in zip(header, row):
                try:
                    v = float(cell)
                except ValueError:
                    raise IngestionError(f"not a number: {cell!r}", row=lineno, column=name) from None
                if not math.isfinite(v):
                    raise IngestionError("non-finite value", row=lineno, column=name)
                values.append(v)
            rows.append(values)
    data = np.array(rows, dtype=np.float64).reshape(len(rows), len(header))
    names = [h for h in header if h != target]
    X = data[:, [header.index(h) for h in names]]
    y = data[:, header.index(target)] if target is not None else None
    return names, X, y


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _model_scale_targets(y, log_transform):
    if not log_transform:
        return y
    bad = np.flatnonzero(~(y > 0))
    if len(bad):
        # +2: one header line, 1-based lines
        raise IngestionError("target must be positive under --log-transform", row=int(bad[0]) + 2)
    return np.log(y)


def _load_model(path):
    return load_model(Path(path).read_text())


def _match_features(model, names, X):
    missing = [n for n in model.feature_names if n not in names]
    extra = [n for n in names if n not in model.feature_names]
    if missing or extra:
        raise InvalidInputError(f"feature mismatch: missing {missing}, extra {extra}")
    return X[:, [names.index(n) for n in model.feature_names]]


def cmd_train(rc, cfg, trace_path=None):
    rc.require("input", "output")
    names, X, y = read_csv(rc.input, rc.target)
    y = _model_scale_targets(y, rc.log_transform)
    result = train(Dataset(X, y, names), cfg)
    model = result.model
    model.target_transform = "log" if rc.log_transform else "none"
    Path(rc.output).write_text(save_model(model))
    trace_path = trace_path or rc.output + ".nll.csv"
    write_csv(
        trace_path, ["iteration", "rho", "train_nll"],
        [(m + 1, rec.rho, nll) for m, (rec, nll) in enumerate(zip(model.iterations, result.nll_trace))],
    )
    if result.skipped_all:
        print("warning: no iteration improved the training NLL", file=sys.stderr)
    print(f"trained {len(model.iterations)} iterations; final train NLL {result.nll_trace[-1]:.6f}")
    return EXIT_OK


def cmd_predict(rc):
    rc.require("model", "input", "output")
    model = _load_model(rc.model)
    names, X, _ = read_csv(rc.input, rc.target, required_target=False)
    p = predict(model, _match_features(model, names, X))
    sigma = p.sigma
    log_model = model.target_transform == "log"
    point = point_prediction(p) if log_model else p.mu
    rstd = np.full(len(sigma), np.nan)
    ok = sigma * sigma <= 700
    if not ok.all():
        log.warning("relative_std left blank for %d rows with sigma^2 > 700", int((~ok).sum()))
    rstd[ok] = relative_std(NormalParams(p.mu[ok], p.psi[ok]))
    rows = [
        (float(m), float(s), float(pt), float(r) if ok_i else "")
        for m, s, pt, r, ok_i in zip(p.mu, sigma, point, rstd, ok)
    ]
    write_csv(rc.output, ["mu", "sigma", "point_prediction", "relative_std"], rows)
    return EXIT_OK


def cmd_evaluate(rc, buckets=10, target_is_log=False):
    rc.require("model", "input", "output")
    model = _load_model(rc.model)
    names, X, y = read_csv(rc.input, rc.target)
    p = predict(model, _match_features(model, names, X))
    if model.target_transform == "log":
        inp = EvalInput(p, _model_scale_targets(y, True), y)
    elif target_is_log:
        inp = EvalInput(p, y, np.exp(y))
    else:
        raise InvalidInputError(
            "MAPE/ACCURACY need original-scale targets: train with --log-transform "
            "or pass --target-is-log if the target column is already a log"
        )
    report = calibration_report(inp, buckets)
    overall = ("all", float(np.exp(p.psi.min())), float(np.exp(p.psi.max())), len(inp),
               mape(inp), accuracy_within(inp), nll_mean(inp))
    header = ["bucket", "sigma_min", "sigma_max", "count", "mape", "accuracy", "nll"]
    rows = [[r[h] for h in header] for r in report.rows()] + [list(overall)]
    write_csv(rc.output, header, rows)
    print(f"MAPE {overall[4]:.6f}  ACCURACY {overall[5]:.6f}  NLL {overall[6]:.6f}")
    return EXIT_OK


def cmd_importance(rc, alpha=0.5, kind="gain"):
    rc.require("model", "output")
    model = _load_model(rc.model)
    mean_t = feature_importance(model, "mean")
    var_t = feature_importance(model, "variance")
    order, scores = combine_scores(mean_t.values(kind), var_t.values(kind), alpha)
    rows = []
    for rank, j in enumerate(order, start=1):
        rows.append((rank, model.feature_names[j],
                     int(mean_t.weight[j]), float(mean_t.gain[j]), float(mean_t.total_gain[j]),
                     int(var_t.weight[j]), float(var_t.gain[j]), float(var_t.total_gain[j]),
                     float(scores[j])))
    write_csv(rc.output, ["rank", "feature", "mean_weight", "mean_gain", "mean_total_gain",
                          "variance_weight", "variance_gain", "variance_total_gain",
                          "combined_score"], rows)
    return EXIT_OK


def cmd_synth(rc, n, d, family, noise):
    rc.require("output")
    data = synth_mod.generate(n, d, family, rc.seed, noise)
    header = list(data.feature_names) + [rc.target]
    write_csv(rc.output, header,
              [list(map(float, x)) + [float(t)] for x, t in zip(data.X, data.y)])
    write_csv(sidecar_path(rc.output), ["sigma"], [[float(s)] for s in data.sigma])
    return EXIT_OK


def sidecar_path(output):
    p = Path(output)
    return str(p.with_name(p.stem + ".sigma.csv"))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser():
    parser = _Parser(prog="normboost", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--input")
        p.add_argument("--output")
        p.add_argument("--target", default="y")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("-v", "--verbose", action="store_true")
        return p

    p = common(sub.add_parser("train", help="fit a model on a labeled CSV"))
    p.add_argument("--log-transform", action="store_true")
    p.add_argument("--iterations", type=int, default=300)
    p.add_argument("--learning-rate", type=float, default=0.3)
    p.add_argument("--max-depth", type=int, default=6)
    p.add_argument("--max-bins", type=int, default=64)
    p.add_argument("--min-samples-leaf", type=int, default=20)
    p.add_argument("--trace", help="training NLL CSV (default: <output>.nll.csv)")

    p = common(sub.add_parser("predict", help="write mu, sigma, point forecast, relative std"))
    p.add_argument("--model")

    p = common(sub.add_parser("evaluate", help="MAPE, ACCURACY, NLL and the sigma-bucket table"))
    p.add_argument("--model")
    p.add_argument("--buckets", type=int, default=10)
    p.add_argument("--target-is-log", action="store_true",
                   help="target column is already log scale; original scale is exp(target)")

    p = common(sub.add_parser("importance", help="mean/variance feature importance table"))
    p.add_argument("--model")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--kind", choices=["weight", "gain"], default="gain")

    p = common(sub.add_parser("synth", help="generate a synthetic labeled CSV"))
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--d", type=int, default=5)
    p.add_argument("--family", choices=list(synth_mod.FAMILIES), default="hetero")
    p.add_argument("--noise", type=float, default=0.5, help="sigma for the homo family")
    return parser


def run(args):
    rc = RunConfig(
        subcommand=args.subcommand,
        input=args.input,
        output=args.output,
        model=getattr(args, "model", None),
        target=args.target,
        log_transform=getattr(args, "log_transform", False),
        seed=args.seed,
    )
    if args.subcommand == "train":
        try:
            cfg = BoostConfig(
                iterations=args.iterations,
                learning_rate=args.learning_rate,
                tree=TreeConfig(max_depth=args.max_depth, min_samples_leaf=args.min_samples_leaf),
                max_bins=args.max_bins,
                threads=args.threads,
            )
        except InvalidInputError as e:
            raise UsageError(str(e)) from None
        if not 2 <= args.max_bins <= 256:
            raise UsageError(f"--max-bins must be in [2, 256], got {args.max_bins}")
        return cmd_train(rc, cfg, args.trace)
    if args.subcommand == "predict":
        return cmd_predict(rc)
    if args.subcommand == "evaluate":
        return cmd_evaluate(rc, args.buckets, args.target_is_log)
    if args.subcommand == "importance":
        return cmd_importance(rc, args.alpha, args.kind)
    return cmd_synth(rc, args.n, args.d, args.family, args.noise)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelFormatError, InvalidInputError, OSError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except Exception as e:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
