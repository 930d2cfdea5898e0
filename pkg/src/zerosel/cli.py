"""Command-line front end: ``zerosel {synth,select,evaluate,sweep,compare}``.

Every command writes into the directory given by ``--out``:

* synth     seen/unseen feature, label and attribute files plus ``manifest.txt``
* select    ``ranking.txt`` (and ``trace.csv`` for semfs / semfs_c)
* evaluate  ``evaluation.csv``
* sweep     ``sweep.csv`` (and ``ranking.txt`` when the ranking was computed here)
* compare   ``compare.csv``

``--manifest`` additionally dumps the resolved options to ``run_manifest.txt``.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import baselines, semfs
from .data import (
    SYNTH_FILES,
    DataError,
    SyntheticParams,
    expand_semantic_labels,
    export_synthetic,
    format_float,
    generate_synthetic_zero_shot,
    load_attribute_table,
    load_labels,
    load_matrix,
    make_rng,
    one_hot_attributes,
    read_report,
    write_key_values,
    write_report,
)
from .evaluation import DEFAULT_COUNTS, EvalReport, evaluate_selection, sweep_feature_counts

METHODS = ("semfs", "semfs_c", "l21", "ridge", "random")
SUPERVISIONS = ("attributes", "class_labels")
DEFAULT_RATIOS = tuple(round(0.1 * i, 1) for i in range(1, 11))
EVAL_COLUMNS = ("k_features", "acc_mean", "acc_sd", "nmi_mean", "nmi_sd", "repeats")


class CliError(Exception):
    pass


# ---------------------------------------------------------------------------
# shared pieces

def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _out_dir(args) -> Path:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {out}: {exc.strerror}") from exc
    return out


def _dump_manifest(args, out: Path) -> None:
    if args.manifest:
        items = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "manifest")}
        items = {k: ("" if v is None else v) for k, v in items.items()}
        write_key_values(out / "run_manifest.txt", items)


def _fill_from_data_dir(args) -> None:
    data = getattr(args, "data", None)
    if not data:
        return
    base = Path(data)
    defaults = {
        "features": SYNTH_FILES[0],
        "labels": SYNTH_FILES[1],
        "attrs": SYNTH_FILES[2],
        "unseen_features": SYNTH_FILES[3],
        "unseen_labels": SYNTH_FILES[4],
    }
    for attr, name in defaults.items():
        if getattr(args, attr, None) is None:
            setattr(args, attr, str(base / name))


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise CliError(f"missing required option(s): {flags}")


def _load_seen(args):
    _require(args, "features", "labels")
    x = load_matrix(args.features)
    labels = load_labels(args.labels)
    if x.shape[0] != labels.shape[0]:
        raise CliError(f"{args.features} has {x.shape[0]} rows but {args.labels} has {labels.shape[0]} labels")
    c = int(labels.max()) + 1
    attrs = load_attribute_table(args.attrs, c) if args.attrs is not None else None
    return x, labels, attrs


def _load_unseen(args):
    _require(args, "unseen_features", "unseen_labels")
    x = load_matrix(args.unseen_features)
    labels = load_labels(args.unseen_labels)
    if x.shape[0] != labels.shape[0]:
        raise CliError(
            f"{args.unseen_features} has {x.shape[0]} rows but {args.unseen_labels} has {labels.shape[0]} labels"
        )
    return x, labels


def _supervision_table(labels, attrs, supervision):
    c = int(labels.max()) + 1
    if supervision == "class_labels":
        return one_hot_attributes(c)
    if attrs is None:
        raise CliError("--attrs is required for attribute supervision")
    return attrs


def compute_ranking(method, x, labels, attrs, supervision, alpha, gamma, seed):
    """Rank all features with one method; returns ``(ranking, header, semfs_result_or_None)``."""
    header = {"method": method, "supervision": supervision}
    if method == "random":
        ranking = baselines.select_random(x.shape[1], x.shape[1], seed)
        header["seed"] = seed
        return ranking, header, None
    table = _supervision_table(labels, attrs, supervision)
    if method in ("semfs", "semfs_c"):
        a = 0.0 if method == "semfs_c" else alpha
        res = semfs.fit(x, labels, table, semfs.SemfsConfig(alpha=a, gamma=gamma))
        header.update(alpha=a, gamma=gamma, iterations_run=res.iterations_run, converged=res.converged)
        return res.ranking, header, res
    ys = expand_semantic_labels(labels, table)
    if method == "ridge":
        _, ranking = baselines.fit_ridge(x, ys, gamma)
        header["gamma"] = gamma
        return ranking, header, None
    if method == "l21":
        res = baselines.fit_l21(x, ys, baselines.L21Config(gamma=gamma))
        header.update(gamma=gamma, iterations_run=res.iterations_run, converged=res.converged)
        return res.ranking, header, None
    raise CliError(f"unknown method {method!r}")


def _write_trace(path, res: semfs.SelectionResult) -> None:
    tr = res.objective_trace
    with open(path, "w") as fh:
        fh.write("iteration,objective,decrease,pgd_steps_accepted\n")
        fh.write(f"0,{format_float(tr[0])},0,0\n")
        for i in range(1, tr.size):
            fh.write(f"{i},{format_float(tr[i])},{format_float(tr[i - 1] - tr[i])},"
                     f"{res.pgd_steps_accepted[i - 1]}\n")


def _write_eval_csv(path, reports: list[EvalReport]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(EVAL_COLUMNS) + "\n")
        for r in reports:
            fh.write(f"{r.k_features},{format_float(r.acc_mean)},{format_float(r.acc_sd)},"
                     f"{format_float(r.nmi_mean)},{format_float(r.nmi_sd)},{r.repeats}\n")


def _ranking_for_eval(args, out: Path | None):
    """Use ``--ranking`` if given, otherwise run ``--method`` on the seen data."""
    if args.ranking is not None:
        ranking, _ = read_report(args.ranking)
        return ranking
    x, labels, attrs = _load_seen(args)
    ranking, header, _ = compute_ranking(args.method, x, labels, attrs, args.supervision,
                                         args.alpha, args.gamma, args.seed)
    if out is not None:
        write_report(out / "ranking.txt", ranking, header)
    return ranking


def subsample_per_class(labels, ratio: float, seed: int):
    """Indices keeping ``round(ratio * size)`` members of every class (at least one).

    Returns the sorted kept indices and the number of classes that were
    raised to the one-member floor.
    """
    if not 0 < ratio <= 1:
        raise ValueError(f"ratio must lie in (0, 1], got {ratio}")
    labels = np.asarray(labels)
    rng = make_rng(seed, 1)
    keep = []
    floored = 0
    for j in range(int(labels.max()) + 1):
        members = np.flatnonzero(labels == j)
        n_keep = int(round(ratio * members.size))
        if n_keep < 1:
            n_keep = 1
            floored += 1
        if n_keep >= members.size:
            keep.append(members)
        else:
            keep.append(np.sort(rng.choice(members, size=n_keep, replace=False)))
    return np.sort(np.concatenate(keep)), floored


# ---------------------------------------------------------------------------
# commands

def run_synth(args) -> int:
    params = SyntheticParams(
        n_seen=args.n_seen, n_unseen=args.n_unseen, d=args.d, m=args.m,
        c_seen=args.c_seen, c_unseen=args.c_unseen, k_info=args.k_info,
        attr_noise_sd=args.attr_noise_sd, feature_noise_sd=args.feature_noise_sd,
    )
    ds = generate_synthetic_zero_shot(params, args.seed)
    out = _out_dir(args)
    export_synthetic(ds, out)
    _dump_manifest(args, out)
    return 0


def run_select(args) -> int:
    x, labels, attrs = _load_seen(args)
    out = _out_dir(args)
    ranking, header, res = compute_ranking(args.method, x, labels, attrs, args.supervision,
                                           args.alpha, args.gamma, args.seed)
    write_report(out / "ranking.txt", ranking, header)
    if res is not None:
        _write_trace(out / "trace.csv", res)
    _dump_manifest(args, out)
    return 0


def run_evaluate(args) -> int:
    _require(args, "k")
    xu, lu = _load_unseen(args)
    out = _out_dir(args)
    ranking = _ranking_for_eval(args, None)
    if not 1 <= args.k <= ranking.size:
        raise CliError(f"--k {args.k} outside [1, {ranking.size}]")
    rep = evaluate_selection(xu, lu, ranking[: args.k], repeats=args.repeats, seed=args.seed,
                             standardize=args.standardize)
    _write_eval_csv(out / "evaluation.csv", [rep])
    _dump_manifest(args, out)
    return 0


def run_sweep(args) -> int:
    xu, lu = _load_unseen(args)
    counts = args.counts or list(DEFAULT_COUNTS)
    out = _out_dir(args)
    ranking = _ranking_for_eval(args, out)
    if ranking.size != xu.shape[1]:
        raise CliError(f"ranking covers {ranking.size} features but unseen data has {xu.shape[1]}")
    too_big = [c for c in counts if c > ranking.size or c < 1]
    if too_big:
        raise CliError(f"feature counts {too_big} outside [1, {ranking.size}]")
    reports = sweep_feature_counts(xu, lu, ranking, counts, repeats=args.repeats, seed=args.seed,
                                   standardize=args.standardize)
    _write_eval_csv(out / "sweep.csv", reports)
    _dump_manifest(args, out)
    return 0


def run_compare(args) -> int:
    x, labels, attrs = _load_seen(args)
    xu, lu = _load_unseen(args)
    methods = [m.strip() for m in args.method.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise CliError(f"unknown method(s) {bad}; choose from {', '.join(METHODS)}")
    sups = list(SUPERVISIONS) if args.supervision == "both" else [args.supervision]
    ratios = args.ratios or list(DEFAULT_RATIOS)
    counts = args.counts or list(DEFAULT_COUNTS)
    too_big = [c for c in counts if c > x.shape[1] or c < 1]
    if too_big:
        raise CliError(f"feature counts {too_big} outside [1, {x.shape[1]}]")
    out = _out_dir(args)
    rows = []
    for method in methods:
        for sup in sups:
            for ratio in ratios:
                keep, floored = subsample_per_class(labels, ratio, args.seed)
                ranking, _, _ = compute_ranking(method, x[keep], labels[keep], attrs, sup,
                                                args.alpha, args.gamma, args.seed)
                reports = sweep_feature_counts(xu, lu, ranking, counts, repeats=args.repeats,
                                               seed=args.seed, standardize=args.standardize)
                for rep in reports:
                    rows.append((method, sup, ratio, rep, floored))
    with open(out / "compare.csv", "w") as fh:
        fh.write("method,supervision,ratio,k_features,acc_mean,nmi_mean,floored_classes\n")
        for method, sup, ratio, rep, floored in rows:
            fh.write(f"{method},{sup},{format_float(ratio)},{rep.k_features},"
                     f"{format_float(rep.acc_mean)},{format_float(rep.nmi_mean)},{floored}\n")
    _dump_manifest(args, out)
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(p, seen=True, unseen=False, method=True):
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--manifest", action="store_true", help="write run_manifest.txt with resolved options")
    if seen or unseen:
        p.add_argument("--data", help="directory produced by `zerosel synth`; fills unset data paths")
    if seen:
        p.add_argument("--features", help="seen-class features CSV (n x d)")
        p.add_argument("--labels", help="seen-class labels, one integer per line")
        p.add_argument("--attrs", help="seen-class attribute table CSV (c x m)")
    if unseen:
        p.add_argument("--unseen-features", dest="unseen_features")
        p.add_argument("--unseen-labels", dest="unseen_labels")
        p.add_argument("--standardize", action="store_true", help="z-score selected columns before clustering")
        p.add_argument("--repeats", type=int, default=20)
    if method:
        p.add_argument("--method", default="semfs", help="one of " + ", ".join(METHODS))
        p.add_argument("--alpha", type=float, default=1.0)
        p.add_argument("--gamma", type=float, default=0.1)
        p.add_argument("--supervision", default="attributes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zerosel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic seen/unseen dataset")
    _add_common(p, seen=False, method=False)
    defaults = SyntheticParams()
    for name in defaults.__dataclass_fields__:
        kind = float if name.endswith("_sd") else int
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=kind, default=getattr(defaults, name))
    p.set_defaults(func=run_synth)

    p = sub.add_parser("select", help="rank features on seen-class data")
    _add_common(p)
    p.set_defaults(func=run_select)

    for name, func, helptext in (
        ("evaluate", run_evaluate, "cluster unseen data on the top-k features"),
        ("sweep", run_sweep, "evaluate a range of feature counts"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_common(p, unseen=True)
        p.add_argument("--ranking", help="ranking report from `zerosel select` (skips selection)")
        if name == "evaluate":
            p.add_argument("--k", type=int, help="number of top-ranked features")
        else:
            p.add_argument("--counts", type=_int_list, help="comma-separated feature counts (default 5..50 step 5)")
        p.set_defaults(func=func)

    p = sub.add_parser("compare", help="supervision and labeled-ratio comparisons")
    _add_common(p, unseen=True)
    p.set_defaults(supervision="both")
    p.add_argument("--counts", type=_int_list)
    p.add_argument("--ratios", type=_float_list, help="labeled ratios per seen class (default 0.1..1.0)")
    p.set_defaults(func=run_compare)
    return parser


def _validate(args) -> None:
    if args.command != "synth":
        methods = args.method.split(",")
        if args.command != "compare" and len(methods) != 1:
            raise CliError("--method takes a single method for this command")
        for m in methods:
            if m.strip() not in METHODS:
                raise CliError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
        allowed = SUPERVISIONS + (("both",) if args.command == "compare" else ())
        if args.supervision not in allowed:
            raise CliError(f"--supervision must be one of {', '.join(allowed)}")
        if not args.gamma > 0:
            raise CliError("--gamma must be > 0")
        if not args.alpha >= 0:
            raise CliError("--alpha must be >= 0")
    if getattr(args, "repeats", 1) < 1:
        raise CliError("--repeats must be >= 1")
    if args.seed < 0:
        raise CliError("--seed must be non-negative")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _fill_from_data_dir(args)
        _validate(args)
        return args.func(args)
    except (CliError, DataError, ValueError, OSError, ArithmeticError) as exc:
        print(f"zerosel {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
