"""Command line entry point: ``pathnorm <subcommand> ...``.

Exit codes: 0 success, 1 check failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from pathnorm import __version__
from pathnorm.bounds import BoundReport
from pathnorm.complexity import rademacher_bounds, rademacher_lower_estimate
from pathnorm.construct import TwoLayerRep, build_fc, build_resnet, normalize_two_layer
from pathnorm.experiment import (
    ConfigError,
    grid_points,
    parse_config,
    prepare_point,
    results_csv,
    run_experiment,
)
from pathnorm.io import config_hash, csv_text, dumps
from pathnorm.netcore import ModelFileError, ResNetArch, load_model, params_to_json, save_model
from pathnorm.norms import norm_report
from pathnorm.targets import BarronMixture, uniform_inputs

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read_json(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    if not isinstance(obj, dict):
        raise UsageError(f"{path}: top level must be an object")
    return obj


def _check_keys(obj: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise UsageError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _emit(text: str, out_dir, name: str) -> None:
    if out_dir is None:
        sys.stdout.write(text)
        return
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text, encoding="utf-8", newline="\n")


def _table(rows: list[dict], fmt: str, header=None, meta=None) -> str:
    if fmt == "json":
        return dumps({**(meta or {}), "rows": rows}) + "\n"
    if header is None:
        header = list(rows[0]) if rows else []
    return csv_text(header, rows)


# --- subcommands ----------------------------------------------------------------


def cmd_norms(args) -> int:
    params = load_model(args.model)
    report = norm_report(params).to_json()
    if args.format == "csv":
        _emit(csv_text(list(report), [report]), args.out, "norms.csv")
    else:
        _emit(dumps(report) + "\n", args.out, "norms.json")
    return EXIT_OK


def cmd_construct(args) -> int:
    """Build a resnet or fc model from a two-layer rep or a mixture file."""
    obj = _read_json(args.input)
    if "atoms" in obj:
        rep = TwoLayerRep.from_mixture(BarronMixture.from_json(obj))
    elif "a" in obj and "b" in obj:
        rep = TwoLayerRep.from_json(obj)
    else:
        raise UsageError(f"{args.input}: expected a two-layer rep {{a, b}} or a mixture {{atoms}}")
    if args.normalize or args.kind == "fc":
        rep = normalize_two_layer(rep)
    params = build_resnet(rep, args.L, args.m) if args.kind == "resnet" else build_fc(rep, args.L, args.m)
    if args.out is None:
        sys.stdout.write(dumps(params_to_json(params)) + "\n")
    else:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        save_model(params, Path(args.out) / "model.json")
    return EXIT_OK


def _config_with_seed(args) -> dict:
    obj = _read_json(args.config)
    if args.seed is not None:
        obj["seed"] = args.seed
    return obj


def cmd_train(args) -> int:
    """Fit one model from an experiment-style config (its first grid point)."""
    from pathnorm.train import train

    cfg = parse_config(_config_with_seed(args))
    pp = prepare_point(cfg, grid_points(cfg)[0])
    params, hist = train(pp.train_config, pp.data, pp.arch, init=pp.init)
    chash = config_hash(cfg.to_json())
    rows = [dict(r, config_hash=chash) for r in hist.rows()]
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    save_model(params, out / "model.json")
    header = ["epoch", "risk", "path_norm", "objective", "config_hash"]
    (out / "history.csv").write_text(csv_text(header, rows), encoding="utf-8", newline="\n")
    meta = {
        "version": __version__,
        "config_hash": chash,
        "config": cfg.to_json(),
        "train_config": pp.train_config.to_json(),
        "seeds": pp.seeds,
    }
    (out / "train.json").write_text(dumps(meta) + "\n", encoding="utf-8", newline="\n")
    return EXIT_OK


RAD_KEYS = {"Q", "d", "n", "L", "m", "D", "n_xi", "restarts", "steps", "step", "seed"}


def cmd_rademacher(args) -> int:
    """Grid of lower estimates; list-valued keys are swept as a cartesian product."""
    import itertools

    raw = _config_with_seed(args)
    _check_keys(raw, RAD_KEYS, "rademacher config")
    grid = {k: raw.get(k, dflt) for k, dflt in (("Q", 1.0), ("d", 3), ("n", 12), ("L", 2), ("m", 4))}
    grid = {k: v if isinstance(v, list) else [v] for k, v in grid.items()}
    kw = {k: raw[k] for k in ("n_xi", "restarts", "steps", "step") if k in raw}
    seed = int(raw.get("seed", 0))
    rows = []
    for i, (Q, d, n, L, m) in enumerate(itertools.product(*grid.values())):
        D = int(raw.get("D") or d + 1)
        X = uniform_inputs(np.random.default_rng(seed + i), int(n), int(d))
        est, se = rademacher_lower_estimate(X, float(Q), ResNetArch(int(d), D, int(m), int(L)), seed=seed + i, **kw)
        rows.append(dict(Q=float(Q), d=int(d), n=int(n), L=int(L), m=int(m), estimate=est, se=se,
                         bound=rademacher_bounds("resnet", float(Q), int(d), int(n)), seed=seed + i))
    chash = config_hash(raw)
    rows = [dict(r, config_hash=chash) for r in rows]
    header = ["Q", "d", "n", "L", "m", "estimate", "se", "bound", "seed", "config_hash"]
    name = "rademacher." + args.format
    _emit(_table(rows, args.format, header, {"version": __version__, "config": raw}), args.out, name)
    return EXIT_OK


BOUND_KEYS = {"barron", "L", "m", "d", "n", "lam", "delta", "B", "c", "sigma", "path_norm"}


def cmd_bound(args) -> int:
    raw = _read_json(args.config)
    _check_keys(raw, BOUND_KEYS, "bound config")
    missing = sorted({"barron", "L", "m", "d", "n", "lam", "delta"} - set(raw))
    if missing:
        raise UsageError(f"bound config is missing: {', '.join(missing)}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        report = BoundReport(**raw)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    chash = config_hash(raw)
    if args.format == "csv":
        row = dict(report.csv_row(), config_hash=chash)
        _emit(csv_text(list(row), [row]), args.out, "bounds.csv")
    else:
        _emit(dumps({**report.to_json(), "config_hash": chash, "version": __version__}) + "\n", args.out, "bounds.json")
    return EXIT_OK


def cmd_experiment(args) -> int:
    try:
        cfg = parse_config(_config_with_seed(args))
    except (ConfigError, TypeError) as exc:
        raise UsageError(str(exc))
    rows, report = run_experiment(cfg, jobs=args.jobs)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(results_csv(rows, report["config_hash"]), encoding="utf-8", newline="\n")
    (out / "report.json").write_text(dumps(report) + "\n", encoding="utf-8", newline="\n")
    for r in rows:
        if r["error"]:
            print(f"grid point {r['index']}: {r['error']}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    from pathnorm.verify import SCOPES, run_scope

    if args.scope != "all" and args.scope not in SCOPES:
        raise UsageError(f"unknown scope {args.scope!r}")
    checks = run_scope(args.scope)
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_FAIL if failed else EXIT_OK


# --- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pathnorm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True, fmt=True):
        if config:
            p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default=None, help="output directory (default: stdout or cwd)")
        p.add_argument("--seed", type=int, default=None, help="override the base seed")
        p.add_argument("--jobs", type=int, default=1, help="parallel grid points")
        if fmt:
            p.add_argument("--format", choices=("csv", "json"), default="json")

    p = sub.add_parser("norms", help="norm report for a model file")
    p.add_argument("model")
    common(p, config=False)
    p.set_defaults(func=cmd_norms)

    p = sub.add_parser("construct", help="lift a two-layer rep or mixture into a deep net")
    p.add_argument("input", help="two-layer rep {a, b} or mixture {atoms} JSON")
    p.add_argument("--kind", choices=("resnet", "fc"), default="resnet")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--normalize", action="store_true")
    common(p, config=False, fmt=False)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("train", help="fit the regularized estimator")
    common(p, fmt=False)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("rademacher", help="lower estimates of the network-class complexity")
    common(p)
    p.set_defaults(func=cmd_rademacher, format="csv")

    p = sub.add_parser("bound", help="evaluate every bound for one configuration")
    common(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("experiment", help="run a grid experiment")
    common(p, fmt=False)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("verify", help="run check batteries")
    p.add_argument("--scope", default="all")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, TypeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
