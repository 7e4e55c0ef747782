"""Command-line surface: evaluation, validation, design lookup, experiments,
and batch scoring.

Exit codes are a stable contract: 0 success, 1 validation-negative,
2 usage/config error, 3 numerical-domain error.  All numeric output comes
from the library calls; the CLI performs no arithmetic of its own.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys

from .config import (
    domain_from_document,
    domain_from_mapping,
    load_document,
    spec_from_document,
    spec_to_mapping,
)
from .curves import CurveTable
from .errors import ConfigError, SelmatchError
from .experiments import (
    MULTICLASS_BUNDLES,
    SCALING_BUNDLES,
    SENSITIVITY_BUNDLES,
    StochasticConfig,
    UnderspecConfig,
    emit_curves,
    make_underspec_dataset,
    run_reweighting_demo,
    run_stochastic,
    run_underspec,
)
from .links import LinkSpec, ScoreDomain, link_eval
from .multiclass import batch_eval
from .recipes import ARITIES, PROFILES, lookup_design
from .scalar import WeightedScores, matching_grad, matching_loss
from .transforms import TransformSpec, amplified_grad, amplified_loss, transform_eval
from .validity import INVALID_TRANSFORMS, certify

UNDERSPEC_LINKS = {
    "right-shifted-sigmoid": LinkSpec("sigmoid", alpha=1.5, beta=4.0),
    "left-shifted-sigmoid": LinkSpec("sigmoid", alpha=1.5, beta=-4.0),
    "centered-sigmoid": LinkSpec("sigmoid", alpha=0.3, beta=0.0),
    "identity": LinkSpec("identity"),
}

CURVE_PRESETS = {
    "figure-2": lambda: list(SENSITIVITY_BUNDLES.values()),
    "figure-3": lambda: list(SCALING_BUNDLES.values()),
    "figure-4": lambda: list(MULTICLASS_BUNDLES.values()),
}


def _parse_domain(text: str) -> ScoreDomain:
    try:
        parts = text.split(",")
        if len(parts) == 2:
            return ScoreDomain(float(parts[0]), float(parts[1]))
        lo, hi, n = parts
        return ScoreDomain(float(lo), float(hi), int(n))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"cannot parse domain '{text}': expected \"min,max[,points]\"") from exc


def _parse_floats(text: str, what: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"cannot parse {what} '{text}'") from exc
    if not values:
        raise ConfigError(f"empty {what} list")
    return values


def _parse_pairs(text: str) -> list[tuple[float, float]]:
    pairs = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise ConfigError(f"pair '{chunk}' is not of the form \"s_hat,s\"")
        try:
            pairs.append((float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise ConfigError(f"pair '{chunk}' has non-numeric entries") from exc
    if not pairs:
        raise ConfigError('no (s_hat, s) pairs given; use --pairs "s_hat,s;..."')
    return pairs


def _resolve_domain(args, doc: dict | None, default=None) -> ScoreDomain:
    if getattr(args, "domain", None):
        return _parse_domain(args.domain)
    if doc is not None:
        return domain_from_document(doc, default or ScoreDomain(-5.0, 5.0))
    return default or ScoreDomain(-5.0, 5.0)


def _write_or_print(table: CurveTable, args) -> None:
    fmt = getattr(args, "format", "csv") or "csv"
    if getattr(args, "output", None):
        table.write(args.output, fmt)
        print(f"wrote {table.num_rows} rows x {len(table.columns)} columns to {args.output}")
    else:
        text = table.to_csv_string() if fmt == "csv" else table.to_json_string()
        sys.stdout.write(text)


def cmd_eval(args) -> int:
    doc = load_document(args.spec)
    spec = spec_from_document(doc)
    if args.grid:
        domain = _resolve_domain(args, doc, ScoreDomain(-5.0, 5.0, 801))
        observed = _parse_floats(args.observed, "observed scores")
        table = emit_curves([spec], domain, observed)
        _write_or_print(table, args)
        return 0
    if not args.pairs:
        raise ConfigError("eval requires --pairs or --grid")
    pairs = _parse_pairs(args.pairs)

    table = CurveTable(metadata={"command": "eval"})
    is_link = isinstance(spec, LinkSpec)
    cols: dict[str, list[float]] = {k: [] for k in (
        ["s_hat", "s", "h_hat", "H_hat", "h_slope_hat", "loss", "grad"] if is_link
        else ["s_hat", "s", "q_hat", "Q_hat", "p_hat", "h_hat", "loss", "grad"])}
    for s_hat, s in pairs:
        cols["s_hat"].append(s_hat)
        cols["s"].append(s)
        if is_link:
            ev = link_eval(spec, s_hat)
            cols["h_hat"].append(ev.h)
            cols["H_hat"].append(ev.H)
            cols["h_slope_hat"].append(ev.h_slope)
            cols["loss"].append(matching_loss(spec, s_hat, s))
            cols["grad"].append(matching_grad(spec, s_hat, s))
        else:
            ev = transform_eval(spec, s_hat)
            cols["q_hat"].append(ev.q)
            cols["Q_hat"].append(ev.Q)
            cols["p_hat"].append(ev.p)
            cols["h_hat"].append(ev.h)
            cols["loss"].append(amplified_loss(spec, s_hat, s))
            cols["grad"].append(amplified_grad(spec, s_hat, s))
    for name, values in cols.items():
        table.add_column(name, values)

    header = "  ".join(f"{n:>12}" for n in table.columns)
    print(header)
    for i in range(table.num_rows):
        print("  ".join(f"{table.columns[n][i]:12.6g}" for n in table.columns))
    if args.output:
        table.write(args.output, args.format or "csv")
    return 0


def cmd_validate(args) -> int:
    if args.known_invalid:
        if args.known_invalid not in INVALID_TRANSFORMS:
            raise ConfigError(
                f"unknown invalid-transform name '{args.known_invalid}'; "
                f"choices: {', '.join(sorted(INVALID_TRANSFORMS))}"
            )
        spec = INVALID_TRANSFORMS[args.known_invalid]
        doc = None
    else:
        if not args.spec:
            raise ConfigError("validate requires --spec or --known-invalid")
        doc = load_document(args.spec)
        spec = spec_from_document(doc)
    domain = _resolve_domain(args, doc)
    report = certify(spec, domain)
    print(f"verdict: {report.verdict}")
    print(f"method: {report.method}")
    print(f"margin: {report.margin!r}")
    if report.witnesses:
        print(f"witnesses ({len(report.witnesses)} failing grid points, first 5):")
        for z, value in report.witnesses[:5]:
            print(f"  z={z:.6g}  value={value:.6g}")
    return 0 if report.certified else 1


def cmd_design(args) -> int:
    try:
        entry = lookup_design(args.arity, args.profile)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    if args.format == "json":
        print(json.dumps({"arity": args.arity, "profile": args.profile, **entry},
                         indent=2))
        return 0
    print(f"sensitivity profile: {args.profile} ({args.arity})")
    print("recommended:")
    for rec in entry["recommended"]:
        line = f"  - {rec['spec']}"
        if rec.get("note"):
            line += f"  [{rec['note']}]"
        print(line)
        if rec.get("config"):
            print(f"      config: {json.dumps(rec['config'])}")
    if entry.get("documented_only"):
        print("similar shapes (documented, not in the catalog):")
        for name in entry["documented_only"]:
            print(f"  - {name}")
    if entry["failing"]:
        print("known failing:")
        for bad in entry["failing"]:
            flag = "  [negated by composite Softmax]" if bad["negated_by_softmax"] else ""
            print(f"  - {bad['spec']}: {bad['reason']}{flag}")
    return 0


def _experiment_underspec(args) -> int:
    if args.spec:
        doc = load_document(args.spec)
        spec = spec_from_document(doc)
    else:
        spec = UNDERSPEC_LINKS[args.link]
    counts = _parse_floats(args.counts, "population counts")
    if len(counts) != 2:
        raise ConfigError("--counts expects \"n_low,n_high\"")
    dataset = make_underspec_dataset(int(counts[0]), int(counts[1]))
    cfg = UnderspecConfig(
        dataset=dataset,
        loss=spec,
        learning_rate=args.learning_rate,
        iterations=args.iterations,
        seed=args.seed,
    )
    result = run_underspec(cfg)
    payload = {
        "experiment": "underspec",
        "spec": spec_to_mapping(spec),
        "counts": {"n_low": int(counts[0]), "n_high": int(counts[1])},
        "seed": args.seed,
        "weights": list(result.weights),
        "mae_high": result.metrics["mae_high"],
        "mae_low": result.metrics["mae_low"],
        "converged": result.converged,
        "grad_norm": result.grad_norm,
        "iterations_run": result.iterations_run,
        "predictions": [float(p) for p in result.predictions],
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"mae_high={result.metrics['mae_high']:.6g} "
          f"mae_low={result.metrics['mae_low']:.6g}", file=sys.stderr)
    return 0


def _experiment_stochastic(args) -> int:
    link = LinkSpec("exponential", beta=args.link_beta)
    deviations = _parse_floats(args.deviations, "deviations")
    populations = [WeightedScores([(-d, 0.5), (d, 0.5)]) for d in deviations]
    populations.append(WeightedScores([(0.05, 0.9), (0.55, 0.1)]))
    cfg = StochasticConfig(
        link=link,
        score_populations=tuple(populations),
        alphas=tuple(_parse_floats(args.alphas, "alphas")),
    )
    _write_or_print(run_stochastic(cfg), args)
    return 0


def _experiment_reweighting(args) -> int:
    domain = _resolve_domain(args, None, ScoreDomain(-5.0, 5.0, 801))
    observed = _parse_floats(args.observed, "observed scores")
    _write_or_print(run_reweighting_demo(domain, observed), args)
    return 0


def _experiment_curves(args) -> int:
    if args.spec:
        doc = load_document(args.spec)
        specs = [spec_from_document(doc)]
    elif args.preset:
        if args.preset not in CURVE_PRESETS:
            raise ConfigError(
                f"unknown preset '{args.preset}'; choices: {', '.join(sorted(CURVE_PRESETS))}"
            )
        specs = CURVE_PRESETS[args.preset]()
    else:
        raise ConfigError("curves requires --preset or --spec")
    domain = _resolve_domain(args, None, ScoreDomain(-5.0, 5.0, 801))
    observed = _parse_floats(args.observed, "observed scores")
    _write_or_print(emit_curves(specs, domain, observed), args)
    return 0


def cmd_experiment(args) -> int:
    handlers = {
        "underspec": _experiment_underspec,
        "stochastic": _experiment_stochastic,
        "reweighting": _experiment_reweighting,
        "curves": _experiment_curves,
    }
    return handlers[args.experiment_command](args)


def cmd_batch(args) -> int:
    doc = load_document(args.spec)
    spec = spec_from_document(doc)
    if not isinstance(spec, TransformSpec):
        raise ConfigError("batch evaluation requires a transform spec")
    try:
        with open(args.input, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            rows = [row for row in reader if row]
    except OSError as exc:
        raise ConfigError(f"cannot read input table: {exc}") from exc
    if not header:
        raise ConfigError("input table is empty")
    hat_cols = [i for i, name in enumerate(header) if name.startswith("s_hat_")]
    obs_cols = [i for i, name in enumerate(header) if name.startswith("s_")
                and not name.startswith("s_hat_")]
    if len(hat_cols) != len(obs_cols) or len(hat_cols) < 2:
        raise ConfigError(
            "input table needs matching s_hat_1..K and s_1..K columns with K >= 2"
        )
    try:
        s_hat = [[float(row[i]) for i in hat_cols] for row in rows]
        s = [[float(row[i]) for i in obs_cols] for row in rows]
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"input table has malformed rows: {exc}") from exc
    losses, grads = batch_eval(spec, s_hat, s)
    table = CurveTable(metadata={"command": "batch"})
    for j, i in enumerate(hat_cols):
        table.add_column(header[i], [r[j] for r in s_hat])
    for j, i in enumerate(obs_cols):
        table.add_column(header[i], [r[j] for r in s])
    table.add_column("loss", losses)
    for k in range(grads.shape[1]):
        table.add_column(f"grad_{k + 1}", grads[:, k])
    table.write(args.output, "csv")
    print(f"wrote {table.num_rows} rows to {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selmatch",
        description="Selective matching losses: evaluation, validation, design, experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate link/transform values and losses")
    p_eval.add_argument("--spec", required=True, help="JSON configuration document")
    p_eval.add_argument("--pairs", help='pairs "s_hat,s;s_hat,s;..."')
    p_eval.add_argument("--grid", action="store_true", help="emit curves over the domain")
    p_eval.add_argument("--observed", default="-3,0,3")
    p_eval.add_argument("--domain", help='"min,max[,points]"')
    p_eval.add_argument("--output")
    p_eval.add_argument("--format", choices=("csv", "json"), default="csv")
    p_eval.set_defaults(handler=cmd_eval)

    p_val = sub.add_parser("validate", help="certify or refute a spec")
    p_val.add_argument("--spec")
    p_val.add_argument("--known-invalid", metavar="NAME",
                       help="validate a named known-invalid score-transform")
    p_val.add_argument("--domain", help='"min,max[,points]"')
    p_val.set_defaults(handler=cmd_validate)

    p_design = sub.add_parser("design", help="look up sensitivity design recipes")
    p_design.add_argument("--profile", required=True,
                          help=f"one of: {', '.join(PROFILES)}")
    p_design.add_argument("--arity", default="multiclass",
                          help=f"one of: {', '.join(ARITIES)}")
    p_design.add_argument("--format", choices=("text", "json"), default="text")
    p_design.set_defaults(handler=cmd_design)

    p_exp = sub.add_parser("experiment", help="run a desk-scale reproduction")
    exp_sub = p_exp.add_subparsers(dest="experiment_command", required=True)

    p_under = exp_sub.add_parser("underspec")
    p_under.add_argument("--preset", default="appendix-f", choices=("appendix-f",))
    p_under.add_argument("--link", default="right-shifted-sigmoid",
                         choices=sorted(UNDERSPEC_LINKS))
    p_under.add_argument("--spec", help="override the loss spec from a JSON document")
    p_under.add_argument("--counts", default="10,5", help='"n_low,n_high"')
    p_under.add_argument("--learning-rate", type=float, default=0.05)
    p_under.add_argument("--iterations", type=int, default=60000)
    p_under.add_argument("--seed", type=int, default=0)
    p_under.add_argument("--output")
    p_under.set_defaults(handler=cmd_experiment)

    p_stoch = exp_sub.add_parser("stochastic")
    p_stoch.add_argument("--preset", default="appendix-h", choices=("appendix-h",))
    p_stoch.add_argument("--alphas", default="1,2,4,8")
    p_stoch.add_argument("--deviations", default="0.5,1,2,3")
    p_stoch.add_argument("--link-beta", type=float, default=0.0)
    p_stoch.add_argument("--output")
    p_stoch.add_argument("--format", choices=("csv", "json"), default="csv")
    p_stoch.add_argument("--seed", type=int, default=0)
    p_stoch.set_defaults(handler=cmd_experiment)

    p_rew = exp_sub.add_parser("reweighting")
    p_rew.add_argument("--preset", default="appendix-e1", choices=("appendix-e1",))
    p_rew.add_argument("--observed", default="-3,0,3")
    p_rew.add_argument("--domain", help='"min,max[,points]"')
    p_rew.add_argument("--output")
    p_rew.add_argument("--format", choices=("csv", "json"), default="csv")
    p_rew.add_argument("--seed", type=int, default=0)
    p_rew.set_defaults(handler=cmd_experiment)

    p_curves = exp_sub.add_parser("curves")
    p_curves.add_argument("--preset", choices=sorted(CURVE_PRESETS))
    p_curves.add_argument("--spec")
    p_curves.add_argument("--observed", default="-3,0,3")
    p_curves.add_argument("--domain", help='"min,max[,points]"')
    p_curves.add_argument("--output")
    p_curves.add_argument("--format", choices=("csv", "json"), default="csv")
    p_curves.add_argument("--seed", type=int, default=0)
    p_curves.set_defaults(handler=cmd_experiment)

    p_batch = sub.add_parser("batch", help="per-row multi-class loss/grad for a CSV table")
    p_batch.add_argument("--spec", required=True)
    p_batch.add_argument("--input", required=True)
    p_batch.add_argument("--output", required=True)
    p_batch.set_defaults(handler=cmd_batch)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SelmatchError as exc:
        print(f"numeric error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
