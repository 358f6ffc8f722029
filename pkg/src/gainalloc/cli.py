"""Command-line front end: prepare, train, simulate, sweep, optimize-threshold,
synth, and report.

Every command takes a JSON config file plus flag overrides (flags win), and
exits 0 on success, 2 on configuration errors, 3 on data errors, 4 on
incompatible artifacts. All outputs are deterministic given the seeds.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .encoding import (
    EncodingSchema,
    encode_batch,
    extract_prefixes,
    fit_schema,
    prefix_length_cap,
)
from .errors import (
    CompatibilityError,
    ConfigurationError,
    DataError,
    DegenerateLabelsError,
    GainAllocError,
)
from .estimators import (
    CausalDataset,
    TrainConfig,
    auc_score,
    cate_model_from_json,
    estimate_cate_batch,
    model_to_json,
    outcome_model_from_json,
    predict_uout_batch,
    train_cate,
    train_outcome_classifier,
)
from .eventlog import (
    EventLog,
    LabelingRules,
    Outcome,
    Treatment,
    label_outcomes,
    label_treatment,
    parse_log,
    temporal_split,
    write_log,
)
from .gain import CostParams
from .report import render_sweep_figures
from .simulation import (
    DurationKind,
    DurationSampler,
    ModelScorer,
    Policy,
    ScoreTable,
    SimulationResult,
    replay,
    write_decision_trace,
)
from .synth import SynthConfig, default_rules, generate

SWEEP_COLUMNS = (
    "resource_count",
    "resource_fraction",
    "c_uout",
    "c_t1",
    "tau",
    "duration",
    "policy",
    "seed",
    "total_gain",
    "total_cate",
    "treated_cases",
    "treated_fraction",
    "candidate_cases",
)

THRESHOLD_COLUMNS = (
    "tau",
    "total_gain",
    "treated_cases",
    "treated_fraction",
    "candidate_cases",
)

DEFAULT_SWEEP = {
    "resource_counts": list(range(1, 11)),
    "c_uout_values": [1, 2, 3, 5, 10, 20],
    "c_t1": 1.0,
    "tau_values": [0.5, 0.6, 0.7, 0.8, 0.9],
    "duration_kinds": ["fixed", "normal", "exponential"],
    "policies": ["gain", "probability"],
    "seeds": [0],
}

DEFAULT_TAUS = (0.5, 0.6, 0.7, 0.8, 0.9)


def _say(args: argparse.Namespace, message: str) -> None:
    if not getattr(args, "quiet", False):
        print(message)


def _load_json(path: str | Path, purpose: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError as exc:
        raise ConfigurationError(f"{purpose} file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{purpose} file {path} is not valid JSON: {exc}") from exc


def _read_data(path: str | Path, purpose: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except FileNotFoundError as exc:
        raise DataError(f"{purpose} file not found: {path}") from exc


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _json_dumps(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True)


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv_rows(path: Path, columns: tuple[str, ...], rows: list[dict]) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(row[column]) for column in columns])
    _write_text(path, buffer.getvalue())


# -- prepare ---------------------------------------------------------------


def cmd_prepare(args: argparse.Namespace) -> int:
    rules = LabelingRules.from_dict(_load_json(args.rules, "labeling rules"))
    log = parse_log(_read_data(args.log, "event log"))
    labeled, outcome_report = label_outcomes(log, rules)
    labeled = label_treatment(labeled, rules)
    fractions = tuple(args.fractions)
    train, validation, test = temporal_split(labeled, fractions)

    out_dir = Path(args.out)
    _write_text(out_dir / "train.csv", write_log(train))
    _write_text(out_dir / "validation.csv", write_log(validation))
    _write_text(out_dir / "test.csv", write_log(test))

    treatments = [trace.treatment for trace in labeled.traces]
    report = {
        "tool_version": __version__,
        "fractions": list(fractions),
        "rules": rules.to_dict(),
        "parsed_cases": len(log),
        "outcome_labeling": {
            "retained": outcome_report.retained,
            "dropped": outcome_report.dropped,
            "positives": outcome_report.positives,
            "negatives": outcome_report.negatives,
            "dropped_case_ids": list(outcome_report.dropped_case_ids),
        },
        "treatment_labeling": {
            "treated": treatments.count(Treatment.TREATED),
            "untreated": treatments.count(Treatment.UNTREATED),
            "unlabeled": treatments.count(Treatment.UNLABELED),
        },
        "splits": {
            "train": len(train),
            "validation": len(validation),
            "test": len(test),
        },
    }
    _write_text(out_dir / "prepare_report.json", _json_dumps(report))
    _say(
        args,
        f"prepared {outcome_report.retained} cases "
        f"(dropped {outcome_report.dropped}) into splits "
        f"{len(train)}/{len(validation)}/{len(test)} under {out_dir}",
    )
    return 0


# -- train -----------------------------------------------------------------


def _labels_for(prefixes) -> np.ndarray:
    unlabeled = [p.case_id for p in prefixes if p.outcome is Outcome.UNLABELED]
    if unlabeled:
        raise DataError(f"split contains unlabeled cases, e.g. '{unlabeled[0]}'")
    return np.asarray(
        [1.0 if p.outcome is Outcome.NEGATIVE else 0.0 for p in prefixes], dtype=np.float64
    )


def cmd_train(args: argparse.Namespace) -> int:
    splits_dir = Path(args.splits)
    config = _load_json(args.config, "training config") if args.config else {}
    percentile = args.percentile if args.percentile is not None else config.pop("percentile", 0.9)
    config.pop("percentile", None)
    confounder_drop = config.pop("confounder_drop", [])
    if args.seed is not None:
        config["seed"] = args.seed
    train_cfg = TrainConfig.from_dict(config)

    offer_activity = args.offer_activity
    if offer_activity is None:
        report_path = splits_dir / "prepare_report.json"
        if report_path.exists():
            offer_activity = _load_json(report_path, "prepare report")["rules"]["offer_activity"]

    train_log = parse_log(_read_data(splits_dir / "train.csv", "train split"))
    validation_log = parse_log(_read_data(splits_dir / "validation.csv", "validation split"))

    cap = prefix_length_cap(train_log, percentile)
    train_prefixes = extract_prefixes(train_log, cap)
    schema = fit_schema(train_prefixes, cap, offer_activity)
    fingerprint = schema.fingerprint()

    x_train = encode_batch(train_prefixes, schema)
    y_train = _labels_for(train_prefixes)
    outcome_model = train_outcome_classifier(x_train, y_train, train_cfg)

    causal_indices = [
        i
        for i, p in enumerate(train_prefixes)
        if p.treatment in (Treatment.TREATED, Treatment.UNTREATED)
    ]
    t_train = np.asarray(
        [1.0 if train_prefixes[i].treatment is Treatment.TREATED else 0.0 for i in causal_indices]
    )
    causal = CausalDataset(x=x_train[causal_indices], t=t_train, y=y_train[causal_indices])
    cate_model = train_cate(causal, train_cfg)

    validation_auc = None
    validation_mean_cate = None
    n_validation = 0
    if len(validation_log):
        validation_prefixes = extract_prefixes(validation_log, cap)
        n_validation = len(validation_prefixes)
        x_val = encode_batch(validation_prefixes, schema)
        y_val = _labels_for(validation_prefixes)
        try:
            validation_auc = float(auc_score(y_val, predict_uout_batch(outcome_model, x_val)))
        except DegenerateLabelsError:
            validation_auc = None
        validation_mean_cate = float(np.mean(estimate_cate_batch(cate_model, x_val)))

    out_dir = Path(args.out)
    _write_text(out_dir / "schema.json", schema.to_json())
    _write_text(out_dir / "outcome_model.json", model_to_json(outcome_model, fingerprint))
    _write_text(out_dir / "cate_model.json", model_to_json(cate_model, fingerprint))
    train_report = {
        "tool_version": __version__,
        "prefix_cap": cap,
        "percentile": percentile,
        "offer_activity": offer_activity,
        "n_train_prefixes": len(train_prefixes),
        "n_causal_samples": len(causal_indices),
        "n_validation_prefixes": n_validation,
        "validation_auc": validation_auc,
        "validation_mean_cate": validation_mean_cate,
        "confounder_drop": list(confounder_drop),
        "train_config": {
            "learning_rate": train_cfg.learning_rate,
            "iterations": train_cfg.iterations,
            "l2_strength": train_cfg.l2_strength,
            "seed": train_cfg.seed,
            "standardize_features": train_cfg.standardize_features,
        },
    }
    _write_text(out_dir / "train_report.json", _json_dumps(train_report))
    auc_text = "n/a" if validation_auc is None else f"{validation_auc:.4f}"
    cate_text = "n/a" if validation_mean_cate is None else f"{validation_mean_cate:.4f}"
    _say(args, f"prefix cap {cap}; validation AUC {auc_text}; mean CATE {cate_text}")
    return 0


# -- simulate --------------------------------------------------------------


def _load_artifacts(models_dir: Path):
    schema = EncodingSchema.from_json(_read_data(models_dir / "schema.json", "schema"))
    fingerprint = schema.fingerprint()
    outcome_model, fp_outcome = outcome_model_from_json(
        _read_data(models_dir / "outcome_model.json", "outcome model")
    )
    cate_model, fp_cate = cate_model_from_json(
        _read_data(models_dir / "cate_model.json", "effect model")
    )
    if fp_outcome != fingerprint or fp_cate != fingerprint:
        raise CompatibilityError(
            "model schema fingerprints do not match the stored schema; "
            "retrain or use matching artifacts"
        )
    return schema, outcome_model, cate_model


def _sampler_from_config(duration: dict, seed: int) -> DurationSampler:
    known = {"kind", "fixed_value", "lo", "hi", "normal_mean", "normal_sd", "exp_mean"}
    unknown = set(duration) - known
    if unknown:
        raise ConfigurationError(f"unknown duration config keys: {sorted(unknown)}")
    kind = DurationKind.parse(duration.get("kind", "fixed"))
    kwargs = {key: duration[key] for key in duration if key != "kind"}
    return DurationSampler(kind=kind, seed=seed, **kwargs)


def _build_scorer(args: argparse.Namespace, config: dict):
    """Returns (scorer, max_prefix_len); score import bypasses the models."""
    if getattr(args, "scores", None):
        table = ScoreTable.from_csv(_read_data(args.scores, "score"))
        cap = config.get("max_prefix_len", table.max_prefix_len())
        return table, int(cap)
    if not getattr(args, "models", None):
        raise ConfigurationError("either --models or --scores is required")
    schema, outcome_model, cate_model = _load_artifacts(Path(args.models))
    cap = config.get("max_prefix_len", schema.max_prefix_len)
    return ModelScorer(outcome_model, cate_model, schema), int(cap)


def _sim_settings(args: argparse.Namespace) -> dict:
    config = _load_json(args.config, "simulation config") if args.config else {}
    known = {
        "capacity",
        "c_uout",
        "c_t1",
        "tau",
        "policy",
        "duration",
        "seed",
        "max_prefix_len",
    }
    unknown = set(config) - known
    if unknown:
        raise ConfigurationError(f"unknown simulation config keys: {sorted(unknown)}")
    settings = {
        "capacity": 1,
        "c_uout": 20.0,
        "c_t1": 1.0,
        "tau": 0.5,
        "policy": "gain",
        "duration": {"kind": "fixed"},
        "seed": 0,
    }
    settings.update(config)
    for flag in ("capacity", "tau", "policy", "seed"):
        value = getattr(args, flag, None)
        if value is not None:
            settings[flag] = value
    return settings


def cmd_simulate(args: argparse.Namespace) -> int:
    settings = _sim_settings(args)
    scorer, cap = _build_scorer(args, settings)
    test_log = parse_log(_read_data(args.test, "test split"))
    params = CostParams(
        c_uout=float(settings["c_uout"]),
        c_t1=float(settings["c_t1"]),
        tau=float(settings["tau"]),
    )
    seed = int(settings["seed"])
    capacity = int(settings["capacity"])
    echo = {
        "capacity": capacity,
        "c_uout": params.c_uout,
        "c_t1": params.c_t1,
        "tau": params.tau,
        "duration": settings["duration"],
        "max_prefix_len": cap,
        "tool_version": __version__,
    }

    policies = (
        [Policy.GAIN_RANKED, Policy.PROBABILITY_RANKED]
        if settings["policy"] == "both"
        else [Policy.parse(settings["policy"])]
    )
    results: dict[str, SimulationResult] = {}
    for policy in policies:
        sampler = _sampler_from_config(dict(settings["duration"]), seed)
        results[policy.value] = replay(
            test_log, scorer, cap, params, capacity, sampler, policy, echo
        )

    if len(results) == 1:
        only = next(iter(results.values()))
        payload = only.to_dict()
    else:
        payload = {name: result.to_dict() for name, result in results.items()}
    _write_text(Path(args.out), _json_dumps(payload))

    if args.trace:
        for name, result in results.items():
            trace_path = Path(args.trace)
            if len(results) > 1:
                trace_path = trace_path.with_suffix(f".{name}{trace_path.suffix}")
            _write_text(trace_path, write_decision_trace(result.decision_trace))

    for name, result in results.items():
        _say(
            args,
            f"{name}: total_gain={result.total_gain:.4f} "
            f"treated={result.treated_cases}/{len(test_log)} "
            f"candidates={result.candidate_cases}",
        )
    return 0


# -- sweep -----------------------------------------------------------------


def run_sweep(
    test_log: EventLog,
    scorer,
    cap: int,
    sweep_config: dict,
    duration_config: dict,
) -> list[dict]:
    """One row per grid point; rows come out sorted by the grid key."""
    for key in ("resource_counts", "c_uout_values", "tau_values", "duration_kinds", "policies", "seeds"):
        if not sweep_config.get(key):
            raise ConfigurationError(f"sweep config list '{key}' must be non-empty")
    resource_counts = sorted(int(v) for v in sweep_config["resource_counts"])
    c_uout_values = sorted(float(v) for v in sweep_config["c_uout_values"])
    tau_values = sorted(float(v) for v in sweep_config["tau_values"])
    kinds = sorted(
        (DurationKind.parse(v) for v in sweep_config["duration_kinds"]), key=lambda k: k.value
    )
    policies = sorted(
        (Policy.parse(v) for v in sweep_config["policies"]), key=lambda p: p.value
    )
    seeds = sorted(int(v) for v in sweep_config["seeds"])
    c_t1 = float(sweep_config.get("c_t1", 1.0))
    max_resources = max(resource_counts)

    rows = []
    for resource_count in resource_counts:
        for c_uout in c_uout_values:
            for tau in tau_values:
                for kind in kinds:
                    for policy in policies:
                        for seed in seeds:
                            duration = dict(duration_config)
                            duration["kind"] = kind.value
                            sampler = _sampler_from_config(duration, seed)
                            params = CostParams(c_uout=c_uout, c_t1=c_t1, tau=tau)
                            result = replay(
                                test_log, scorer, cap, params, resource_count, sampler, policy
                            )
                            rows.append(
                                {
                                    "resource_count": resource_count,
                                    "resource_fraction": resource_count / max_resources,
                                    "c_uout": c_uout,
                                    "c_t1": c_t1,
                                    "tau": tau,
                                    "duration": kind.value,
                                    "policy": policy.value,
                                    "seed": seed,
                                    "total_gain": result.total_gain,
                                    "total_cate": result.total_cate,
                                    "treated_cases": result.treated_cases,
                                    "treated_fraction": result.treated_fraction,
                                    "candidate_cases": result.candidate_cases,
                                }
                            )
    return rows


def cmd_sweep(args: argparse.Namespace) -> int:
    config = dict(DEFAULT_SWEEP)
    if args.config:
        loaded = _load_json(args.config, "sweep config")
        known = set(DEFAULT_SWEEP) | {"duration", "max_prefix_len"}
        unknown = set(loaded) - known
        if unknown:
            raise ConfigurationError(f"unknown sweep config keys: {sorted(unknown)}")
        config.update(loaded)
    duration_config = dict(config.pop("duration", {}))
    duration_config.pop("kind", None)
    scorer, cap = _build_scorer(args, config)
    test_log = parse_log(_read_data(args.test, "test split"))
    rows = run_sweep(test_log, scorer, cap, config, duration_config)
    _write_csv_rows(Path(args.out), SWEEP_COLUMNS, rows)
    _say(args, f"wrote {len(rows)} sweep rows to {args.out}")
    return 0


# -- optimize-threshold ----------------------------------------------------


def optimize_threshold(
    validation_log: EventLog,
    scorer,
    cap: int,
    base_params: CostParams,
    capacity: int,
    duration_config: dict,
    seed: int,
    taus: list[float],
    policy: Policy = Policy.GAIN_RANKED,
) -> tuple[float, list[dict]]:
    """Replay the validation split per threshold; ties go to the smallest tau."""
    if not taus:
        raise ConfigurationError("threshold grid must be non-empty")
    table = []
    best_tau = None
    best_gain = -float("inf")
    for tau in sorted(float(t) for t in taus):
        sampler = _sampler_from_config(dict(duration_config), seed)
        params = CostParams(c_uout=base_params.c_uout, c_t1=base_params.c_t1, tau=tau)
        result = replay(validation_log, scorer, cap, params, capacity, sampler, policy)
        table.append(
            {
                "tau": tau,
                "total_gain": result.total_gain,
                "treated_cases": result.treated_cases,
                "treated_fraction": result.treated_fraction,
                "candidate_cases": result.candidate_cases,
            }
        )
        if result.total_gain > best_gain:
            best_gain = result.total_gain
            best_tau = tau
    return best_tau, table


def cmd_optimize_threshold(args: argparse.Namespace) -> int:
    settings = _sim_settings(args)
    scorer, cap = _build_scorer(args, settings)
    validation_log = parse_log(_read_data(args.validation, "validation split"))
    params = CostParams(
        c_uout=float(settings["c_uout"]),
        c_t1=float(settings["c_t1"]),
        tau=float(settings["tau"]),
    )
    taus = list(args.taus) if args.taus else list(DEFAULT_TAUS)
    best_tau, table = optimize_threshold(
        validation_log,
        scorer,
        cap,
        params,
        int(settings["capacity"]),
        dict(settings["duration"]),
        int(settings["seed"]),
        taus,
        Policy.parse(settings["policy"]) if settings["policy"] != "both" else Policy.GAIN_RANKED,
    )
    _write_csv_rows(Path(args.out), THRESHOLD_COLUMNS, table)
    _say(args, f"best_tau={best_tau}")
    return 0


# -- synth -----------------------------------------------------------------


def cmd_synth(args: argparse.Namespace) -> int:
    config = _load_json(args.config, "generator config") if args.config else {}
    if args.seed is not None:
        config["seed"] = args.seed
    cfg = SynthConfig.from_dict(config)
    log, truth = generate(cfg)

    out_path = Path(args.out)
    _write_text(out_path, write_log(log))
    truth_path = Path(args.truth_out) if args.truth_out else out_path.with_suffix(".truth.json")
    _write_text(truth_path, _json_dumps(truth))
    rules_path = Path(args.rules_out) if args.rules_out else out_path.with_suffix(".rules.json")
    _write_text(rules_path, _json_dumps(default_rules().to_dict()))
    _say(
        args,
        f"generated {cfg.n_cases} cases "
        f"(positive rate {truth['positive_rate']:.3f}, mean effect {truth['mean_effect']:.3f})",
    )
    return 0


# -- report ----------------------------------------------------------------


def cmd_report(args: argparse.Namespace) -> int:
    sweep_path = Path(args.sweep)
    if not sweep_path.exists():
        raise DataError(f"sweep CSV not found: {sweep_path}")
    out_dir = Path(args.out_dir) if args.out_dir else None
    written = render_sweep_figures(sweep_path, out_dir)
    for path in written:
        _say(args, f"wrote {path}")
    return 0


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gainalloc",
        description="Gain-ranked allocation of scarce intervention resources",
    )
    parser.add_argument("--version", action="version", version=f"gainalloc {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    prepare = sub.add_parser("prepare", help="label a raw log and split it temporally")
    prepare.add_argument("--log", required=True, help="raw event-log CSV")
    prepare.add_argument("--rules", required=True, help="labeling rules JSON")
    prepare.add_argument("--out", required=True, help="output directory for splits")
    prepare.add_argument(
        "--fractions",
        nargs=3,
        type=float,
        default=[0.6, 0.2, 0.2],
        metavar=("TRAIN", "VAL", "TEST"),
    )
    prepare.add_argument("--quiet", action="store_true")
    prepare.set_defaults(handler=cmd_prepare)

    train = sub.add_parser("train", help="fit the schema, classifier, and effect model")
    train.add_argument("--splits", required=True, help="directory holding prepared splits")
    train.add_argument("--config", help="training config JSON")
    train.add_argument("--out", required=True, help="output directory for model artifacts")
    train.add_argument("--percentile", type=float, help="prefix-cap percentile (default 0.9)")
    train.add_argument("--offer-activity", help="override the offer activity name")
    train.add_argument("--seed", type=int)
    train.add_argument("--quiet", action="store_true")
    train.set_defaults(handler=cmd_train)

    simulate = sub.add_parser("simulate", help="replay a split under one configuration")
    simulate.add_argument("--models", help="directory with schema + model JSON files")
    simulate.add_argument("--test", required=True, help="test split CSV")
    simulate.add_argument("--config", help="simulation config JSON")
    simulate.add_argument("--out", required=True, help="result JSON path")
    simulate.add_argument("--scores", help="score CSV (case_id,prefix_len,p_uout,cate)")
    simulate.add_argument("--trace", help="decision-trace CSV path")
    simulate.add_argument("--capacity", type=int)
    simulate.add_argument("--tau", type=float)
    simulate.add_argument("--policy", choices=["gain", "probability", "both"])
    simulate.add_argument("--seed", type=int)
    simulate.add_argument("--quiet", action="store_true")
    simulate.set_defaults(handler=cmd_simulate)

    sweep = sub.add_parser("sweep", help="run the full configuration grid")
    sweep.add_argument("--models", help="directory with schema + model JSON files")
    sweep.add_argument("--test", required=True, help="test split CSV")
    sweep.add_argument("--config", help="sweep config JSON")
    sweep.add_argument("--out", required=True, help="sweep rows CSV path")
    sweep.add_argument("--scores", help="score CSV (case_id,prefix_len,p_uout,cate)")
    sweep.add_argument("--quiet", action="store_true")
    sweep.set_defaults(handler=cmd_sweep)

    optimize = sub.add_parser(
        "optimize-threshold", help="pick the gain-maximal threshold on validation data"
    )
    optimize.add_argument("--models", help="directory with schema + model JSON files")
    optimize.add_argument("--validation", required=True, help="validation split CSV")
    optimize.add_argument("--config", help="simulation config JSON")
    optimize.add_argument("--out", required=True, help="per-threshold table CSV path")
    optimize.add_argument("--scores", help="score CSV (case_id,prefix_len,p_uout,cate)")
    optimize.add_argument("--taus", nargs="+", type=float, help="threshold grid")
    optimize.add_argument("--capacity", type=int)
    optimize.add_argument("--policy", choices=["gain", "probability"])
    optimize.add_argument("--seed", type=int)
    optimize.add_argument("--quiet", action="store_true")
    optimize.set_defaults(handler=cmd_optimize_threshold)

    synth = sub.add_parser("synth", help="generate a synthetic labeled log")
    synth.add_argument("--config", help="generator config JSON")
    synth.add_argument("--out", required=True, help="log CSV path")
    synth.add_argument("--truth-out", help="planted-truth JSON path")
    synth.add_argument("--rules-out", help="labeling rules JSON path")
    synth.add_argument("--seed", type=int)
    synth.add_argument("--quiet", action="store_true")
    synth.set_defaults(handler=cmd_synth)

    report = sub.add_parser("report", help="render figures from a sweep CSV")
    report.add_argument("--sweep", required=True, help="sweep rows CSV")
    report.add_argument("--out-dir", help="figure directory (default: alongside the CSV)")
    report.add_argument("--quiet", action="store_true")
    report.set_defaults(handler=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "handler", None) is None:
        parser.print_help()
        return 0
    try:
        return args.handler(args)
    except GainAllocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
