"""Command-line front end.

Exit codes: 0 success or insurable, 3 valid but negative verdict,
1 input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .classifier_lab import (
    SgdConfig,
    SyntheticTask,
    empirical_roc,
    generate_dataset,
    train_logistic_sgd,
)
from .config import ConfigError, ScenarioConfig, load_config
from .contract import (
    Contract,
    Participant,
    fair_premium,
    participation_gain,
    premium_interval,
)
from .effort import (
    first_best_effort,
    moral_hazard_check,
    retained_exposure,
    solve_optimal_effort,
    optimality_conditions,
)
from .errors import (
    BracketError,
    ConvergenceError,
    DivergenceError,
    DomainError,
    TrainingError,
    ValidationError,
)
from .insurability import assess, first_insurable_time, insurable_region, premium_schedule
from .mathkernel import RandomStream
from .risk_model import expected_loss, uncertainty_variance_at
from .roc import auc_empirical, format_roc_csv

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_NEGATIVE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _timestamp() -> str:
    # SOURCE_DATE_EPOCH pins the timestamp for reproducible manifests
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = time.gmtime(int(epoch)) if epoch else time.gmtime()
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", t)


def _write_outputs(cfg: ScenarioConfig, files: dict[Path, str], manifest_path: Path) -> None:
    for path, text in files.items():
        _write_atomic(path, text)
    manifest = {
        "config_digest": _digest("\n".join(cfg.echo_lines())),
        "tool_version": __version__,
        "seed": cfg.seed,
        "timestamp": _timestamp(),
        "outputs": [{"path": str(p), "sha256": _digest(t)} for p, t in files.items()],
    }
    _write_atomic(manifest_path, json.dumps(manifest, indent=2) + "\n")


def _header(cfg: ScenarioConfig, command: str) -> list[str]:
    return [f"ailiability {__version__} {command}", f"config={cfg.source}"] + cfg.echo_lines()


def _strict(v):
    """Replace non-finite floats so the output is valid JSON."""
    if isinstance(v, float) and not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, dict):
        return {k: _strict(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_strict(x) for x in v]
    return v


def _to_json(report: dict) -> str:
    return json.dumps(_strict(report), indent=2, allow_nan=False, default=_jsonable) + "\n"


def _emit(report: dict, as_json: bool, out: Path | None, cfg: ScenarioConfig, command: str) -> None:
    text = _to_json(report)
    if as_json:
        sys.stdout.write(text)
    else:
        for key, val in report.items():
            if isinstance(val, dict):
                print(f"{key}:")
                for k, v in val.items():
                    print(f"  {k}: {_fmt(v)}")
            else:
                print(f"{key}: {_fmt(val)}")
    if out is not None:
        # JSON cannot carry comment lines, so the config echo goes under a key
        saved = dict(report, config=_header(cfg, command))
        text = _to_json(saved)
        _write_outputs(cfg, {out: text}, out.with_name(out.name + ".manifest.json"))


def _fmt(v):
    if isinstance(v, float):
        return "inf" if math.isinf(v) else f"{v:.10g}"
    if isinstance(v, (list, tuple)):
        return ", ".join(str(_fmt(x)) for x in v) or "-"
    return v


def _jsonable(v):
    return str(v)


def _sigma_sq(cfg: ScenarioConfig) -> float:
    return uncertainty_variance_at(cfg.scenario.uncertainty, cfg.get("analysis", "t"))


def _require_seed(cfg: ScenarioConfig, command: str) -> int:
    if cfg.seed is None:
        raise UsageError(f"{command}: analysis.seed is required for randomised runs")
    return cfg.seed


def cmd_assess(cfg: ScenarioConfig, args) -> int:
    verdict = assess(
        cfg.scenario, cfg.operating_point, _sigma_sq(cfg), cfg.get("market", "max_premium"), cfg.checklist
    )
    report = {
        "command": "assess",
        "insurable": verdict.insurable,
        "accuracy_ok": verdict.accuracy_ok,
        "premium_ok": verdict.premium_ok,
        "prerequisites_ok": verdict.prerequisites_ok,
        "acc_value": verdict.acc_value,
        "premium_value": verdict.premium_value,
        "max_premium": cfg.get("market", "max_premium"),
        "sigma_sq": _sigma_sq(cfg),
        "failing_constraints": verdict.failing(),
        "failing_prerequisites": list(verdict.failing_prerequisites),
    }
    _emit(report, args.json, args.out, cfg, "assess")
    return EXIT_OK if verdict.insurable else EXIT_NEGATIVE


def cmd_region(cfg: ScenarioConfig, args) -> int:
    if args.out is None:
        raise UsageError("region: --out is required")
    grid = insurable_region(
        cfg.scenario, _sigma_sq(cfg), cfg.get("market", "max_premium"), cfg.get("analysis", "resolution")
    )
    text = grid.to_csv(_header(cfg, "region"))
    _write_outputs(cfg, {args.out: text}, args.out.with_name(args.out.name + ".manifest.json"))
    n_ins = int(grid.insurable.sum())
    print(f"wrote {args.out}: {grid.insurable.size} cells, {n_ins} insurable")
    return EXIT_OK


def cmd_schedule(cfg: ScenarioConfig, args) -> int:
    if args.out is None:
        raise UsageError("schedule: --out is required")
    m = cfg.values["market"]
    sched = premium_schedule(
        cfg.scenario,
        cfg.operating_point,
        m["rho"],
        cfg.get("analysis", "t_grid"),
        m["price_point"],
        m["epsilon"],
    )
    comments = _header(cfg, "schedule")
    if any(sched.diverged):
        comments.append("warning: premium MGF diverges at some times; those rows read inf")
    t_star = first_insurable_time(cfg.scenario, cfg.operating_point, m["max_premium"], m["rho"])
    comments.append(f"first_insurable_time={'never' if math.isinf(t_star) else repr(t_star)}")
    text = sched.to_csv(comments)
    _write_outputs(cfg, {args.out: text}, args.out.with_name(args.out.name + ".manifest.json"))
    print(f"wrote {args.out}: {len(sched.times)} rows, floor {sched.floor:.10g}")
    print(f"first_insurable_time: {'never' if math.isinf(t_star) else f'{t_star:.6g}'}")
    return EXIT_OK


def cmd_effort(cfg: ScenarioConfig, args) -> int:
    s = cfg.scenario
    rho = cfg.get("market", "rho")
    lbar = retained_exposure(s, rho)
    sol = solve_optimal_effort(s.effort_model, s.roc, lbar)
    stationary, bounded = optimality_conditions(s.effort_model, s.roc, lbar, sol.a_opt)
    report = {
        "command": "effort",
        "lbar": lbar,
        "a_opt": sol.a_opt,
        "interior": sol.interior,
        "objective_value": sol.objective_value,
        "stationarity_holds": stationary,
        "cost_bound_holds": bounded,
    }
    a_low, a_high = cfg.get("effort", "a_low"), cfg.get("effort", "a_high")
    if a_low is not None and a_high is not None:
        if lbar > 0:
            mh = moral_hazard_check(s.effort_model, s.roc, lbar, a_low, a_high)
            report["moral_hazard"] = {
                "a_low": mh.a_low,
                "a_high": mh.a_high,
                "probability_drop": mh.probability_drop,
                "cost_increase_over_lbar": mh.cost_threshold,
                "condition_satisfied": mh.condition_satisfied,
                "chosen": mh.chosen,
            }
        contract = Contract(
            fair_premium(s, cfg.operating_point, _sigma_sq(cfg), rho), rho
        )
        report["first_best_effort"] = first_best_effort(
            s, contract, [a_low, a_high], _sigma_sq(cfg), cfg.get("market", "insurer_wealth")
        )
    _emit(report, args.json, args.out, cfg, "effort")
    return EXIT_OK


def cmd_price(cfg: ScenarioConfig, args) -> int:
    s, op = cfg.scenario, cfg.operating_point
    m = cfg.values["market"]
    sigma_sq = _sigma_sq(cfg)
    report = {
        "command": "price",
        "sigma_sq": sigma_sq,
        "expected_loss": expected_loss(s, op, sigma_sq),
        "fair_premium": fair_premium(s, op, sigma_sq, m["rho"]),
        "warnings": [],
    }
    if m["epsilon"] is None:
        report["warnings"].append("market.epsilon not set; premium interval skipped")
    else:
        iv = premium_interval(s, op, sigma_sq, m["rho"], m["epsilon"])
        report["premium_interval"] = {"lower": iv.lower, "upper": iv.upper, "nonempty": iv.nonempty}
        if iv.diverged:
            report["warnings"].append(
                "loss MGF diverges (epsilon*rho*D_AI*v*sigma^2 >= 1/2): upper bound is +inf, "
                "an artefact of the Gaussian uncertainty tail"
            )
        if args.verify_ir or cfg.get("analysis", "verify_ir"):
            seed = _require_seed(cfg, "price --verify-ir")
            point = {"lower": iv.lower, "upper": iv.upper, "mid": 0.5 * (iv.lower + iv.upper)}
            premium = point[m["price_point"]]
            if math.isinf(premium):
                report["warnings"].append("cannot verify participation at an infinite premium")
            else:
                check = participation_gain(
                    s,
                    op,
                    sigma_sq,
                    Contract(premium, m["rho"]),
                    Participant(m["agent_wealth"], m["epsilon"]),
                    0.0,
                    cfg.get("analysis", "mc_samples"),
                    RandomStream(seed),
                )
                report["participation"] = {
                    "premium": premium,
                    "accepted": check.accepted,
                    "mean_gain": check.mean_gain,
                    "std_error": check.std_error,
                    "mc_samples": cfg.get("analysis", "mc_samples"),
                    "seed": seed,
                }
    _emit(report, args.json, args.out, cfg, "price")
    return EXIT_OK


def cmd_lab(cfg: ScenarioConfig, args) -> int:
    if args.out is None:
        raise UsageError("lab: --out directory is required")
    seed = _require_seed(cfg, "lab")
    lab = cfg.values["lab"]
    em = cfg.scenario.effort_model
    task = SyntheticTask(lab["dimension"], lab["class_separation"], lab["class_prior"], RandomStream(seed))
    sgd = SgdConfig(lab["iterations"], lab["step_scale"], lab["smoothness"], lab["batch_size"])
    test = generate_dataset(task, lab["n_test"], task.stream.substream(1))
    header = _header(cfg, "lab")
    files: dict[Path, str] = {}
    summary = [f"# {c}" for c in header] + ["a,n_train,auc,train_log_loss"]
    for a in lab["a_grid"]:
        n = max(1, round(em.samples.value(a)))
        train = generate_dataset(task, n)
        clf = train_logistic_sgd(train, sgd, task.stream.substream(2))
        roc = empirical_roc(clf, test, lab["n_thresholds"])
        files[args.out / f"roc_n{n}.csv"] = format_roc_csv(roc, header + [f"a={a!r}", f"n_train={n}"])
        summary.append(f"{a!r},{n},{auc_empirical(roc)!r},{clf.train_log_loss!r}")
        print(f"a={a:g} N={n}: AUC={auc_empirical(roc):.4f}")
    files[args.out / "auc_vs_n.csv"] = "\n".join(summary) + "\n"
    _write_outputs(cfg, files, args.out / "manifest.json")
    return EXIT_OK


COMMANDS = {
    "assess": cmd_assess,
    "region": cmd_region,
    "schedule": cmd_schedule,
    "effort": cmd_effort,
    "price": cmd_price,
    "lab": cmd_lab,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ailiability", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "assess": "insurability verdict for the configured operating point",
        "region": "insurable region over the ROC square (CSV)",
        "schedule": "premium schedule as uncertainty decays (CSV)",
        "effort": "optimal developer effort and moral-hazard test",
        "price": "premium interval, fair premium, participation check",
        "lab": "logistic-regression ROC/AUC sweep over sample sizes (CSV directory)",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("config", type=Path, help="scenario file")
        p.add_argument("--out", type=Path, help="output file (directory for lab)")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE")
        p.add_argument("--seed", type=int, help="override analysis.seed")
        p.add_argument("--resolution", type=float, help="override analysis.resolution")
        p.add_argument("--price-point", choices=("lower", "mid", "upper"), help="override market.price_point")
        p.add_argument("--json", action="store_true", help="machine-readable report on stdout")
        if name == "price":
            p.add_argument("--verify-ir", action="store_true", help="Monte Carlo participation check")
            p.add_argument("--mc-samples", type=int, help="override analysis.mc_samples")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"analysis.seed={args.seed}")
    if args.resolution is not None:
        overrides.append(f"analysis.resolution={args.resolution!r}")
    if args.price_point is not None:
        overrides.append(f"market.price_point={args.price_point}")
    if getattr(args, "mc_samples", None) is not None:
        overrides.append(f"analysis.mc_samples={args.mc_samples}")
    try:
        cfg = load_config(args.config, overrides)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, UsageError, ValidationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConvergenceError, BracketError, DivergenceError, TrainingError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
