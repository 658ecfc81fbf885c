"""``groupevo`` command line entry point.

Every subcommand writes a JSON run manifest next to its output (input
digests, flags, seeds, warnings).  Exit codes: 0 success, 2 input error,
3 stage failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable, Sequence

from . import __version__
from .communities import detect, read_groups, write_groups
from .errors import GroupEvoError, InputError, StageError
from .evochain import ExtractionStats, extract_instances, read_instances, serialize_instances
from .ged import GedParams, build_evolution_graph, read_events, unmatched_groups, write_events
from .importance import compute_importance, read_importance, write_importance
from .learn import ClassifierKind, ClassifierSpec, cross_validate, make_dataset, write_report
from .sweep import DEFAULT_GRID, MIN_INSTANCES, run_sweep, write_sweep
from .synth import emit_edges, format_interactions, lifecycle_script, plant_memberships, read_script
from .tsn import DAY, LogFormat, parse_timestamp, read_frames, read_interactions, window, write_frames

logger = logging.getLogger("groupevo")

EXIT_INPUT = 2
EXIT_STAGE = 3


class _Collector(logging.Handler):
    def __init__(self) -> None:
        super().__init__(logging.WARNING)
        self.messages: list[str] = []

    def emit(self, record: logging.LogRecord) -> None:
        self.messages.append(f"{record.name}: {record.getMessage()}")


class RunContext:
    """Accumulates manifest data for one command invocation."""

    def __init__(self, command: str, flags: dict[str, Any]):
        self.command = command
        self.flags = flags
        self.inputs: dict[str, str] = {}
        self.seeds: dict[str, int] = {}
        self.notes: list[str] = []
        self.started = time.time()
        self.collector = _Collector()

    def add_input(self, path: str | Path | None) -> None:
        if path is None:
            return
        p = Path(path)
        files = sorted(x for x in p.rglob("*") if x.is_file()) if p.is_dir() else [p]
        for f in files:
            try:
                self.inputs[str(f)] = hashlib.sha256(f.read_bytes()).hexdigest()
            except OSError:
                pass

    def write(self, target: Path) -> Path:
        manifest = {
            "tool": "groupevo",
            "version": __version__,
            "subcommand": self.command,
            "flags": self.flags,
            "inputs": self.inputs,
            "seeds": self.seeds,
            "started": self.started,
            "finished": time.time(),
            "warnings": self.collector.messages + self.notes,
        }
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_jsonable) + "\n", encoding="utf-8")
        return target


def _jsonable(obj: Any) -> Any:
    return obj.value if hasattr(obj, "value") else str(obj)


def manifest_path(out: str | Path, is_dir: bool) -> Path:
    out = Path(out)
    return out / "run_manifest.json" if is_dir else out.with_name(out.name + ".manifest.json")


# -- argument helpers ------------------------------------------------------


def fraction_list(text: str) -> list[float]:
    """Comma separated thresholds; values above 1 are percentages."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        value = float(part)
        out.append(value / 100 if value > 1 else value)
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def fraction(text: str) -> float:
    (value,) = fraction_list(text)
    return value


def classifier_list(text: str) -> list[ClassifierKind]:
    try:
        return [ClassifierKind(p.strip()) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def timestamp(text: str) -> float:
    try:
        return parse_timestamp(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def make_spec(kind: ClassifierKind, args: argparse.Namespace, seed: int) -> ClassifierSpec:
    hyper: dict[str, Any] = {}
    if kind is ClassifierKind.FOREST and getattr(args, "trees", None) is not None:
        hyper["trees"] = args.trees
    if kind is ClassifierKind.KNN and getattr(args, "knn_k", None) is not None:
        hyper["k"] = args.knn_k
    if kind is ClassifierKind.TREE and getattr(args, "prune", False):
        hyper["prune"] = True
    if kind in (ClassifierKind.TREE, ClassifierKind.FOREST) and getattr(args, "min_leaf", None) is not None:
        hyper["min_leaf"] = args.min_leaf
    return ClassifierSpec(kind, hyper, seed)


# -- stage implementations (shared by subcommands and pipeline) ------------


def stage_window(args, ctx: RunContext, out_dir: Path):
    ctx.add_input(args.input)
    parsed = read_interactions(args.input, LogFormat(delimiter=args.delimiter, max_errors=args.max_errors))
    if parsed.self_loops:
        ctx.notes.append(f"dropped {parsed.self_loops} self-loop(s)")
    for lineno, msg in parsed.malformed:
        ctx.notes.append(f"skipped malformed line {lineno}: {msg}")
    tsn = window(parsed.interactions, args.window_days * DAY, args.overlap_days * DAY, args.origin)
    write_frames(tsn, out_dir)
    return tsn


def stage_detect(args, ctx: RunContext, frames_dir: Path, out: Path):
    ctx.add_input(frames_dir)
    tsn = read_frames(frames_dir)
    groups = detect(tsn, args.k, args.min_weight)
    write_groups(groups, out)
    return groups


def _n_frames(frames_dir: Path | None) -> int | None:
    return len(read_frames(frames_dir)) if frames_dir else None


def stage_importance(args, ctx: RunContext, groups_path: Path, frames_dir: Path | None, out: Path):
    ctx.add_input(groups_path)
    ctx.add_input(frames_dir)
    tsn = read_frames(frames_dir) if frames_dir else None
    if tsn is None and args.measure != "uniform":
        raise InputError("--frames is required for the sp and degree measures")
    groups = read_groups(groups_path, len(tsn) if tsn else None)
    ni = compute_importance(groups, tsn, args.measure, args.epsilon, args.tol, args.max_iter, args.scope)
    for key, scores in ni.items():
        if not scores.converged:
            ctx.notes.append(f"social position did not converge for group {key[0]}:{key[1]}")
    write_importance(ni, out)
    return ni


def stage_ged(args, ctx: RunContext, groups_path: Path, ni_path: Path | None, frames_dir: Path | None, out: Path):
    ctx.add_input(groups_path)
    ctx.add_input(ni_path)
    groups = read_groups(groups_path, _n_frames(frames_dir))
    ni = read_importance(ni_path) if ni_path else None
    edges = build_evolution_graph(groups, ni, GedParams(args.alpha, args.beta, args.dissolve_threshold))
    orphans = unmatched_groups(groups, edges)
    if orphans:
        ctx.notes.append(f"{len(orphans)} group(s) with no event: " + " ".join(f"{f}:{g}" for f, g in orphans))
    write_events(edges, out)
    return edges


def stage_chains(args, ctx: RunContext, events_path: Path, groups_path: Path, frames_dir: Path | None, out: Path):
    ctx.add_input(events_path)
    ctx.add_input(groups_path)
    groups = read_groups(groups_path, _n_frames(frames_dir))
    stats = ExtractionStats()
    instances = extract_instances(
        read_events(events_path),
        groups,
        steps=args.steps,
        label_policy=args.label_policy,
        chain_policy=args.chain_policy,
        stats=stats,
    )
    ctx.notes.append(f"chain policy {args.chain_policy}, label policy {args.label_policy}")
    for key in stats.cap_hits:
        ctx.notes.append(f"chain cap hit for group {key[0]}:{key[1]}")
    if not instances:
        raise StageError("chains", "no group has enough history to form an instance")
    serialize_instances(instances, out)
    return instances


def stage_eval(args, ctx: RunContext, instances_path: Path, kind: ClassifierKind, out: Path):
    ctx.add_input(instances_path)
    dataset = make_dataset(read_instances(instances_path))
    spec = make_spec(kind, args, args.seed)
    ctx.seeds[kind.value] = args.seed
    report = cross_validate(dataset, spec, args.folds)
    write_report(report, out)
    return report


def stage_sweep(args, ctx: RunContext, groups_path: Path, ni_path: Path | None, frames_dir: Path | None, out_dir: Path):
    ctx.add_input(groups_path)
    ctx.add_input(ni_path)
    groups = read_groups(groups_path, _n_frames(frames_dir))
    ni = read_importance(ni_path) if ni_path else None
    specs = [make_spec(kind, args, 0) for kind in args.classifiers]
    ctx.seeds["master"] = args.seed
    result = run_sweep(
        groups,
        ni,
        args.alphas,
        args.betas,
        specs,
        args.seed,
        args.min_instances,
        args.folds,
        args.steps,
        args.workers,
    )
    write_sweep(result, out_dir)
    for row in result.rows:
        if not row.evaluable:
            ctx.notes.append(
                f"cell alpha={row.alpha} beta={row.beta} {row.classifier}: {row.n_instances} instances, unevaluable"
            )
    return result


# -- subcommand handlers ---------------------------------------------------


def cmd_window(args, ctx):
    stage_window(args, ctx, Path(args.out))
    return manifest_path(args.out, True)


def cmd_detect(args, ctx):
    stage_detect(args, ctx, Path(args.frames), Path(args.out))
    return manifest_path(args.out, False)


def cmd_importance(args, ctx):
    stage_importance(args, ctx, Path(args.groups), _opt_path(args.frames), Path(args.out))
    return manifest_path(args.out, False)


def cmd_ged(args, ctx):
    stage_ged(args, ctx, Path(args.groups), _opt_path(args.ni), _opt_path(args.frames), Path(args.out))
    return manifest_path(args.out, False)


def cmd_chains(args, ctx):
    stage_chains(args, ctx, Path(args.events), Path(args.groups), _opt_path(args.frames), Path(args.out))
    return manifest_path(args.out, False)


def cmd_eval(args, ctx):
    stage_eval(args, ctx, Path(args.instances), ClassifierKind(args.classifier), Path(args.out))
    return manifest_path(args.out, False)


def cmd_sweep(args, ctx):
    stage_sweep(args, ctx, Path(args.groups), _opt_path(args.ni), _opt_path(args.frames), Path(args.out))
    return manifest_path(args.out, True)


def cmd_synth(args, ctx):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.script:
        ctx.add_input(args.script)
        script = read_script(args.script)
    else:
        script = lifecycle_script(args.lifecycle, args.frames, args.noise or 0.0, args.seed)
    if args.noise is not None and args.script:
        script.noise = args.noise
    script.seed = args.seed
    ctx.seeds["synth"] = args.seed
    planted = plant_memberships(script)
    interactions = emit_edges(planted.groups, args.p_intra, args.p_inter, args.seed, int(args.frame_days * DAY), args.origin)
    (out / "script.txt").write_text(script.render(), encoding="utf-8", newline="\n")
    (out / "interactions.csv").write_text(format_interactions(interactions), encoding="utf-8", newline="\n")
    write_groups(planted.groups, out / "groups.csv")
    truth = planted.truth if script.noise == 0 else planted.realized_truth(args.truth_alpha, args.truth_beta)
    write_events(truth, out / "truth.csv")
    return manifest_path(out, True)


def _opt_path(value) -> Path | None:
    return Path(value) if value else None


# -- pipeline --------------------------------------------------------------

PIPELINE_DEFAULTS: dict[str, Any] = {
    "window_days": 30.0,
    "overlap_days": 0.0,
    "origin": None,
    "delimiter": None,
    "max_errors": 0,
    "k": 3,
    "min_weight": None,
    "measure": "sp",
    "scope": "group",
    "epsilon": 0.85,
    "tol": 1e-9,
    "max_iter": 200,
    "alpha": 0.8,
    "beta": 0.8,
    "dissolve_threshold": 0.10,
    "alphas": None,
    "betas": None,
    "classifiers": [ClassifierKind.TREE],
    "seed": 0,
    "trees": None,
    "knn_k": None,
    "prune": False,
    "min_leaf": None,
    "folds": 10,
    "steps": 4,
    "label_policy": "priority",
    "chain_policy": "per-chain",
    "min_instances": MIN_INSTANCES,
    "workers": 1,
    "input": None,
    "frames": None,
    "groups": None,
    "ni": None,
}

_CONFIG_TYPES: dict[str, Callable[[str], Any]] = {
    "window_days": float,
    "overlap_days": float,
    "origin": timestamp,
    "max_errors": int,
    "k": int,
    "min_weight": float,
    "epsilon": float,
    "tol": float,
    "max_iter": int,
    "alpha": fraction,
    "beta": fraction,
    "dissolve_threshold": float,
    "alphas": fraction_list,
    "betas": fraction_list,
    "classifiers": classifier_list,
    "seed": int,
    "trees": int,
    "knn_k": int,
    "prune": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
    "min_leaf": int,
    "folds": int,
    "steps": int,
    "min_instances": int,
    "workers": int,
}


def read_config(path: str | Path) -> dict[str, Any]:
    """``key = value`` lines; keys are flag names (dashes or underscores)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    config: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key == "k_clique":
            key = "k"
        if key not in PIPELINE_DEFAULTS:
            raise InputError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            config[key] = _CONFIG_TYPES.get(key, str)(value)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise InputError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return config


def cmd_pipeline(args, ctx):
    config = read_config(args.config) if args.config else {}
    if args.config:
        ctx.add_input(args.config)
    settings = dict(PIPELINE_DEFAULTS)
    settings.update(config)
    for key in PIPELINE_DEFAULTS:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            settings[key] = value
    defaulted = sorted(k for k in PIPELINE_DEFAULTS if k not in config and getattr(args, k, None) in (None, False))
    ctx.flags = {"resolved": settings, "defaulted": defaulted}
    opts = argparse.Namespace(**settings)
    if opts.alphas is None:
        opts.alphas = [opts.alpha]
    if opts.betas is None:
        opts.betas = [opts.beta]

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def run(stage: str, fn, *a):
        try:
            return fn(opts, ctx, *a)
        except InputError:
            raise
        except GroupEvoError as exc:
            raise StageError(stage, str(exc)) from exc
        except Exception as exc:  # noqa: BLE001 - surfaced with the stage name
            raise StageError(stage, f"{type(exc).__name__}: {exc}") from exc

    frames_dir = Path(opts.frames) if opts.frames else None
    if opts.groups is None:
        if frames_dir is None:
            if opts.input is None:
                raise InputError("pipeline needs input, frames or groups")
            frames_dir = out / "frames"
            run("window", stage_window, frames_dir)
        groups_path = out / "groups.csv"
        run("detect", stage_detect, frames_dir, groups_path)
    else:
        groups_path = Path(opts.groups)
    if opts.ni is None:
        ni_path = out / "ni.csv"
        run("importance", stage_importance, groups_path, frames_dir, ni_path)
    else:
        ni_path = Path(opts.ni)
    events_path = out / "events.csv"
    run("ged", stage_ged, groups_path, ni_path, frames_dir, events_path)
    instances_path = out / "instances.csv"
    run("chains", stage_chains, events_path, groups_path, frames_dir, instances_path)
    for kind in opts.classifiers:
        run("eval", stage_eval, instances_path, kind, out / f"report_{kind.value}.csv")
    run("sweep", stage_sweep, groups_path, ni_path, frames_dir, out / "sweep")
    return manifest_path(out, True)


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="groupevo", description="Group evolution discovery and prediction.")
    parser.add_argument("--version", action="version", version=f"groupevo {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    def window_flags(p, required: bool):
        p.add_argument("--input", required=required, help="interaction log (source,target,timestamp[,weight])")
        p.add_argument("--window-days", type=float, required=required, default=None, help="timeframe length in days")
        p.add_argument("--overlap-days", type=float, default=None if not required else 0.0, help="overlap of consecutive frames in days")
        p.add_argument("--origin", type=timestamp, default=None, help="start of frame 0 (default: earliest timestamp)")
        p.add_argument("--delimiter", default=None, help="field delimiter (default: sniff comma/tab)")
        p.add_argument("--max-errors", type=int, default=None if not required else 0, help="malformed rows tolerated before failing")

    def detect_flags(p, default=True):
        p.add_argument("--k", type=int, default=3 if default else None, help="clique size for percolation (>= 3)")
        p.add_argument("--min-weight", type=float, default=None, help="drop directed edges lighter than this before clique search")

    def importance_flags(p, default=True):
        p.add_argument("--measure", choices=["sp", "degree", "uniform"], default="sp" if default else None)
        p.add_argument("--scope", choices=["group", "frame"], default="group" if default else None, help="subgraph used for social position")
        p.add_argument("--epsilon", type=float, default=0.85 if default else None, help="social position damping")
        p.add_argument("--tol", type=float, default=1e-9 if default else None)
        p.add_argument("--max-iter", type=int, default=200 if default else None)

    def ged_flags(p, default=True):
        p.add_argument("--alpha", type=fraction, default=0.5 if default else None, help="forward inclusion threshold (0-1 or percent)")
        p.add_argument("--beta", type=fraction, default=0.5 if default else None, help="backward inclusion threshold (0-1 or percent)")
        p.add_argument("--dissolve-threshold", type=float, default=0.10 if default else None, help="expert: dissolving/forming floor")

    def chain_flags(p, default=True):
        p.add_argument("--steps", type=int, default=4 if default else None, help="frames per instance (sizes); events = steps - 1")
        p.add_argument("--label-policy", choices=["priority", "all"], default="priority" if default else None)
        p.add_argument("--chain-policy", choices=["per-chain", "per-group"], default="per-chain" if default else None)

    def model_flags(p, default=True):
        p.add_argument("--seed", type=int, default=0 if default else None)
        p.add_argument("--trees", type=int, default=None, help="forest size (default 10)")
        p.add_argument("--knn-k", "--neighbours", dest="knn_k", type=int, default=None, help="neighbours for knn (default 1)")
        p.add_argument("--min-leaf", type=int, default=None, help="minimum instances per tree branch (default 2)")
        p.add_argument("--prune", action="store_true", help="pessimistic pruning for the tree classifier")
        p.add_argument("--folds", type=int, default=10 if default else None)

    def sweep_flags(p, default=True):
        p.add_argument("--alphas", type=fraction_list, default=list(DEFAULT_GRID) if default else None, help="e.g. 50,60,70,80,90,100")
        p.add_argument("--betas", type=fraction_list, default=list(DEFAULT_GRID) if default else None)
        p.add_argument("--classifiers", type=classifier_list, default=[ClassifierKind.TREE, ClassifierKind.FOREST, ClassifierKind.BASELINE] if default else None)
        p.add_argument("--min-instances", type=int, default=MIN_INSTANCES if default else None, help="cells with fewer instances are NA")
        p.add_argument("--workers", type=int, default=1 if default else None, help="parallel cells (results do not depend on it)")

    p = sub.add_parser("window", help="slice an interaction log into timeframes")
    window_flags(p, True)
    p.add_argument("--out", required=True, help="output directory for frame_<k>.csv and frames.json")
    p.set_defaults(func=cmd_window)

    p = sub.add_parser("detect", help="clique percolation communities per frame")
    p.add_argument("--frames", required=True)
    detect_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("importance", help="node importance inside each group")
    p.add_argument("--groups", required=True)
    p.add_argument("--frames", default=None)
    importance_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("ged", help="classify group transitions between consecutive frames")
    p.add_argument("--groups", required=True)
    p.add_argument("--ni", default=None, help="importance file (default: uniform importance)")
    p.add_argument("--frames", default=None, help="frame directory, to count trailing empty frames")
    ged_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ged)

    p = sub.add_parser("chains", help="extract classification instances from events")
    p.add_argument("--events", required=True)
    p.add_argument("--groups", required=True)
    p.add_argument("--frames", default=None)
    chain_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_chains)

    p = sub.add_parser("eval", help="cross-validate one classifier")
    p.add_argument("--instances", required=True)
    p.add_argument("--classifier", choices=[k.value for k in ClassifierKind], required=True)
    model_flags(p)
    p.add_argument("--out", required=True, help="report CSV; the confusion matrix goes to <stem>_confusion.csv")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="alpha x beta grid for several classifiers")
    p.add_argument("--groups", required=True)
    p.add_argument("--ni", default=None)
    p.add_argument("--frames", default=None)
    sweep_flags(p)
    model_flags(p)
    p.add_argument("--steps", type=int, default=4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="synthetic network with planted group evolution")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--script", help="evolution script file")
    src.add_argument("--lifecycle", type=int, metavar="N", help="generate a life-cycle script with N groups")
    p.add_argument("--frames", type=int, default=20, help="frames for --lifecycle")
    p.add_argument("--noise", type=float, default=None, help="member churn rate (overrides the script)")
    p.add_argument("--p-intra", type=float, default=1.0)
    p.add_argument("--p-inter", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--frame-days", type=float, default=30.0)
    p.add_argument("--origin", type=int, default=0)
    p.add_argument("--truth-alpha", type=fraction, default=0.5, help="thresholds for realized ground truth under noise")
    p.add_argument("--truth-beta", type=fraction, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pipeline", help="window -> detect -> importance -> ged -> chains -> eval/sweep")
    p.add_argument("--config", default=None, help="key = value file; flags override it")
    p.add_argument("--frames", default=None, help="use existing frames instead of windowing")
    p.add_argument("--groups", default=None, help="use existing groups instead of detection")
    p.add_argument("--ni", default=None, help="use existing importance scores")
    window_flags(p, False)
    detect_flags(p, False)
    importance_flags(p, False)
    ged_flags(p, False)
    chain_flags(p, False)
    sweep_flags(p, False)
    model_flags(p, False)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    flags = {k: v for k, v in vars(args).items() if k not in ("func", "verbose")}
    flags = json.loads(json.dumps(flags, default=_jsonable))
    ctx = RunContext(args.command, flags)
    logger.addHandler(ctx.collector)
    try:
        target = args.func(args, ctx)
    except InputError as exc:
        print(f"groupevo: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except GroupEvoError as exc:
        print(f"groupevo: stage failure: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except Exception as exc:  # noqa: BLE001
        print(f"groupevo: stage failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_STAGE
    finally:
        logger.removeHandler(ctx.collector)
    ctx.write(target)
    return 0


if __name__ == "__main__":
    sys.exit(main())
