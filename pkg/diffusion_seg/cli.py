"""Command-line interface: segment, oracle, viz, train, eval, grad-check, bench, synth, params"""

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd
from dotenv import load_dotenv
from pydantic import ValidationError

from . import __version__, config
from .core.grid import NodeGrid
from .core.settings import EngineConfig, validate_config
from .core.types import ScoreMap
from .diffusion.cascade import CascadeParams, run_cascade, walk_step
from .diffusion.oracle import power_series
from .diffusion.solvers import ClosedFormSolver
from .errors import BoundsError, ConfigValidationError, DiffusionSegError, ShapeMismatchError, SingularSystemError
from .examples.synthetic import generate_suite, write_suite
from .features.provider import FileProvider, HandcraftedProvider, save_pyramid
from .io.atomic import atomic_write_text
from .io.netpbm import read_image, read_pgm, write_netpbm
from .metrics import argmax_labels, downsample_labels, miou, upsample_labels
from .pipeline import SegmentationPipeline, SegmentationResult
from .seed.importance import ImportanceHead
from .seed.seeds import block_vote, load_seeds
from .similarity.transitions import TransitionMatrix, load_transition, save_transition, transition_row
from .train.gradcheck import grad_check, random_instance
from .train.parameters import load_params, save_params
from .train.trainer import TrainConfig, fit
from .utils.logger import DiffusionLogger, get_logger
from .visualization.heatmap import write_heatmap
from .visualization.plotter import GridPlotter

logger = get_logger("cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

VIZ_TARGETS = ("scoremap", "influence", "importance", "transition-row", "stage-trace")


class UsageError(Exception):
    """Bad command line: unknown subcommand or flag, missing or malformed argument"""


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


class DataPair(NamedTuple):
    name: str
    image: Path
    seeds: Path
    truth: Path


# ----------------------------------------------------------------------------
# Shared helpers
# ----------------------------------------------------------------------------


def _parse_stages(text: Optional[str]) -> frozenset:
    if not text:
        return frozenset()
    try:
        return frozenset(int(part) for part in text.split(",") if part.strip())
    except ValueError as e:
        raise UsageError(f"--skip-stages expects comma-separated integers, got {text!r}") from e


def _engine_config(args: argparse.Namespace) -> EngineConfig:
    overrides = {
        "num_stages": args.stages,
        "num_classes": args.classes,
        "downsample_factor": args.downsample,
        "embed_dim": args.embed_dim,
        "softmax_temperature": args.temperature,
        "pool_mode": args.pool,
        "affinity_scale": not args.no_affinity_scale,
        "skip_stages": _parse_stages(args.skip_stages),
    }
    return validate_config({k: v for k, v in overrides.items() if v is not None})


def _load_parameters(path: Optional[str], cfg: EngineConfig):
    if not path:
        return CascadeParams.initial(cfg.num_stages), ImportanceHead.zeros(cfg.num_classes)
    params, head = load_params(path)
    if params.stages != cfg.num_stages:
        raise ShapeMismatchError(
            f"{path} holds {params.stages} stage(s); pass --stages {params.stages}"
        )
    if head.classes != cfg.num_classes:
        raise ShapeMismatchError(
            f"{path} holds a head for {head.classes} class(es); pass --classes {head.classes}"
        )
    return params, head


def _pipeline(args: argparse.Namespace, cfg: EngineConfig) -> SegmentationPipeline:
    params, head = _load_parameters(args.params, cfg)
    features = getattr(args, "features", None)
    provider = FileProvider(features) if features else HandcraftedProvider()
    return SegmentationPipeline(cfg, params, head, provider, workers=getattr(args, "workers", None))


def _read_inputs(args: argparse.Namespace):
    if not args.image and not args.features:
        raise UsageError("an input needs --image or --features")
    image = read_image(args.image) if args.image else None
    seeds = load_seeds(args.seeds) if args.seeds else []
    return image, seeds


def discover_pairs(directory: str) -> List[DataPair]:
    """`<name>.ppm|.pgm` images with `<name>.seeds` (or `<name>.scribble.pgm`) and `<name>.gt.pgm`."""
    root = Path(directory)
    if not root.is_dir():
        raise DiffusionSegError(f"{directory} is not a directory")

    pairs = []
    for path in sorted(root.iterdir()):
        if path.suffix not in (".ppm", ".pgm") or path.name.endswith((".gt.pgm", ".scribble.pgm")):
            continue
        name = path.stem
        truth = root / f"{name}.gt.pgm"
        seeds = root / f"{name}.seeds"
        if not seeds.exists():
            seeds = root / f"{name}.scribble.pgm"
        if truth.exists() and seeds.exists():
            pairs.append(DataPair(name, path, seeds, truth))
        else:
            logger.warning(f"Skipping {path.name}: missing seeds or groundtruth")
    if not pairs:
        raise DiffusionSegError(f"no image/seed/groundtruth triples in {directory}")
    return pairs


def _select_class(values: np.ndarray, cls: Optional[int]) -> np.ndarray:
    if cls is None:
        return values.max(axis=1)
    if not 0 <= cls < values.shape[1]:
        raise BoundsError(f"class {cls} out of range for {values.shape[1]} classes")
    return values[:, cls]


def _stage_table(params: CascadeParams) -> pd.DataFrame:
    mu, beta = params.effective()
    return pd.DataFrame(
        {
            "stage": np.arange(1, params.stages + 1),
            "mu_logit": params.mu_logits,
            "beta_logit": params.beta_logits,
            "mu": mu,
            "beta": beta,
        }
    )


def _print_frame(frame: pd.DataFrame) -> None:
    print(frame.to_string(index=False, float_format=lambda v: f"{v:.6g}"))


# ----------------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------------


def cmd_segment(args: argparse.Namespace) -> int:
    cfg = _engine_config(args)
    pipeline = _pipeline(args, cfg)
    image, seeds = _read_inputs(args)
    result = pipeline.run(image, seeds, mode=args.mode)

    height, width = result.image_shape
    out = Path(args.out)
    write_netpbm(out, upsample_labels(result.labels, height, width))
    manifest_path = Path(args.manifest) if args.manifest else out.with_suffix(config.MANIFEST_SUFFIX)

    outputs = {"labels": str(out), "manifest": str(manifest_path)}
    if args.save_features:
        save_pyramid(args.save_features, result.pyramid)
        outputs["features"] = args.save_features
    if args.save_transitions:
        directory = Path(args.save_transitions)
        for p in result.transitions:
            save_transition(directory / f"stage_{p.level}.tmat", p)
        outputs["transitions"] = str(directory)

    inputs = {k: v for k, v in (("image", args.image), ("seeds", args.seeds), ("features", args.features)) if v}
    pipeline.manifest(result, inputs, outputs, args.params).write(manifest_path)

    print(f"labels: {out}")
    print(f"manifest: {manifest_path}")
    for phase, seconds in result.timings.items():
        print(f"{phase}: {seconds:.4f} s")
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    if not 0.0 <= args.mu < 1.0:
        raise UsageError(f"--mu must lie in [0, 1), got {args.mu}")
    if args.iters < 0 or args.n < 1 or args.classes < 1:
        raise UsageError("--n and --classes must be >= 1 and --iters >= 0")

    rng = np.random.default_rng(args.seed)
    if args.transition:
        p = load_transition(args.transition)
    else:
        raw = rng.random((args.n, args.n))
        p = TransitionMatrix(raw / raw.sum(axis=1, keepdims=True))
    grid = NodeGrid(1, p.size)
    s = ScoreMap(grid, rng.normal(size=(p.size, args.classes)))

    y = s
    for _ in range(args.iters):
        y = walk_step(y, p, s, args.mu)

    outcome = ClosedFormSolver(args.mu).solve(s, p)
    if not outcome["success"]:
        raise SingularSystemError(outcome["error"])
    deviation = float(np.max(np.abs(y.values - outcome["prediction"].values)))

    print(f"nodes: {p.size}  classes: {args.classes}  mu: {args.mu}  iterations: {args.iters}")
    print(f"max-norm deviation (iterated walk vs closed form): {deviation:.3e}")
    if args.iters >= 1:
        series = power_series(p, s, args.mu, args.iters - 1)
        print(f"max-norm deviation (power series vs iterated walk): "
              f"{float(np.max(np.abs(series.values - y.values))):.3e}")
    print(f"fixed-point residual (closed form): {outcome['residual']:.3e}")
    return EXIT_OK


def cmd_viz(args: argparse.Namespace) -> int:
    cfg = _engine_config(args)
    pipeline = _pipeline(args, cfg)
    image, seeds = _read_inputs(args)
    result: SegmentationResult = pipeline.run(image, seeds)
    grid = result.grid
    marker = None

    if args.what == "scoremap":
        values = grid.reshape(_select_class(result.x.values, args.cls))
        title = "Score map x"
    elif args.what == "influence":
        values = grid.reshape(result.influence.values)
        title = "Influence map E(x)"
    elif args.what == "importance":
        values = grid.reshape(result.importance.values)
        title = "Importance map M(x)"
    elif args.what == "transition-row":
        if args.node is None:
            raise UsageError("--what transition-row needs --node")
        stage = 1 if args.stage is None else args.stage
        if not 1 <= stage <= len(result.transitions):
            raise BoundsError(f"stage {stage} out of range 1..{len(result.transitions)}")
        values = transition_row(result.transitions[stage - 1], args.node, grid)
        marker = divmod(args.node, grid.width)
        title = f"Transition row of node {args.node}, stage {stage}"
    else:
        trace = result.state.trace
        stage = len(trace) - 1 if args.stage is None else args.stage
        if not 0 <= stage < len(trace):
            raise BoundsError(f"stage {stage} out of range 0..{len(trace) - 1}")
        values = grid.reshape(_select_class(trace[stage].values, args.cls))
        title = f"Prediction after {stage} executed stage(s)"

    write_heatmap(args.out, values)
    print(f"heatmap: {args.out}")
    if args.html:
        GridPlotter.write_html(GridPlotter.create_heatmap(values, title, marker), args.html)
        print(f"html: {args.html}")
    return EXIT_OK


def _load_pair(pair: DataPair, cfg: EngineConfig):
    image = read_image(pair.image)
    grid = NodeGrid.for_image(image.height, image.width, cfg.downsample_factor)
    truth = downsample_labels(read_pgm(pair.truth), grid)
    return image, load_seeds(pair.seeds), truth, grid


def _train_config(args: argparse.Namespace) -> TrainConfig:
    try:
        return TrainConfig(
            learning_rate=args.lr,
            epochs=args.epochs,
            momentum=args.momentum,
            train_cascade=not args.freeze_cascade,
            train_head=not args.freeze_head,
            workers=args.workers,
        )
    except ValidationError as e:
        raise ConfigValidationError(
            [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
        ) from e


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _engine_config(args)
    tcfg = _train_config(args)
    params, head = _load_parameters(args.init, cfg)

    dataset = []
    for pair in discover_pairs(args.data):
        image, pixel_seeds, truth, grid = _load_pair(pair, cfg)
        dataset.append((image, block_vote(pixel_seeds, grid, image.height, image.width), truth))

    result = fit(dataset, cfg, tcfg, params, head)
    save_params(args.out, result.params, result.head)

    _print_frame(_stage_table(result.params))
    print(f"loss: {result.history[0]:.6f} -> {result.history[-1]:.6f} over {len(result.history)} epoch(s)")
    print(f"params: {args.out}")
    return EXIT_OK


def evaluate_pairs(
    pairs: Sequence[DataPair], pipeline: SegmentationPipeline, mode: str, workers: int
) -> pd.DataFrame:
    """One row per pair: seed-only, final and per-stage mIoU."""
    cfg = pipeline.cfg

    def evaluate(pair: DataPair) -> Dict[str, object]:
        image, pixel_seeds, truth, _ = _load_pair(pair, cfg)
        result = pipeline.run(image, pixel_seeds, mode=mode)
        row = {
            "name": pair.name,
            "seed_only": miou(result.seed_only_labels(), truth, cfg.num_classes)[1],
            "cascade": miou(result.labels, truth, cfg.num_classes)[1],
        }
        for t, y in zip(result.state.executed if result.state else [], result.stage_predictions()):
            row[f"stage_{t}"] = miou(argmax_labels(y), truth, cfg.num_classes)[1]
        return row

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(evaluate, pairs))
    else:
        rows = [evaluate(pair) for pair in pairs]
    return pd.DataFrame(rows)


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _engine_config(args)
    pipeline = _pipeline(args, cfg)
    frame = evaluate_pairs(discover_pairs(args.data), pipeline, args.mode, args.workers)

    _print_frame(frame)
    print(f"mean seed-only mIoU: {frame['seed_only'].mean():.6f}")
    print(f"mean {args.mode} mIoU: {frame['cascade'].mean():.6f}")
    if args.report:
        atomic_write_text(args.report, frame.to_csv(index=False))
        print(f"report: {args.report}")
    return EXIT_OK


def cmd_grad_check(args: argparse.Namespace) -> int:
    cfg = _engine_config(args)
    if args.side < 1 or args.side ** 2 > 100:
        raise UsageError(f"--side must give at most 100 nodes, got {args.side}")
    instance = random_instance(args.side, cfg.num_classes, cfg.num_stages, seed=args.seed)

    if args.params:
        params, head = _load_parameters(args.params, cfg)
    else:
        rng = np.random.default_rng(args.seed + 1)
        params = CascadeParams(rng.normal(scale=0.5, size=cfg.num_stages), rng.normal(scale=0.5, size=cfg.num_stages))
        head = ImportanceHead(rng.normal(scale=0.3, size=9 * cfg.num_classes), float(rng.normal(scale=0.3)))

    report = grad_check(
        instance, params, head, args.fd_epsilon, cfg,
        train_cascade=not args.freeze_cascade, train_head=not args.freeze_head,
    )
    _print_frame(report.to_frame())
    passed = report.passed(args.tol)
    print(f"max relative error: {report.max_relative_error:.3e} ({'PASS' if passed else 'FAIL'} at tol {args.tol:g})")
    return EXIT_OK if passed else EXIT_DATA


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = _engine_config(args)
    if args.image or args.features:
        pipeline = _pipeline(args, cfg)
        image, seeds = _read_inputs(args)
        result = pipeline.run(image, seeds)
        frame = pd.DataFrame({"phase": list(result.timings), "seconds": list(result.timings.values())})
        _print_frame(frame)
        if args.manifest:
            inputs = {k: v for k, v in (("image", args.image), ("seeds", args.seeds), ("features", args.features)) if v}
            pipeline.manifest(result, inputs, {"manifest": args.manifest}, args.params).write(args.manifest)
            print(f"manifest: {args.manifest}")
        return EXIT_OK

    rng = np.random.default_rng(args.seed)
    grid = NodeGrid(1, args.n)
    transitions = []
    for level in range(1, cfg.num_stages + 1):
        raw = rng.random((args.n, args.n))
        transitions.append(TransitionMatrix(raw / raw.sum(axis=1, keepdims=True), level=level))
    s = ScoreMap(grid, rng.normal(size=(args.n, cfg.num_classes)))
    params = CascadeParams.initial(cfg.num_stages)

    best = float("inf")
    for _ in range(max(1, args.repeats)):
        start = time.perf_counter()
        run_cascade(s, transitions, params, cfg)
        best = min(best, time.perf_counter() - start)
    print(f"diffusion: {best:.4f} s (N={args.n}, K={cfg.num_classes}, T={len(cfg.active_stages())})")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    items = generate_suite(
        count=args.count, seed=args.seed, size=args.size,
        density=args.density, noise=args.noise, downsample_factor=args.downsample,
    )
    write_suite(args.out, items)
    print(f"wrote {len(items)} item(s) to {args.out}")
    return EXIT_OK


def cmd_params(args: argparse.Namespace) -> int:
    params, head = load_params(args.params)
    _print_frame(_stage_table(params))
    print(f"importance head: {head.classes} class(es), bias {head.bias!r}")
    return EXIT_OK


# ----------------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------------


def _engine_flags() -> argparse.ArgumentParser:
    flags = argparse.ArgumentParser(add_help=False)
    group = flags.add_argument_group("engine")
    group.add_argument("--stages", type=int, help=f"cascade stages T (default {config.DEFAULT_NUM_STAGES})")
    group.add_argument("--classes", type=int, help=f"classes K (default {config.DEFAULT_NUM_CLASSES})")
    group.add_argument("--downsample", type=int, help=f"downsample factor (default {config.DEFAULT_DOWNSAMPLE_FACTOR})")
    group.add_argument("--embed-dim", type=int, help=f"embedding dimension (default {config.DEFAULT_EMBED_DIM})")
    group.add_argument("--temperature", type=float, help="softmax temperature")
    group.add_argument("--pool", choices=("average", "max"), help="pooling mode of the projection")
    group.add_argument("--no-affinity-scale", action="store_true", help="skip the 1/sqrt(d) affinity scale")
    group.add_argument("--skip-stages", help="comma-separated 1-based stages to omit, e.g. 2,4")
    return flags


def _input_flags(seeds_required: bool = False) -> argparse.ArgumentParser:
    flags = argparse.ArgumentParser(add_help=False)
    flags.add_argument("--image", help="input PPM/PGM image")
    flags.add_argument("--seeds", required=seeds_required, help="seed text file or scribble PGM")
    flags.add_argument("--features", help="precomputed FPYR feature pyramid")
    flags.add_argument("--params", help="trained parameter file")
    return flags


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="diffusion-seg", description="Seeded graph-diffusion segmentation")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    engine = _engine_flags()

    p = sub.add_parser("segment", parents=[engine, _input_flags(seeds_required=True)], help="segment an image")
    p.add_argument("--out", required=True, help="output label PGM")
    p.add_argument("--manifest", help="manifest path (default: <out>.manifest)")
    p.add_argument("--mode", choices=("cascade", "closed-form"), default="cascade")
    p.add_argument("--workers", type=int, default=None, help="threads for transition construction")
    p.add_argument("--save-features", help="also write the feature pyramid (FPYR)")
    p.add_argument("--save-transitions", help="also write stage_<t>.tmat files to this directory")
    p.set_defaults(handler=cmd_segment)

    p = sub.add_parser("oracle", help="iterated walk vs closed-form solve on one transition matrix")
    p.add_argument("--n", type=int, default=64, help="node count of the random matrix")
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--iters", type=int, default=80)
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--transition", help="use a stored TMAT matrix instead of a random one")
    p.set_defaults(handler=cmd_oracle)

    p = sub.add_parser("viz", parents=[engine, _input_flags()], help="render a node grid as a PGM heatmap")
    p.add_argument("--what", choices=VIZ_TARGETS, required=True)
    p.add_argument("--node", type=int, help="source node for transition-row")
    p.add_argument("--stage", type=int, help="stage for transition-row (1-based) or stage-trace (0 = seed)")
    p.add_argument("--class", dest="cls", type=int, help="class channel (default: max over classes)")
    p.add_argument("--out", required=True, help="output heatmap PGM")
    p.add_argument("--html", help="also write an interactive plotly HTML heatmap")
    p.set_defaults(handler=cmd_viz)

    p = sub.add_parser("train", parents=[engine], help="fit cascade parameters and the importance head")
    p.add_argument("--data", required=True, help="directory of image/seed/groundtruth triples")
    p.add_argument("--out", required=True, help="output parameter file")
    p.add_argument("--init", help="starting parameter file")
    p.add_argument("--epochs", type=int, default=config.DEFAULT_EPOCHS)
    p.add_argument("--lr", type=float, default=config.DEFAULT_LEARNING_RATE)
    p.add_argument("--momentum", type=float, default=config.DEFAULT_MOMENTUM)
    p.add_argument("--freeze-cascade", action="store_true")
    p.add_argument("--freeze-head", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("eval", parents=[engine], help="mIoU over a directory of pairs")
    p.add_argument("--data", required=True)
    p.add_argument("--params")
    p.add_argument("--mode", choices=("cascade", "closed-form"), default="cascade")
    p.add_argument("--workers", type=int, default=config.EVAL_WORKERS)
    p.add_argument("--report", help="write the per-pair table as CSV")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("grad-check", parents=[engine], help="analytic vs finite-difference gradients")
    p.add_argument("--side", type=int, default=5, help="random instance on a side x side grid")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--params")
    p.add_argument("--fd-epsilon", type=float, default=config.DEFAULT_FD_EPSILON)
    p.add_argument("--tol", type=float, default=config.GRADIENT_TOLERANCE)
    p.add_argument("--freeze-cascade", action="store_true")
    p.add_argument("--freeze-head", action="store_true")
    p.set_defaults(handler=cmd_grad_check)

    p = sub.add_parser("bench", parents=[engine, _input_flags()], help="phase timings")
    p.add_argument("--n", type=int, default=1024, help="node count for the diffusion-only benchmark")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--manifest", help="write a run manifest with the phase timings")
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("synth", help="write the synthetic two-region suite")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=60)
    p.add_argument("--density", type=float, default=0.05)
    p.add_argument("--noise", type=float, default=0.10)
    p.add_argument("--downsample", type=int, default=config.DEFAULT_DOWNSAMPLE_FACTOR)
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("params", help="print effective mu/beta per stage")
    p.add_argument("--params", required=True)
    p.set_defaults(handler=cmd_params)

    return parser


def cli_dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse argv and run one subcommand.

    Returns:
        0 on success, 1 on a usage error, 2 on a data error
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help and --version
        return int(e.code or 0)

    if args.verbose:
        DiffusionLogger.setup(level="DEBUG", force=True)

    try:
        return args.handler(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DiffusionSegError, OSError) as e:
        DiffusionLogger.log_error_with_context(logger, e, args.command)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


def main():
    """Console entry point"""
    load_dotenv()
    DiffusionLogger.setup(level=os.getenv("LOG_LEVEL", "WARNING"), log_file=os.getenv("LOG_FILE"), force=True)
    sys.exit(cli_dispatch())
