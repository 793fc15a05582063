#!/usr/bin/env python3
"""
Command-line entry point for quickest moving object detection
Subcommands: synth | detect | sweep | trace
"""
import argparse
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from dotenv import dotenv_values

from qmd import __version__, config
from qmd.detector import DetectorConfig, DetectorKind, StreamDetector
from qmd.errors import ConfigError, DimensionMismatchError, InputSourceError, RejectedInputError, WindowError
from qmd.evaluation import sweep
from qmd.input_handler import FrameDirectoryReader, list_sequences
from qmd.output_handler import FileManager, write_flow, write_glr_trace, write_residual, write_sweep, write_trace
from qmd.qcd import GlrState, glr_update
from qmd.qcd.gaussian import gaussian_samples, simulate_stream
from qmd.synth import benchmark_suite, generate, suite_configs
from qmd.utils.logger import log_error_with_traceback, log_section, log_step, setup_logger
from qmd.utils.validator import ConfigValidator

EXIT_OK = 0
EXIT_EXHAUSTED = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_NO_INPUT = 66
EXIT_FAILURE = 1
EXIT_INTERRUPTED = 130

GLR_TRACE_FILENAME = "glr_trace.csv"
RASTER_DIRNAME = "rasters"


class UsageError(Exception):
    """Raised by the argument parser instead of exiting with status 2"""


class QmdArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    """
    Resolved command-line run

    Exactly one input source is set: a frame directory, a suite directory, a
    rendered suite sequence (synth_index) or a Gaussian stream (gaussian_mu).
    """
    command: str
    out: Path
    detector: DetectorKind = DetectorKind.FAST
    input_dir: Optional[Path] = None
    suite_dir: Optional[Path] = None
    synth_index: Optional[int] = None
    synth_suite: bool = False
    gaussian_mu: Optional[float] = None
    threshold: float = math.inf
    thresholds: List[float] = field(default_factory=list)
    overrides: Dict[str, str] = field(default_factory=dict)
    seed: int = config.SEED
    jobs: Optional[int] = None
    timing: bool = True
    dump_rasters: bool = False
    null_only: bool = False

    def __post_init__(self):
        if self.command in ("synth",):
            return
        sources = [self.input_dir is not None, self.suite_dir is not None, self.synth_index is not None,
                   self.synth_suite, self.gaussian_mu is not None]
        if sum(sources) != 1:
            raise ConfigError("Exactly one input source is required")

    def detector_config(self) -> DetectorConfig:
        overrides = dict(self.overrides)
        overrides.setdefault("seed", str(self.seed))
        if self.jobs is not None:
            overrides["jobs"] = str(self.jobs)
        return DetectorConfig.from_overrides(overrides, timing=self.timing)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=Path, required=True, help="Output directory")
    parser.add_argument("--seed", type=int, default=None, help=f"Seed (default: {config.SEED})")
    parser.add_argument("--config", type=Path, default=None, help="key=value file of parameter overrides")
    parser.add_argument("--set", dest="settings", action="append", default=[], metavar="KEY=VALUE",
                        help="Override one parameter (repeatable; wins over --config)")
    parser.add_argument("--log-level", type=str, choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        default=config.LOG_LEVEL, help="Logging level")
    parser.add_argument("--log-file", type=Path, default=config.LOG_FILE, help="Also log to this file")


def _add_detector(parser: argparse.ArgumentParser, default: str = DetectorKind.FAST.value) -> None:
    parser.add_argument("--detector", type=str, choices=[k.value for k in DetectorKind], default=default,
                        help="full (every k), fast (F-guided k*) or baseline_F")
    parser.add_argument("--jobs", type=int, default=None, help="Worker threads (default: QMD_JOBS or cores)")
    parser.add_argument("--no-timing", action="store_true", help="Write 0 in the millis trace column")
    parser.add_argument("--beta", type=float, default=None, help="Truncation of the robust penalty")
    parser.add_argument("--sigma-bg", type=float, default=None, help="Background noise std")
    parser.add_argument("--sigma-fg", type=float, default=None, help="Object noise std")
    parser.add_argument("--prior-weight", type=float, default=None, help="Boundary-length prior weight")
    parser.add_argument("--max-window", type=str, default=None, help="Cap on n - k (or 'none')")
    parser.add_argument("--estimate-noise", action="store_true", help="Estimate sigma from pre-change residuals")


def _add_single_source(parser: argparse.ArgumentParser) -> argparse._MutuallyExclusiveGroup:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", type=Path, help="Frame directory (frame_%%04d.png)")
    source.add_argument("--synth-index", type=int, help="Render sequence I of the benchmark suite")
    return source


def build_parser() -> QmdArgumentParser:
    parser = QmdArgumentParser(prog="qmd", description="Quickest moving object detection")
    parser.add_argument("--version", action="version", version=f"qmd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=QmdArgumentParser)

    p_synth = sub.add_parser("synth", help="Write the synthetic benchmark suite")
    _add_common(p_synth)
    p_synth.add_argument("--null-only", action="store_true", help="Only no-change sequences")
    p_synth.add_argument("--size", type=int, default=config.SUITE_SIZE, help="Number of sequences")
    p_synth.add_argument("--num-null", type=int, default=config.SUITE_NULL_SEQUENCES,
                         help="Number of no-change sequences")
    p_synth.add_argument("--width", type=int, default=config.SYNTH_WIDTH)
    p_synth.add_argument("--height", type=int, default=config.SYNTH_HEIGHT)
    p_synth.add_argument("--min-frames", type=int, default=config.SUITE_MIN_FRAMES)
    p_synth.add_argument("--max-frames", type=int, default=config.SUITE_MAX_FRAMES)

    p_detect = sub.add_parser("detect", help="Run a detector on one sequence")
    _add_common(p_detect)
    _add_detector(p_detect)
    _add_single_source(p_detect)
    p_detect.add_argument("--threshold", type=float, required=True, help="Threshold b")
    p_detect.add_argument("--dump-rasters", action="store_true", help="Write flow and residual rasters")

    p_sweep = sub.add_parser("sweep", help="Threshold sweep over a suite (ADD / FAR)")
    _add_common(p_sweep)
    _add_detector(p_sweep)
    source = p_sweep.add_mutually_exclusive_group(required=True)
    source.add_argument("--suite", type=Path, help="Directory of sequence directories")
    source.add_argument("--synth", action="store_true", help="Render the benchmark suite in memory")
    p_sweep.add_argument("--thresholds", type=str, default=None,
                         help="Comma-separated thresholds (defaults depend on --detector)")
    p_sweep.add_argument("--null-only", action="store_true", help="Only no-change sequences")
    p_sweep.add_argument("--traces", action="store_true", help="Also write one trace CSV per sequence")
    p_sweep.add_argument("--f-min", type=float, default=config.F_MEASURE_MIN,
                         help="Minimum f-measure of an accepted detection")

    p_trace = sub.add_parser("trace", help="Per-frame statistics over a whole sequence (no stopping)")
    _add_common(p_trace)
    _add_detector(p_trace)
    source = _add_single_source(p_trace)
    source.add_argument("--gaussian", type=float, metavar="MU",
                        help="GLR trace of a scalar N(0,1) -> N(MU,1) stream")
    p_trace.add_argument("--length", type=int, default=200, help="Gaussian stream length")
    p_trace.add_argument("--change", type=int, default=100, help="Gaussian stream change time")
    return parser


def _parse_thresholds(text: Optional[str], kind: DetectorKind) -> List[float]:
    if text is None:
        defaults = config.DEFAULT_BASELINE_THRESHOLDS if kind == DetectorKind.BASELINE else config.DEFAULT_THRESHOLDS
        return list(defaults)
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigError(f"Invalid --thresholds '{text}'") from e


def collect_overrides(args: argparse.Namespace) -> Dict[str, str]:
    """Parameter overrides: --config file, then --set pairs, then dedicated flags"""
    overrides: Dict[str, str] = {}
    if args.config is not None:
        if not args.config.exists():
            raise ConfigError(f"Config file not found: {args.config}")
        overrides.update({k.lower(): v for k, v in dotenv_values(args.config).items() if v is not None})
    for setting in args.settings:
        key, sep, value = setting.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got '{setting}'")
        overrides[key.strip().lower()] = value.strip()

    flags = {
        "beta": getattr(args, "beta", None),
        "sigma_bg": getattr(args, "sigma_bg", None),
        "sigma_fg": getattr(args, "sigma_fg", None),
        "prior_weight": getattr(args, "prior_weight", None),
        "max_window": getattr(args, "max_window", None),
    }
    overrides.update({key: str(value) for key, value in flags.items() if value is not None})
    if getattr(args, "estimate_noise", False):
        overrides["estimate_noise"] = "true"
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    return overrides


def to_run_config(args: argparse.Namespace) -> RunConfig:
    overrides = collect_overrides(args)
    try:
        seed = int(overrides.get("seed", config.SEED))
    except ValueError as e:
        raise ConfigError(f"Invalid seed '{overrides['seed']}'") from e
    kind = DetectorKind(getattr(args, "detector", DetectorKind.FAST.value))
    return RunConfig(
        command=args.command,
        out=args.out,
        detector=kind,
        input_dir=getattr(args, "input", None),
        suite_dir=getattr(args, "suite", None),
        synth_index=getattr(args, "synth_index", None),
        synth_suite=getattr(args, "synth", False),
        gaussian_mu=getattr(args, "gaussian", None),
        threshold=getattr(args, "threshold", math.inf),
        thresholds=_parse_thresholds(getattr(args, "thresholds", None), kind) if args.command == "sweep" else [],
        overrides=overrides,
        seed=seed,
        jobs=getattr(args, "jobs", None),
        timing=not getattr(args, "no_timing", False),
        dump_rasters=getattr(args, "dump_rasters", False),
        null_only=getattr(args, "null_only", False),
    )


def _synth_sequence(run: RunConfig):
    """Frames and ground truth of suite sequence synth_index"""
    configs = suite_configs(seed=run.seed)
    if not 0 <= run.synth_index < len(configs):
        raise ConfigError(f"--synth-index must lie in 0..{len(configs) - 1}")
    return generate(configs[run.synth_index])


def _open_sequence(run: RunConfig):
    """(frames, ground truth or None, name)"""
    if run.input_dir is not None:
        reader = FrameDirectoryReader(run.input_dir)
        return reader, reader.ground_truth(), reader.name
    frames, gt = _synth_sequence(run)
    return frames, gt, gt.name


def cmd_synth(args: argparse.Namespace, logger) -> int:
    """Write the benchmark suite as frame directories with masks and manifests"""
    run = to_run_config(args)
    is_valid, errors = ConfigValidator.validate_overrides(run.overrides)
    if not is_valid:
        raise ConfigError("; ".join(errors))
    log_step(logger, 1, 2, f"Rendering suite (seed {run.seed})")
    suite = benchmark_suite(
        seed=run.seed, null_only=run.null_only,
        width=args.width, height=args.height, size=args.size, num_null=args.num_null,
        min_frames=args.min_frames, max_frames=args.max_frames,
    )
    log_step(logger, 2, 2, f"Writing {len(suite)} sequences to {run.out}")
    file_manager = FileManager(run.out)
    for frames, gt in suite:
        file_manager.save_sequence(frames, gt)
    logger.info(f"✓ Suite written: {len(suite)} sequences")
    return EXIT_OK


def _dump_rasters(detector: StreamDetector, out: Path, logger) -> None:
    directory = out / RASTER_DIRNAME
    directory.mkdir(parents=True, exist_ok=True)
    cache = detector.cache
    for i in range(2, len(cache) + 1):
        write_flow(directory / f"flow_bwd_{i:04d}.f32", cache.backward(i))
        write_flow(directory / f"flow_fwd_{i - 1:04d}.f32", cache.forward(i - 1))
        write_residual(directory / f"residual_{i:04d}.f32", cache.residual(i))
    logger.info(f"✓ Rasters written to {directory}")


def cmd_detect(args: argparse.Namespace, logger) -> int:
    """Run one detector on one sequence; exit 0 on a stop, 2 on exhaustion"""
    run = to_run_config(args)
    detector_config = run.detector_config()
    log_step(logger, 1, 3, "Opening sequence")
    frames, gt, name = _open_sequence(run)

    log_step(logger, 2, 3, f"Running {run.detector.value} detector on '{name}' (b={run.threshold})")
    detector = StreamDetector(run.detector, detector_config)
    result = detector.run(frames, run.threshold)

    log_step(logger, 3, 3, f"Writing results to {run.out}")
    file_manager = FileManager(run.out)
    write_trace(file_manager.path(config.TRACE_FILENAME), result.trace)
    if result.mask is not None:
        file_manager.save_stop_mask(result.mask)
    if run.dump_rasters:
        _dump_rasters(detector, run.out, logger)

    if not result.stopped:
        logger.info(f"Stream exhausted after {len(result.trace)} frames")
        return EXIT_EXHAUSTED
    logger.info(f"Stopped at frame {result.stop_frame}, change estimate {result.change_estimate}")
    if gt is not None and gt.change_frame is not None:
        logger.info(f"Ground-truth change frame: {gt.change_frame}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, logger) -> int:
    """Sweep thresholds over a suite and write sweep.csv"""
    run = to_run_config(args)
    detector_config = run.detector_config()

    log_step(logger, 1, 3, "Loading suite")
    if run.suite_dir is not None:
        suite = []
        for reader in list_sequences(run.suite_dir):
            gt = reader.ground_truth()
            if gt is None:
                raise InputSourceError(f"No {config.MANIFEST_FILENAME} in {reader.directory}")
            if run.null_only and gt.change_frame is not None:
                continue
            suite.append((reader, gt))
        if not suite:
            raise InputSourceError(f"No usable sequences under {run.suite_dir}")
    else:
        suite = benchmark_suite(seed=run.seed, null_only=run.null_only)

    log_step(logger, 2, 3, f"Sweeping {run.detector.value} over {len(suite)} sequences, "
                           f"thresholds {run.thresholds}")
    result = sweep(run.detector, suite, run.thresholds, config=detector_config, jobs=detector_config.jobs,
                   f_min=args.f_min)

    log_step(logger, 3, 3, f"Writing results to {run.out}")
    file_manager = FileManager(run.out)
    write_sweep(file_manager.path(config.SWEEP_FILENAME), result.rows)
    if args.traces:
        for name, trace in sorted(result.traces.items()):
            write_trace(file_manager.path(f"trace_{name}.csv"), trace)
    logger.info(f"✓ {result.num_runs} runs over {len(result.rows)} thresholds")
    return EXIT_OK


def cmd_trace(args: argparse.Namespace, logger) -> int:
    """Per-frame mean residual, F and log Lambda over a whole sequence (b = +inf)"""
    run = to_run_config(args)
    file_manager = FileManager(run.out)

    if run.gaussian_mu is not None:
        if not 1 <= args.change <= args.length:
            raise ConfigError("--change must lie in 1..--length")
        log_step(logger, 1, 2, f"GLR trace of N(0,1) -> N({run.gaussian_mu},1), change at {args.change}")
        xs = simulate_stream(np.random.default_rng(run.seed), args.length, args.change, run.gaussian_mu)
        state, states = GlrState(), []
        for sample in gaussian_samples(xs, 0.0, run.gaussian_mu):
            state = glr_update(state, sample)
            states.append(state)
        log_step(logger, 2, 2, "Writing GLR trace")
        write_glr_trace(file_manager.path(GLR_TRACE_FILENAME), states)
        return EXIT_OK

    detector_config = run.detector_config()
    log_step(logger, 1, 2, "Opening sequence")
    frames, _, name = _open_sequence(run)
    log_step(logger, 2, 2, f"Tracing {run.detector.value} statistics over '{name}'")
    detector = StreamDetector(run.detector, detector_config)
    result = detector.run(frames, math.inf)
    write_trace(file_manager.path(config.TRACE_FILENAME), result.trace)
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "detect": cmd_detect,
    "sweep": cmd_sweep,
    "trace": cmd_trace,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main execution function; returns the process exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE

    logger = setup_logger(name="qmd", log_file=args.log_file, log_level=args.log_level)
    log_section(logger, f"QMD {args.command.upper()}")
    start_time = time.time()

    try:
        code = COMMANDS[args.command](args, logger)
        logger.info(f"Total time: {time.time() - start_time:.1f}s")
        return code

    except KeyboardInterrupt:
        logger.warning("Process interrupted by user")
        return EXIT_INTERRUPTED

    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_USAGE

    except InputSourceError as e:
        logger.error(f"Input not found: {e}")
        return EXIT_NO_INPUT

    except (RejectedInputError, DimensionMismatchError, WindowError) as e:
        logger.error(f"Unusable input data: {e}")
        return EXIT_DATA

    except Exception as e:
        log_error_with_traceback(logger, e)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
