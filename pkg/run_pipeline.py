#!/usr/bin/env python3
"""
Master Orchestrator - Quickest moving object detection benchmark
Renders the synthetic suite, sweeps the detectors and compares them at matched false-alarm rates
"""
import argparse
import csv
import subprocess
import sys
import time
import traceback
from pathlib import Path

PROJECT_ROOT = Path(__file__).parent
sys.path.insert(0, str(PROJECT_ROOT))

from qmd import config  # noqa: E402
from qmd.evaluation import SweepRow, dominates  # noqa: E402
from qmd.output_handler import write_comparison  # noqa: E402


# Colors for terminal output
class Colors:
    HEADER = '\033[95m'
    OKBLUE = '\033[94m'
    OKCYAN = '\033[96m'
    OKGREEN = '\033[92m'
    WARNING = '\033[93m'
    FAIL = '\033[91m'
    ENDC = '\033[0m'
    BOLD = '\033[1m'


def print_header(text):
    """Print formatted header"""
    print(f"\n{Colors.HEADER}{Colors.BOLD}{'=' * 80}{Colors.ENDC}")
    print(f"{Colors.HEADER}{Colors.BOLD}{text.center(80)}{Colors.ENDC}")
    print(f"{Colors.HEADER}{Colors.BOLD}{'=' * 80}{Colors.ENDC}\n")


def print_step(step_num, total_steps, text):
    print(f"{Colors.OKCYAN}{Colors.BOLD}[Step {step_num}/{total_steps}] {text}{Colors.ENDC}")


def print_success(text):
    print(f"{Colors.OKGREEN}✓ {text}{Colors.ENDC}")


def print_error(text):
    print(f"{Colors.FAIL}✗ {text}{Colors.ENDC}")


def print_warning(text):
    print(f"{Colors.WARNING}⚠ {text}{Colors.ENDC}")


def print_info(text):
    print(f"{Colors.OKBLUE}ℹ {text}{Colors.ENDC}")


def run_stage(stage_name, command, description):
    """
    Run one qmd subcommand and return success status

    Args:
        stage_name: Name shown in the summary
        command: Command to execute
        description: What the stage does

    Returns:
        True if the command exited with status 0
    """
    print_info(description)
    print(f"  Command: {' '.join(str(c) for c in command)}")
    print()

    start_time = time.time()
    try:
        subprocess.run(command, cwd=PROJECT_ROOT, check=True)
        print_success(f"{stage_name} completed in {time.time() - start_time:.1f}s")
        return True

    except subprocess.CalledProcessError as e:
        print_error(f"{stage_name} failed after {time.time() - start_time:.1f}s")
        print_error(f"Exit code: {e.returncode}")
        return False


def read_sweep(path):
    """Rows of a sweep.csv as SweepRow objects"""
    rows = []
    with open(path, newline='', encoding='utf-8') as f:
        for record in csv.DictReader(f):
            rows.append(SweepRow(
                b=float(record['b']),
                add=float(record['add']),
                far=float(record['far']),
                mean_f_measure=float(record['mean_f_measure']),
                num_false_alarms=int(record['num_false_alarms']),
                num_misses=int(record['num_misses']),
                num_runs=int(record['num_runs']),
                note=record['note'],
            ))
    return rows


def compare_sweeps(candidate_csv, reference_csv, out_csv):
    """Matched-FAR comparison of two sweep CSVs; returns True if the candidate dominates"""
    result, rows = dominates(read_sweep(candidate_csv), read_sweep(reference_csv))
    write_comparison(out_csv, rows)
    for row in rows:
        marker = Colors.OKGREEN if row.candidate_wins else Colors.FAIL
        print(f"{marker}  FAR={row.far:.3f}  ADD {row.add_candidate:.2f} vs {row.add_reference:.2f}{Colors.ENDC}")
    return result


def parse_arguments():
    """Parse command line arguments"""
    parser = argparse.ArgumentParser(
        description="Run the complete synth -> sweep -> comparison benchmark",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Render the suite, sweep fast and baseline_F, compare
  python run_pipeline.py

  # Also sweep the full detector (every candidate change time per frame)
  python run_pipeline.py --full

  # Reuse an already rendered suite
  python run_pipeline.py --skip-synth

  # Dry run (show what would be executed)
  python run_pipeline.py --dry-run
        """
    )
    parser.add_argument('--out', type=Path, default=config.OUTPUT_DIR, help='Output root directory')
    parser.add_argument('--seed', type=int, default=config.SEED, help='Suite seed')
    parser.add_argument('--jobs', type=int, default=None, help='Worker threads per sweep')
    parser.add_argument('--full', action='store_true', help='Also sweep the full detector')
    parser.add_argument('--skip-synth', action='store_true', help='Use the suite already under --out')
    parser.add_argument('--config', type=Path, default=None, help='key=value parameter overrides')
    parser.add_argument('--dry-run', action='store_true', help='Show commands without executing them')
    parser.add_argument('--continue-on-error', action='store_true', help='Continue when a stage fails')
    return parser.parse_args()


def main():
    """Main orchestrator function"""
    args = parse_arguments()

    print_header("QUICKEST MOVING OBJECT DETECTION - BENCHMARK PIPELINE")
    print_info(f"Output root: {args.out}")
    print_info(f"Seed: {args.seed}")
    print()

    suite_dir = args.out / 'suite'
    base = [sys.executable, '-m', 'qmd.main']
    extra = []
    if args.config:
        extra += ['--config', str(args.config)]
    if args.jobs:
        extra += ['--jobs', str(args.jobs)]

    stages = []
    if not args.skip_synth:
        stages.append(('synth', base + ['synth', '--out', str(suite_dir), '--seed', str(args.seed)],
                       'Rendering the synthetic benchmark suite'))
    detectors = ['fast', 'baseline_F'] + (['full'] if args.full else [])
    for detector in detectors:
        command = base + ['sweep', '--suite', str(suite_dir), '--detector', detector,
                          '--out', str(args.out / f'sweep_{detector}'), '--seed', str(args.seed),
                          '--no-timing'] + extra
        stages.append((f'sweep_{detector}', command, f'Threshold sweep of the {detector} detector'))

    total = len(stages) + 1
    start_time = time.time()
    results = {}

    for step, (name, command, description) in enumerate(stages, start=1):
        print_step(step, total, name)
        if args.dry_run:
            print_info(f"Would execute: {' '.join(command)}")
            results[name] = True
            continue
        results[name] = run_stage(name, command, description)
        if not results[name] and not args.continue_on_error:
            print_error(f"\n{name} failed. Stopping pipeline.")
            sys.exit(1)

    print_step(total, total, 'comparison')
    comparison_csv = args.out / config.COMPARISON_FILENAME
    fast_csv = args.out / 'sweep_fast' / config.SWEEP_FILENAME
    baseline_csv = args.out / 'sweep_baseline_F' / config.SWEEP_FILENAME
    if args.dry_run:
        print_info(f"Would compare {fast_csv} against {baseline_csv} into {comparison_csv}")
        results['comparison'] = True
    elif fast_csv.exists() and baseline_csv.exists():
        dominated = compare_sweeps(fast_csv, baseline_csv, comparison_csv)
        if dominated:
            print_success("fast detector has less delay at every matched false-alarm level")
        else:
            print_warning("fast detector does not dominate baseline_F at every matched level")
        results['comparison'] = True
    else:
        print_error("Sweep CSVs missing; skipping comparison")
        results['comparison'] = False

    total_time = time.time() - start_time
    print_header("PIPELINE EXECUTION SUMMARY")
    for name, success in results.items():
        status = "SUCCESS" if success else "FAILED"
        color = Colors.OKGREEN if success else Colors.FAIL
        print(f"{color}{name}: {status}{Colors.ENDC}")
    print(f"\nTotal execution time: {total_time:.1f}s")

    if all(results.values()):
        print_success("Pipeline completed successfully")
        print("\nOutput files:")
        print(f"  • Suite: {suite_dir}")
        for detector in detectors:
            print(f"  • Sweep ({detector}): {args.out / f'sweep_{detector}' / config.SWEEP_FILENAME}")
        print(f"  • Comparison: {comparison_csv}")
        sys.exit(0)
    print_error("Pipeline completed with errors")
    sys.exit(1)


if __name__ == '__main__':
    try:
        main()
    except KeyboardInterrupt:
        print_warning("\n\nPipeline interrupted by user")
        sys.exit(130)
    except Exception as e:
        print_error(f"\n\nUnexpected error: {e}")
        traceback.print_exc()
        sys.exit(1)
