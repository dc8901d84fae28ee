"""Command-line surface: run chains, sweep fidelities, optimize, validate.

Exit codes are a stable contract for scripting:
  0  success
  1  validation failure (``validate`` only; the report is still written)
  2  usage error (bad flags or unparsable values)
  3  domain error (degenerate phase, grid overflow, ...)

All numeric files are locale-independent: decimal points, fixed column
order, LF line endings, 17 significant digits.  Every run writes a
``manifest.json`` listing the produced files.  Identical flags, seed and
tool version reproduce identical numeric outputs; the environment variable
``QND_SIM_THREADS`` caps sweep parallelism (0 = auto) without changing any
result.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .chain import (
    ChainConfig,
    beam_splitter_transform,
    conditional_output,
    conditional_state_raw,
    feedback_displace,
    homodyne_distribution,
    make_outcome,
    outcome_grid,
    output_squeeze,
    sample_outcomes,
)
from .errors import InvalidParameterError, QndSimError
from .fidelity import FidelityPair, distribution_fidelity, state_fidelity
from .grids import (
    GaussianSpec,
    Grid,
    GridPolicy,
    StateSpec,
    WaveFunction,
    auto_grid,
    build_gaussian,
    build_state,
    density,
    overlap,
    parse_state_spec,
)
from .optimize import (
    gaussian_trade_off_report,
    numeric_trade_off_report,
    trade_off,
    tune_phase,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3

DEFAULT_SIGNAL = "gaussian:0,0.25"
DEFAULT_PHI = math.pi / 4


# ---------------------------------------------------------------------------
# argument parsing helpers (raise ArgumentTypeError -> argparse exits 2)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _seed_arg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits, got {value}")
    return value


def _outcome_arg(text: str) -> tuple[str, object]:
    if text.startswith("sample:"):
        return "sample", _positive_int(text.partition(":")[2])
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected an outcome value, a comma list of values, or sample:<n>; got {text!r}"
        ) from None
    return "fixed", values


def _signal_arg(text: str) -> tuple[str, object]:
    if text.startswith("file:"):
        path = text.partition(":")[2]
        if not path:
            raise argparse.ArgumentTypeError("file: signal needs a path, got empty string")
        return "file", path
    try:
        return "spec", parse_state_spec(text)
    except InvalidParameterError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def _thread_cap() -> int:
    raw = os.environ.get("QND_SIM_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise InvalidParameterError(f"QND_SIM_THREADS must be an integer, got {raw!r}") from None
    if value < 0:
        raise InvalidParameterError(f"QND_SIM_THREADS must be >= 0, got {value}")
    if value == 0:
        return os.cpu_count() or 1
    return value


# ---------------------------------------------------------------------------
# deterministic file output


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="ascii", newline="\n"
    )


def _write_manifest(
    out_dir: Path, command: str, config: dict, outputs: list[str], seed: int | None
) -> None:
    manifest = {
        "command": command,
        "config": config,
        "outputs": sorted(outputs),
        "seed": seed,
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    _write_json(out_dir / "manifest.json", manifest)


def _out_dir(args: argparse.Namespace) -> Path:
    path = Path(args.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# signal loading


def _load_signal(
    signal_arg: tuple[str, object], policy: GridPolicy
) -> tuple[WaveFunction, StateSpec | None, str]:
    kind, payload = signal_arg
    if kind == "file":
        data = np.loadtxt(str(payload), delimiter=",", comments="#", ndmin=2)
        if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 16:
            raise InvalidParameterError(
                f"signal file {payload} must hold at least 16 rows of x,amplitude"
            )
        x, amp = data[:, 0], data[:, 1]
        grid = Grid(float(x[0]), float(x[-1]), len(x))
        if not np.allclose(x, grid.points, rtol=0.0, atol=1e-9 * (grid.x_max - grid.x_min)):
            raise InvalidParameterError(f"signal file {payload} is not uniformly spaced")
        return WaveFunction.normalized(grid, amp), None, f"file:{payload}"
    spec = payload
    return build_state(spec, policy.grid_for([spec])), spec, _spec_text(spec)


def _spec_text(spec: StateSpec) -> str:
    if isinstance(spec, GaussianSpec):
        return f"gaussian:{spec.mean!r},{spec.variance!r}"
    return f"cat:{spec.separation!r},{spec.component_variance!r}"


def _build_probe(variance: float, n_points: int) -> WaveFunction:
    spec = GaussianSpec(mean=0.0, variance=variance)
    return build_gaussian(spec, auto_grid([spec], n_points=n_points))


def _state_summary(wf: WaveFunction) -> dict:
    return {
        "norm": wf.norm(),
        "mean": wf.mean(),
        "variance": wf.variance(),
    }


# ---------------------------------------------------------------------------
# chain


def cmd_chain(args: argparse.Namespace) -> int:
    out_dir = _out_dir(args)
    policy = GridPolicy(n_points=args.grid_n, halfspan=args.grid_span)
    config = ChainConfig(
        phi=args.phi,
        probe_spec=GaussianSpec(mean=0.0, variance=args.probe_var),
        grid_policy=policy,
        seed=args.seed,
    )
    signal, _, signal_text = _load_signal(args.signal, policy)
    probe = build_gaussian(config.probe_spec, policy.grid_for([config.probe_spec]))

    homodyne = homodyne_distribution(signal, probe, config.phi)
    outputs = ["homodyne.csv"]
    _write_csv(out_dir / "homodyne.csv", ["x0", "p"], [homodyne.grid.points, homodyne.density])

    summary: dict = {
        "signal": _state_summary(signal),
        "homodyne": {
            "mean": homodyne.mean(),
            "variance": homodyne.variance(),
            "integral": homodyne.total(),
        },
        "outcomes": [],
    }

    mode, payload = args.outcome
    if mode == "fixed":
        for i, x0 in enumerate(payload):
            conditional = conditional_output(signal, probe, config.phi, x0)
            name = f"conditional_{i:02d}.csv"
            dist = density(conditional)
            _write_csv(out_dir / name, ["x", "density"], [dist.grid.points, dist.density])
            outputs.append(name)
            event = make_outcome(homodyne, x0, config.phi)
            record = {
                "x0": event.x0,
                "raw_X": event.raw_X,
                "density_at_x0": event.density_at_x0,
                "file": name,
                "overlap_sq_with_signal": abs(overlap(signal, conditional)) ** 2,
            }
            record.update(_state_summary(conditional))
            summary["outcomes"].append(record)
    else:
        draws = sample_outcomes(homodyne, payload, config.seed)
        _write_csv(out_dir / "samples.csv", ["x0"], [draws])
        outputs.append("samples.csv")
        summary["samples"] = {
            "count": int(payload),
            "mean": float(draws.mean()),
            "std": float(draws.std()),
            "seed": config.seed,
        }

    _write_json(out_dir / "summary.json", summary)
    outputs.append("summary.json")

    _write_manifest(
        out_dir,
        "chain",
        {
            "phi": config.phi,
            "transmittivity": config.transmittivity,
            "output_squeeze_factor": config.output_squeeze_factor,
            "probe_variance": config.probe_spec.variance,
            "signal": signal_text,
            "outcome": f"sample:{payload}" if mode == "sample" else [float(v) for v in payload],
            "grid_n": args.grid_n,
            "grid_span": args.grid_span,
        },
        outputs,
        config.seed,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep


def _numeric_pair(task: tuple[WaveFunction, float, float, int, int]) -> tuple[float, float]:
    signal, phi, variance, n_outcomes, grid_n = task
    probe = _build_probe(variance, grid_n)
    return (
        state_fidelity(signal, probe, phi, n_outcomes=n_outcomes),
        distribution_fidelity(signal, probe, phi, n_outcomes=n_outcomes),
    )


def cmd_sweep(args: argparse.Namespace) -> int:
    out_dir = _out_dir(args)
    if not 0 < args.x_min < args.x_max:
        raise InvalidParameterError(
            f"need 0 < --x-min < --x-max, got [{args.x_min}, {args.x_max}]"
        )
    xs = np.linspace(args.x_min, args.x_max, args.steps)

    if args.mode == "closed":
        pairs = [trade_off(float(x)) for x in xs]
    else:
        policy = GridPolicy(n_points=args.grid_n)
        signal, _, _ = _load_signal(args.signal, policy)
        sigma_s = math.sqrt(signal.variance())
        t = math.tan(args.phi)
        tasks = [
            (signal, args.phi, (float(x) * sigma_s * t) ** 2, args.outcome_nodes, args.grid_n)
            for x in xs
        ]
        workers = _thread_cap()
        if workers > 1:
            with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_numeric_pair, tasks))  # order-preserving
        else:
            results = [_numeric_pair(task) for task in tasks]
        pairs = [
            FidelityPair(F=f_val, G=g_val, x=float(x))
            for x, (f_val, g_val) in zip(xs, results)
        ]

    f_col = np.array([p.F for p in pairs])
    g_col = np.array([p.G for p in pairs])
    _write_csv(
        out_dir / "sweep.csv",
        ["x", "F", "G", "F_plus_G"],
        [xs, f_col, g_col, f_col + g_col],
    )
    _write_manifest(
        out_dir,
        "sweep",
        {
            "x_min": args.x_min,
            "x_max": args.x_max,
            "steps": args.steps,
            "mode": args.mode,
            "phi": args.phi,
            "signal": args.signal[1] if args.signal[0] == "file" else _spec_text(args.signal[1]),
            "grid_n": args.grid_n,
            "outcome_nodes": args.outcome_nodes,
        },
        ["sweep.csv"],
        None,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# optimize


def cmd_optimize(args: argparse.Namespace) -> int:
    out_dir = _out_dir(args)
    policy = GridPolicy(n_points=args.grid_n)
    signal, _, signal_text = _load_signal(args.signal, policy)
    if args.mode == "closed":
        report = gaussian_trade_off_report(tol=args.tol)
    else:
        report = numeric_trade_off_report(
            signal,
            args.phi,
            lo=args.x_min,
            hi=args.x_max,
            tol=max(args.tol, 1e-3),
            n_outcomes=max(256, args.grid_n // 2),
            grid_points=args.grid_n,
        )
    payload = dataclasses.asdict(report)
    payload["mode"] = args.mode
    if args.sigma_probe is not None:
        sigma_s = math.sqrt(signal.variance())
        payload["sigma_probe"] = args.sigma_probe
        payload["sigma_signal"] = sigma_s
        payload["tuned_phase"] = tune_phase(sigma_s, args.sigma_probe, report.x_m)
    _write_json(out_dir / "report.json", payload)
    _write_manifest(
        out_dir,
        "optimize",
        {
            "mode": args.mode,
            "tol": args.tol,
            "phi": args.phi,
            "signal": signal_text,
            "sigma_probe": args.sigma_probe,
            "x_min": args.x_min,
            "x_max": args.x_max,
            "grid_n": args.grid_n,
        },
        ["report.json"],
        None,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate


def _gaussian_density(x: np.ndarray, mean: float, variance: float) -> np.ndarray:
    return np.exp(-((x - mean) ** 2) / (2 * variance)) / math.sqrt(2 * math.pi * variance)


def _l1(grid: Grid, a: np.ndarray, b: np.ndarray) -> float:
    return float(grid.weights @ np.abs(a - b))


def _l2(a: WaveFunction, b: WaveFunction) -> float:
    return math.sqrt(float(a.grid.weights @ np.abs(a.amplitudes - b.amplitudes) ** 2))


def _check(name: str, measured: float, threshold: float, larger_ok: bool = False) -> dict:
    passed = measured >= threshold if larger_ok else measured <= threshold
    return {
        "name": name,
        "passed": bool(passed),
        "measured": float(measured),
        "threshold": float(threshold),
        "comparison": ">=" if larger_ok else "<=",
    }


def _limit_checks() -> list[dict]:
    checks: list[dict] = []
    sig_spec = GaussianSpec(mean=0.0, variance=0.25)
    sigma_s = sig_spec.sigma
    phi = DEFAULT_PHI  # tan(phi) = 1

    # vacuum probe: outcome density is the signal density blurred by 1/(4 tan^2)
    signal = build_gaussian(sig_spec, auto_grid([sig_spec]))
    probe = _build_probe(0.25, 2048)
    p = homodyne_distribution(signal, probe, phi)
    oracle = _gaussian_density(p.grid.points, 0.0, 0.5)
    checks.append(_check("vacuum_convolution_l1", _l1(p.grid, p.density, oracle), 1e-6))
    checks.append(_check("vacuum_convolution_variance", abs(p.variance() - 0.5), 1e-4))

    # strongly squeezed probe: outcomes track the intrinsic density and the
    # conditional outputs collapse onto the registered value
    filter_var = 1e-4 * sig_spec.variance
    signal = build_gaussian(sig_spec, auto_grid([sig_spec], n_points=4096))
    probe = _build_probe(filter_var * math.tan(phi) ** 2, 2048)
    p = homodyne_distribution(
        signal, probe, phi, out_grid=outcome_grid(signal, probe, phi, n_points=2048)
    )
    intrinsic = _gaussian_density(p.grid.points, 0.0, sig_spec.variance)
    checks.append(_check("squeezed_limit_l1", _l1(p.grid, p.density, intrinsic), 0.02))
    worst_std = 0.0
    worst_center = 0.0
    for x0 in (-0.4, 0.0, 0.3):
        conditional = conditional_output(signal, probe, phi, x0)
        worst_std = max(worst_std, math.sqrt(conditional.variance()))
        worst_center = max(worst_center, abs(conditional.mean() - x0))
    checks.append(_check("squeezed_limit_conditional_std", worst_std, 0.02 * sigma_s))
    checks.append(_check("squeezed_limit_conditional_center", worst_center, 0.02 * sigma_s))

    # strongly anti-squeezed probe: outcomes flatten, outputs track the input
    wide_var = 1e4 * sig_spec.variance * math.tan(phi) ** 2
    signal = build_gaussian(sig_spec, auto_grid([sig_spec]))
    probe = _build_probe(wide_var, 2048)
    p = homodyne_distribution(signal, probe, phi)
    expected_var = wide_var / math.tan(phi) ** 2
    checks.append(
        _check(
            "antisqueezed_limit_variance_rel",
            abs(p.variance() - expected_var) / expected_var,
            0.01,
        )
    )
    min_fidelity = 1.0
    for x0 in np.linspace(-2 * sigma_s, 2 * sigma_s, 9):
        conditional = conditional_output(signal, probe, phi, float(x0))
        min_fidelity = min(min_fidelity, abs(overlap(signal, conditional)) ** 2)
    checks.append(_check("antisqueezed_limit_overlap_sq", min_fidelity, 0.99, larger_ok=True))
    return checks


def _pipeline_checks() -> list[dict]:
    checks: list[dict] = []
    grid = Grid(-20.0, 20.0, 8192)
    sig_spec = GaussianSpec(mean=0.0, variance=0.25)
    signal = build_gaussian(sig_spec, grid)
    worst = 0.0
    for phi in (0.5, DEFAULT_PHI, 1.1):
        for probe_var in (0.05, 0.25, 1.0):
            probe = build_gaussian(GaussianSpec(mean=0.0, variance=probe_var), grid)
            for x0 in (-1.0, 0.3, 1.5):
                staged = conditional_state_raw(signal, probe, phi, x0)
                staged = feedback_displace(staged, x0, phi)
                staged = output_squeeze(staged, phi)
                closed = conditional_output(signal, probe, phi, x0)
                worst = max(worst, _l2(staged, closed))
    checks.append(_check("pipeline_vs_closed_form_l2", worst, 1e-6))

    worst_norm = 0.0
    signal = build_gaussian(sig_spec, auto_grid([sig_spec], n_points=768))
    probe = _build_probe(0.4, 768)
    for phi in (0.3, DEFAULT_PHI, 1.2):
        joint = beam_splitter_transform(signal, probe, phi)
        worst_norm = max(worst_norm, abs(joint.norm() - 1.0))
    checks.append(_check("beam_splitter_norm", worst_norm, 1e-6))

    signal = build_gaussian(sig_spec, auto_grid([sig_spec]))
    worst_integral = 0.0
    worst_state_norm = 0.0
    for probe_var in (0.05, 0.25, 4.0):
        probe = _build_probe(probe_var, 2048)
        p = homodyne_distribution(signal, probe, DEFAULT_PHI)
        worst_integral = max(worst_integral, abs(p.total() - 1.0))
        for x0 in (-0.5, 0.8):
            conditional = conditional_output(signal, probe, DEFAULT_PHI, x0)
            worst_state_norm = max(worst_state_norm, abs(conditional.norm() - 1.0))
    checks.append(_check("homodyne_density_integral", worst_integral, 1e-8))
    checks.append(_check("conditional_output_norm", worst_state_norm, 1e-9))
    return checks


def cmd_validate(args: argparse.Namespace) -> int:
    out_dir = _out_dir(args)
    checks: list[dict] = []
    if args.suite in ("limits", "all"):
        checks.extend(_limit_checks())
    if args.suite in ("pipeline", "all"):
        checks.extend(_pipeline_checks())
    all_passed = all(c["passed"] for c in checks)
    _write_json(out_dir / "report.json", {"suite": args.suite, "passed": all_passed, "checks": checks})
    _write_manifest(out_dir, "validate", {"suite": args.suite}, ["report.json"], None)
    for check in checks:
        status = "PASS" if check["passed"] else "FAIL"
        print(
            f"[{status}] {check['name']}: measured {check['measured']:.3e} "
            f"{check['comparison']} {check['threshold']:.3e}"
        )
    return EXIT_OK if all_passed else EXIT_VALIDATION


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qndsim",
        description="Quadrature measurement-chain simulator and trade-off optimizer.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    chain = sub.add_parser("chain", help="Run the measurement chain once and dump densities.")
    chain.add_argument("--phi", type=float, required=True, help="interferometer phase (rad)")
    chain.add_argument("--probe-var", type=float, required=True, help="probe density variance")
    chain.add_argument("--signal", type=_signal_arg, default=_signal_arg(DEFAULT_SIGNAL))
    chain.add_argument(
        "--outcome",
        type=_outcome_arg,
        required=True,
        help="fixed outcome value(s) 'x0[,x1,...]' or 'sample:<n>'",
    )
    chain.add_argument("--seed", type=_seed_arg, default=0)
    chain.add_argument("--out", required=True, metavar="DIR")
    chain.add_argument("--grid-n", type=_positive_int, default=2048)
    chain.add_argument("--grid-span", type=float, default=None, help="half-width override")
    chain.set_defaults(func=cmd_chain)

    sweep = sub.add_parser("sweep", help="Tabulate F, G, F+G over a range of filter ratios.")
    sweep.add_argument("--x-min", type=float, required=True)
    sweep.add_argument("--x-max", type=float, required=True)
    sweep.add_argument("--steps", type=_positive_int, required=True)
    sweep.add_argument("--mode", choices=("closed", "numeric"), required=True)
    sweep.add_argument("--signal", type=_signal_arg, default=_signal_arg(DEFAULT_SIGNAL))
    sweep.add_argument("--phi", type=float, default=DEFAULT_PHI)
    sweep.add_argument("--grid-n", type=_positive_int, default=2048)
    sweep.add_argument("--outcome-nodes", type=_positive_int, default=1024)
    sweep.add_argument("--out", required=True, metavar="DIR")
    sweep.set_defaults(func=cmd_sweep)

    optimize = sub.add_parser("optimize", help="Locate the F+G maximum and the F=G crossing.")
    optimize.add_argument("--mode", choices=("closed", "numeric"), required=True)
    optimize.add_argument("--signal", type=_signal_arg, default=_signal_arg(DEFAULT_SIGNAL))
    optimize.add_argument("--tol", type=float, default=1e-4)
    optimize.add_argument("--phi", type=float, default=DEFAULT_PHI)
    optimize.add_argument("--sigma-probe", type=float, default=None)
    optimize.add_argument("--x-min", type=float, default=0.2)
    optimize.add_argument("--x-max", type=float, default=5.0)
    optimize.add_argument("--grid-n", type=_positive_int, default=1024)
    optimize.add_argument("--out", required=True, metavar="DIR")
    optimize.set_defaults(func=cmd_optimize)

    validate = sub.add_parser("validate", help="Run the limit and pipeline consistency suites.")
    validate.add_argument("--suite", choices=("limits", "pipeline", "all"), default="all")
    validate.add_argument("--out", required=True, metavar="DIR")
    validate.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles usage errors and --help itself
        return int(exc.code or 0)
    try:
        return args.func(args)
    except QndSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
