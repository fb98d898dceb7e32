"""Command-line front end for the walk simulators.

Each subcommand runs one experiment class and writes a CSV of measured
observables next to the matching closed-form overlay columns, plus a
JSON sidecar holding the fully resolved configuration.  Feeding that
sidecar back through --config reproduces the CSV byte for byte; flags
given on the command line override values from a config file.

Exit codes: 0 on success, 1 on configuration problems, 2 when a run
tripped the truncation monitor (suppressed by --allow-flagged) or shed
too many trajectories.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import subprocess
import sys

import numpy as np

from .analysis import SpreadingSeries, fit_power_law
from .coherent import make_kernel, propagate
from .correlation import evolve_correlation, export_snapshot_csv, msd_from_correlation
from .ensemble import InvalidRunError, SeedPolicy
from .fiberloop import loop_correspondence, run_loop_coherent, run_loop_ensemble
from .lattice import (
    AmplitudeField,
    TruncationMonitor,
    coherent_radius,
    mean_position,
    probability_of,
    variance,
)
from .master1d import MasterConfig, evolve_master
from .montecarlo import KickSchedule, run_ensemble

TOOL_NAME = "dephase-walk"

# Reference fit prefactor for the slow creep of the squared mean
# displacement, quoted next to measured columns as an overlay.
CREEP_PREFACTOR = 0.72

MODES = ("coherent", "dephased", "master1d", "corr2d", "fiberloop", "fit")

_FLOAT_FIELDS = ("J", "dt_kick", "J_e", "beta_frac", "t_max")
_INT_FIELDS = ("m_max", "n_traj", "master_seed", "sample_stride", "n_samples")
_BOOL_FIELDS = ("coherent",)
_TUPLE_FIELDS = ("window", "snapshot_times")
_STR_FIELDS = ("mode", "out_path", "input_path", "value_column", "time_column")


class ConfigError(Exception):
    pass


@dataclasses.dataclass
class RunConfig:
    mode: str
    J: float | None = None
    dt_kick: float | None = None
    J_e: float | None = None
    beta_frac: float | None = None
    t_max: float | None = None
    m_max: int | None = None
    n_traj: int | None = None
    master_seed: int | None = None
    sample_stride: int = 1
    n_samples: int = 200
    out_path: str | None = None
    window: tuple | None = None
    snapshot_times: tuple = ()
    coherent: bool = False
    input_path: str | None = None
    value_column: str | None = None
    time_column: str = "t"

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["window"] = list(self.window) if self.window is not None else None
        out["snapshot_times"] = list(self.snapshot_times)
        return out


_REQUIRED = {
    "coherent": ("J", "t_max", "out_path"),
    "dephased": ("J", "dt_kick", "t_max", "n_traj", "master_seed", "out_path"),
    "master1d": ("J_e", "t_max", "out_path"),
    "corr2d": ("J_e", "t_max", "out_path"),
    "fiberloop": ("beta_frac", "m_max", "out_path"),
    "fit": ("input_path", "value_column", "window"),
}


def tool_version() -> str:
    try:
        from importlib.metadata import version

        base = version(TOOL_NAME)
    except Exception:
        base = "0.0.0"
    try:
        probe = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=os.path.dirname(os.path.abspath(__file__)),
            capture_output=True,
            text=True,
            timeout=10,
        )
        if probe.returncode == 0 and probe.stdout.strip():
            return f"{base}+g{probe.stdout.strip()}"
    except Exception:
        pass
    return base


def _parse_scalar(key: str, raw: str):
    raw = raw.strip()
    if key in _FLOAT_FIELDS:
        return float(raw)
    if key in _INT_FIELDS:
        return int(raw)
    if key in _BOOL_FIELDS:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"expected a boolean for {key}, got {raw!r}")
    if key in _TUPLE_FIELDS:
        return tuple(float(part) for part in raw.split(",") if part.strip())
    if key in _STR_FIELDS:
        return raw
    raise ValueError(f"unknown config key {key!r}")


def load_config_file(path: str) -> dict:
    """Read a config mapping from JSON (sidecar) or key = value text."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config file: {err}")

    try:
        blob = json.loads(text)
    except json.JSONDecodeError:
        blob = None
    if isinstance(blob, dict):
        data = blob.get("config", blob)
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: 'config' entry is not a mapping")
        out = {}
        for key, value in data.items():
            if key in _TUPLE_FIELDS:
                out[key] = tuple(value) if value is not None else None
            else:
                out[key] = value
        return out

    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key, raw = body.split("=", 1)
        key = key.strip()
        try:
            out[key] = _parse_scalar(key, raw)
        except ValueError as err:
            raise ConfigError(f"{path}:{lineno}: {err}")
    return out


def resolve_config(mode: str, file_values: dict, flag_values: dict) -> RunConfig:
    """Merge defaults, config-file values, and flags (flags win)."""
    merged = dict(file_values)
    for key, value in flag_values.items():
        if value is not None:
            merged[key] = value

    file_mode = merged.pop("mode", None)
    if file_mode is not None and file_mode != mode:
        raise ConfigError(
            f"config file is for mode {file_mode!r}, command line says {mode!r}"
        )

    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(merged) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    config = RunConfig(mode=mode, **merged)
    _validate(config)
    return config


def _validate(config: RunConfig) -> None:
    required = list(_REQUIRED[config.mode])
    if config.mode == "fiberloop" and not config.coherent:
        required += ["n_traj", "master_seed"]
    missing = [key for key in required if getattr(config, key) is None]
    if missing:
        raise ConfigError(
            f"mode {config.mode!r} is missing required settings: {', '.join(missing)}"
        )

    for key in ("J", "dt_kick", "J_e", "t_max"):
        value = getattr(config, key)
        if value is not None and value <= 0.0:
            raise ConfigError(f"{key} must be positive, got {value}")
    for key in ("m_max", "n_traj", "sample_stride", "n_samples"):
        value = getattr(config, key)
        if value is not None and value < 1:
            raise ConfigError(f"{key} must be at least 1, got {value}")
    if config.beta_frac is not None and not 0.0 < config.beta_frac < 1.0:
        raise ConfigError(f"beta_frac must lie in (0, 1), got {config.beta_frac}")
    if config.window is not None:
        if len(config.window) != 2 or config.window[0] >= config.window[1]:
            raise ConfigError("window must be 'lo,hi' with lo < hi")
    if config.snapshot_times:
        if min(config.snapshot_times) <= 0.0:
            raise ConfigError("snapshot times must be positive")
        if config.t_max is not None and max(config.snapshot_times) > config.t_max:
            raise ConfigError("snapshot times must not exceed t_max")


def write_csv(path: str, columns: dict, comments) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    table = np.column_stack([np.asarray(col, dtype=float) for col in columns.values()])
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns.keys()) + "\n")
        np.savetxt(fh, table, delimiter=",", fmt="%.17g")


def read_csv(path: str) -> dict:
    try:
        with open(path) as fh:
            lines = [line.rstrip("\n") for line in fh]
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err}")
    rows = [line for line in lines if line.strip() and not line.lstrip().startswith("#")]
    if not rows:
        raise ConfigError(f"{path} holds no data rows")
    names = [cell.strip() for cell in rows[0].split(",")]
    if len(rows) == 1:
        raise ConfigError(f"{path} has a header but no samples")
    data = np.array(
        [[float(cell) for cell in row.split(",")] for row in rows[1:]]
    )
    if data.shape[1] != len(names):
        raise ConfigError(f"{path}: rows do not match the header width")
    return {name: data[:, i] for i, name in enumerate(names)}


def _provenance(config: RunConfig) -> list:
    seed = config.master_seed if config.master_seed is not None else "none"
    return [f"{TOOL_NAME} {tool_version()} mode={config.mode} seed={seed}"]


def _sidecar_path(out_path: str) -> str:
    root, _ = os.path.splitext(out_path)
    return root + ".json"


def write_sidecar(config: RunConfig, n_invalid: int, flagged: bool) -> None:
    blob = {
        "tool": TOOL_NAME,
        "version": tool_version(),
        "mode": config.mode,
        "seed": config.master_seed,
        "n_invalid": n_invalid,
        "flagged": flagged,
        "config": config.as_dict(),
    }
    path = _sidecar_path(config.out_path)
    with open(path, "w") as fh:
        json.dump(blob, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _time_grid(config: RunConfig) -> np.ndarray:
    step = config.t_max / config.n_samples
    return np.linspace(step, config.t_max, config.n_samples)


def run_coherent(config: RunConfig) -> tuple:
    times = _time_grid(config)
    dt = float(times[0])
    kernel = make_kernel(config.J, dt)
    radius = coherent_radius(config.J, config.t_max)
    monitor = TruncationMonitor()
    psi = AmplitudeField.delta(radius)
    mean = np.zeros(times.size)
    second = np.zeros(times.size)
    for i in range(times.size):
        psi = propagate(psi, kernel)
        P = probability_of(psi)
        monitor.check_1d(P.values)
        mean[i] = mean_position(P)
        second[i] = variance(P)
    columns = {
        "t": times,
        "mean_n": mean,
        "n2": second,
        "theory_n2": 2.0 * (config.J * times) ** 2,
    }
    write_csv(config.out_path, columns, _provenance(config))
    return 0, monitor.tripped


def run_dephased(config: RunConfig) -> tuple:
    schedule = KickSchedule(config.dt_kick, config.t_max, config.sample_stride)
    policy = SeedPolicy(config.master_seed)
    acc = run_ensemble(
        config.J,
        schedule,
        config.n_traj,
        policy,
        n_workers=_workers(),
    )
    J_e = config.J**2 * config.dt_kick
    times = acc.times
    columns = {
        "t": times,
        "mean_n2": acc.mean_n2,
        "mean_n2_stderr": acc.stderr_n2,
        "mean_com2": acc.mean_com2,
        "mean_com2_stderr": acc.stderr_com2,
        "theory_n2": 2.0 * J_e * times,
        "theory_com2": CREEP_PREFACTOR * np.sqrt(J_e * times),
    }
    write_csv(config.out_path, columns, _provenance(config))
    return acc.n_invalid, False


def run_master1d(config: RunConfig) -> tuple:
    times = _time_grid(config)
    mconf = MasterConfig(J_e=config.J_e, dt_ode=0.05 / config.J_e, t_max=config.t_max)
    monitor = TruncationMonitor()
    fields = evolve_master(mconf, times, monitor=monitor)
    second = np.array([variance(P) for P in fields])
    mass = np.array([P.total() for P in fields])
    columns = {
        "t": times,
        "n2": second,
        "theory_n2": 2.0 * config.J_e * times,
        "total_mass": mass,
    }
    write_csv(config.out_path, columns, _provenance(config))
    return 0, monitor.tripped


def run_corr2d(config: RunConfig) -> tuple:
    times = _time_grid(config)
    wanted = np.unique(np.concatenate([times, np.asarray(config.snapshot_times)]))
    monitor = TruncationMonitor()
    grids = evolve_correlation(config.J_e, wanted, monitor=monitor)
    by_time = dict(zip(wanted.tolist(), grids))

    msd = np.array([msd_from_correlation(by_time[t]) for t in times.tolist()])
    mass = np.array([by_time[t].total() for t in times.tolist()])
    columns = {
        "t": times,
        "com2": msd,
        "theory_com2": CREEP_PREFACTOR * np.sqrt(config.J_e * times),
        "total_mass": mass,
    }
    write_csv(config.out_path, columns, _provenance(config))

    root, _ = os.path.splitext(config.out_path)
    for t in config.snapshot_times:
        tag = f"{t:g}".replace(".", "p").replace("-", "m")
        snap_path = f"{root}_snap_t{tag}.csv"
        comments = _provenance(config) + [f"snapshot at t={t:g}"]
        export_snapshot_csv(by_time[float(t)], snap_path, comments=comments)
    return 0, monitor.tripped


def run_fiberloop(config: RunConfig) -> tuple:
    beta = config.beta_frac * math.pi / 2.0
    J, _, J_e = loop_correspondence(beta)
    if config.coherent:
        steps, com, second = run_loop_coherent(
            beta, config.m_max, sample_stride=config.sample_stride
        )
        columns = {
            "m": steps,
            "mean_n": com,
            "n2": second,
            "var": second - com**2,
            "theory_var": 2.0 * (J * steps) ** 2,
        }
        write_csv(config.out_path, columns, _provenance(config))
        return 0, False

    policy = SeedPolicy(config.master_seed)
    acc = run_loop_ensemble(
        beta,
        config.m_max,
        config.n_traj,
        policy,
        n_workers=_workers(),
        sample_stride=config.sample_stride,
    )
    steps = acc.times
    columns = {
        "m": steps,
        "mean_n2": acc.mean_n2,
        "mean_n2_stderr": acc.stderr_n2,
        "mean_com2": acc.mean_com2,
        "mean_com2_stderr": acc.stderr_com2,
        "theory_n2": 2.0 * J_e * steps,
        "theory_com2": CREEP_PREFACTOR * np.sqrt(J_e * steps),
    }
    write_csv(config.out_path, columns, _provenance(config))
    return acc.n_invalid, False


def run_fit(config: RunConfig) -> tuple:
    table = read_csv(config.input_path)
    for name in (config.time_column, config.value_column):
        if name not in table:
            raise ConfigError(
                f"{config.input_path} has no column {name!r}; "
                f"available: {', '.join(table)}"
            )
    series = SpreadingSeries(
        table[config.time_column], table[config.value_column], config.value_column
    )
    try:
        fit = fit_power_law(series, config.window[0], config.window[1])
    except ValueError as err:
        raise ConfigError(str(err))
    report = {
        "tool": TOOL_NAME,
        "version": tool_version(),
        "input": config.input_path,
        "time_column": config.time_column,
        "value_column": config.value_column,
        "fit": fit.record(),
    }
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if config.out_path:
        parent = os.path.dirname(os.path.abspath(config.out_path))
        os.makedirs(parent, exist_ok=True)
        with open(config.out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0, False


_RUNNERS = {
    "coherent": run_coherent,
    "dephased": run_dephased,
    "master1d": run_master1d,
    "corr2d": run_corr2d,
    "fiberloop": run_fiberloop,
    "fit": run_fit,
}

_THREADS = None


def _workers() -> int:
    return _THREADS if _THREADS is not None else 1


def _default_threads() -> int:
    env = os.environ.get("DEPHASE_WALK_THREADS")
    if env is not None:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"DEPHASE_WALK_THREADS must be an integer, got {env!r}")
        if value < 1:
            raise ConfigError("DEPHASE_WALK_THREADS must be at least 1")
        return value
    return os.cpu_count() or 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=TOOL_NAME, description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=tool_version())
    sub = parser.add_subparsers(dest="mode", required=True)

    def common(p):
        p.add_argument("--config", help="key = value file or a JSON sidecar")
        p.add_argument("--out", dest="out_path", help="output CSV path")
        p.add_argument("--threads", type=int, default=None,
                       help="worker processes (default: DEPHASE_WALK_THREADS or all cores)")
        p.add_argument("--allow-flagged", action="store_true",
                       help="exit 0 even if the truncation monitor tripped")

    p = sub.add_parser("coherent", help="unitary walk from a single site")
    common(p)
    p.add_argument("--J", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--n-samples", dest="n_samples", type=int)

    p = sub.add_parser("dephased", help="phase-kicked ensemble, continuous-time walk")
    common(p)
    p.add_argument("--J", type=float)
    p.add_argument("--dt-kick", dest="dt_kick", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--n-traj", dest="n_traj", type=int)
    p.add_argument("--seed", dest="master_seed", type=int)
    p.add_argument("--sample-stride", dest="sample_stride", type=int)

    p = sub.add_parser("master1d", help="classical hopping profile (exact ensemble limit)")
    common(p)
    p.add_argument("--Je", dest="J_e", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--n-samples", dest="n_samples", type=int)

    p = sub.add_parser("corr2d", help="two-point correlation grid and its creep moment")
    common(p)
    p.add_argument("--Je", dest="J_e", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--snapshot-times", dest="snapshot_times",
                   type=lambda raw: tuple(float(x) for x in raw.split(",") if x.strip()))

    p = sub.add_parser("fiberloop", help="two-loop pulse walk, coherent or dephased")
    common(p)
    p.add_argument("--beta-frac", dest="beta_frac", type=float,
                   help="coupler angle as a fraction of pi/2")
    p.add_argument("--m-max", dest="m_max", type=int)
    p.add_argument("--n-traj", dest="n_traj", type=int)
    p.add_argument("--seed", dest="master_seed", type=int)
    p.add_argument("--sample-stride", dest="sample_stride", type=int)
    p.add_argument("--coherent", action="store_const", const=True, default=None,
                   help="single deterministic run without phase noise")

    p = sub.add_parser("fit", help="power-law fit of a CSV column")
    common(p)
    p.add_argument("--input", dest="input_path")
    p.add_argument("--column", dest="value_column")
    p.add_argument("--time-column", dest="time_column")
    p.add_argument("--window",
                   type=lambda raw: tuple(float(x) for x in raw.split(",") if x.strip()))

    return parser


_CONFIG_KEYS = tuple(f.name for f in dataclasses.fields(RunConfig) if f.name != "mode")


def main(argv=None) -> int:
    global _THREADS
    try:
        args = build_parser().parse_args(argv)
        file_values = load_config_file(args.config) if args.config else {}
        flag_values = {
            key: getattr(args, key) for key in _CONFIG_KEYS if hasattr(args, key)
        }
        config = resolve_config(args.mode, file_values, flag_values)
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        _THREADS = args.threads if args.threads is not None else _default_threads()
    except ConfigError as err:
        print(f"{TOOL_NAME}: error: {err}", file=sys.stderr)
        return 1

    try:
        n_invalid, tripped = _RUNNERS[config.mode](config)
    except ConfigError as err:
        print(f"{TOOL_NAME}: error: {err}", file=sys.stderr)
        return 1
    except ValueError as err:
        print(f"{TOOL_NAME}: error: {err}", file=sys.stderr)
        return 1
    except InvalidRunError as err:
        print(f"{TOOL_NAME}: flagged run: {err}", file=sys.stderr)
        return 2

    if config.mode != "fit":
        write_sidecar(config, n_invalid, tripped)
    if tripped and not args.allow_flagged:
        print(
            f"{TOOL_NAME}: flagged run: truncation monitor tripped "
            "(rerun with --allow-flagged to accept)",
            file=sys.stderr,
        )
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
