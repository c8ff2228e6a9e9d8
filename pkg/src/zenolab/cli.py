"""Command-line front end.

Every subcommand reads a JSON config (``--config``), validates all of it
before computing anything, and writes CSV or JSON (``--out``; stdout when
omitted).  CSV files start with ``#`` lines carrying the schema version,
the command and the parameters as used, then a column header row.

Exit codes: 0 ok, 1 acceptance failure, 2 configuration error, 3 numerical
or model error.
"""

from __future__ import annotations

import argparse
import copy
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .errors import ConfigurationError, InvalidInputError, ZenoLabError
from .qdyn import OperatorMatrix, StateVector, survival_series
from .tolerances import DEFAULT_TOLERANCES

__all__ = ["main", "SCHEMA_VERSION", "EXIT_OK", "EXIT_ACCEPTANCE", "EXIT_CONFIG", "EXIT_NUMERIC"]

SCHEMA_VERSION = 1
EXIT_OK, EXIT_ACCEPTANCE, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
WORKERS_ENV = "ZENOLAB_WORKERS"
REQUIRED = object()
COMMON_KEYS = {"output", "seed"}


class ConfigError(ConfigurationError):
    pass


@dataclass
class Table:
    columns: list[str]
    rows: list[tuple]
    extra: dict[str, Any] = field(default_factory=dict)


# ---------------------------------------------------------------- parsing


def _number(key: str, value, positive=False, nonneg=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{key}: must be finite")
    if positive and value <= 0:
        raise ConfigError(f"{key}: must be > 0, got {value!r}")
    if nonneg and value < 0:
        raise ConfigError(f"{key}: must be >= 0, got {value!r}")
    return value


def _integer(key: str, value, minimum=1) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{key}: must be >= {minimum}, got {value!r}")
    return value


def _complex(key: str, value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"{key}: complex entries are [re, im] pairs")
        return complex(_number(f"{key}.re", value[0]), _number(f"{key}.im", value[1]))
    return complex(_number(key, value))


def _as_pair(z: complex) -> list[float]:
    return [z.real, z.imag]


def _matrix(key: str, value) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ConfigError(f"{key}: expected a non-empty list of rows")
    n = len(value)
    if any(len(r) != n for r in value):
        raise ConfigError(f"{key}: matrix must be square ({n} rows)")
    return np.array([[_complex(f"{key}[{i}][{j}]", v) for j, v in enumerate(r)] for i, r in enumerate(value)])


def _times(key: str, value, allow_auto=False):
    if allow_auto and value == "auto":
        return "auto"
    if isinstance(value, dict):
        extra = set(value) - {"start", "stop", "num"}
        if extra:
            raise ConfigError(f"{key}: unknown keys {sorted(extra)}")
        try:
            start = _number(f"{key}.start", value.get("start", 0.0), nonneg=True)
            stop = _number(f"{key}.stop", value["stop"], nonneg=True)
            num = _integer(f"{key}.num", value["num"])
        except KeyError as exc:
            raise ConfigError(f"{key}: missing {exc.args[0]!r}") from None
        if num > 1 and stop <= start:
            raise ConfigError(f"{key}: stop must exceed start")
        grid = np.linspace(start, stop, num)
    elif isinstance(value, list) and value:
        grid = np.array([_number(f"{key}[{i}]", v, nonneg=True) for i, v in enumerate(value)])
    else:
        raise ConfigError(f"{key}: expected a non-empty list or {{start, stop, num}}")
    if np.any(np.diff(grid) <= 0):
        raise ConfigError(f"{key}: times must be strictly increasing")
    return grid


def _echo_times(grid) -> Any:
    return grid if isinstance(grid, str) else [float(t) for t in grid]


def _form_factor(key: str, value):
    from .resolvent import FormFactor

    try:
        return FormFactor.from_dict(value)
    except InvalidInputError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def _check_keys(command: str, cfg: dict, allowed: set[str]):
    if not isinstance(cfg, dict):
        raise ConfigError(f"{command}: config must be a JSON object")
    unknown = set(cfg) - allowed - COMMON_KEYS
    if unknown:
        raise ConfigError(f"{command}: unknown config keys {sorted(unknown)}")


def _get(cfg: dict, key: str, default=REQUIRED):
    if key in cfg:
        return cfg[key]
    if default is REQUIRED:
        raise ConfigError(f"missing required key {key!r}")
    return default


# ---------------------------------------------------------------- commands
# each command is split into parse (validate, return params + runner) and run


@dataclass
class Prepared:
    params: dict[str, Any]
    run: Callable[[], Table]


def _state_or_default(cfg, dim):
    if "psi0" not in cfg:
        return StateVector.basis(dim, 0), [[1.0, 0.0]] + [[0.0, 0.0]] * (dim - 1)
    raw = cfg["psi0"]
    if not isinstance(raw, list) or len(raw) != dim:
        raise ConfigError(f"psi0: expected {dim} entries")
    comps = np.array([_complex(f"psi0[{i}]", v) for i, v in enumerate(raw)])
    psi = StateVector(comps)
    if not psi.is_normalized(DEFAULT_TOLERANCES):
        raise ConfigError(f"psi0: must be unit-norm (norm^2 = {psi.norm2!r})")
    return psi, [_as_pair(c) for c in comps]


def _hamiltonian(cfg) -> tuple[OperatorMatrix, list]:
    mat = _matrix("hamiltonian", _get(cfg, "hamiltonian"))
    try:
        h = OperatorMatrix(mat)
    except InvalidInputError as exc:
        raise ConfigError(f"hamiltonian: {exc}") from None
    return h, [[_as_pair(v) for v in row] for row in mat]


def prepare_survival(cfg: dict) -> Prepared:
    _check_keys("survival", cfg, {"hamiltonian", "psi0", "times"})
    h, h_echo = _hamiltonian(cfg)
    psi, psi_echo = _state_or_default(cfg, h.dim)
    times = _times("times", _get(cfg, "times"))
    params = {"hamiltonian": h_echo, "psi0": psi_echo, "times": _echo_times(times)}

    def run():
        amp, p = survival_series(h, psi, times)
        return Table(["t", "re_A", "im_A", "p"], [(t, a.real, a.imag, q) for t, a, q in zip(times, amp, p)])

    return Prepared(params, run)


def prepare_pulsed(cfg: dict) -> Prepared:
    from .measurement import PulseSchedule, pulsed_survival
    from .qdyn import pauli

    _check_keys("pulsed", cfg, {"hamiltonian", "omega", "psi0", "times", "n_list"})
    if "hamiltonian" in cfg and "omega" in cfg:
        raise ConfigError("pulsed: give either 'hamiltonian' or 'omega', not both")
    if "hamiltonian" in cfg:
        h, h_echo = _hamiltonian(cfg)
        if not h.hermitian:
            raise ConfigError("hamiltonian: pulsed measurements need a Hermitian matrix")
        params = {"hamiltonian": h_echo}
    else:
        omega = _number("omega", cfg.get("omega", 1.0), positive=True)
        h = pauli(1, omega)
        params = {"omega": omega}
    psi, psi_echo = _state_or_default(cfg, h.dim)
    times = _times("times", _get(cfg, "times"))
    raw_n = _get(cfg, "n_list")
    if not isinstance(raw_n, list) or not raw_n:
        raise ConfigError("n_list: expected a non-empty list of pulse counts")
    n_list = [_integer(f"n_list[{i}]", n) for i, n in enumerate(raw_n)]
    params.update({"psi0": psi_echo, "times": _echo_times(times), "n_list": n_list})

    def run():
        rows = []
        for n in n_list:
            for t in times:
                sched = PulseSchedule(float(t), n)
                rows.append((n, float(t), sched.tau, pulsed_survival(h, psi, sched)))
        return Table(["N", "t", "tau", "p"], rows)

    return Prepared(params, run)


def prepare_continuous(cfg: dict) -> Prepared:
    from .errors import RegimeWarning
    from .measurement import TwoLevelAbsorptive, absorptive_amplitude, effective_rate_continuous, slow_pole_term

    _check_keys("continuous", cfg, {"omega", "v", "times"})
    omega = _number("omega", cfg.get("omega", 1.0), positive=True)
    v = _number("v", _get(cfg, "v"), nonneg=True)
    times = _times("times", _get(cfg, "times"))
    sys_ = TwoLevelAbsorptive(omega, v)
    params = {"omega": omega, "v": v, "times": _echo_times(times)}

    def run():
        amp = absorptive_amplitude(sys_, times)
        slow = slow_pole_term(sys_, times)
        extra = {}
        if v > omega:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RegimeWarning)
                rate = effective_rate_continuous(sys_)
            extra["rate"] = {"asymptotic": rate.asymptotic, "exact": rate.exact}
        rows = [(t, a.real, a.imag, abs(a) ** 2, abs(s) ** 2) for t, a, s in zip(times, amp, slow)]
        return Table(["t", "re_A", "im_A", "p", "p_slow"], rows, extra)

    return Prepared(params, run)


def prepare_fieldsim(cfg: dict) -> Prepared:
    from .continuum import FieldModel, _check_resolution, memory_kernel_check, reduced_dynamics, simulate_field

    keys = {"omega", "gamma", "half_width", "n_modes", "dt", "total_time", "sample_every", "memory_check"}
    _check_keys("fieldsim", cfg, keys)
    omega = _number("omega", _get(cfg, "omega"), nonneg=True)
    gamma = _number("gamma", _get(cfg, "gamma"), nonneg=True)
    half_width = _number("half_width", _get(cfg, "half_width"), positive=True)
    n_modes = _integer("n_modes", _get(cfg, "n_modes"), minimum=2)
    dt = _number("dt", _get(cfg, "dt"), positive=True)
    total = _number("total_time", _get(cfg, "total_time"), positive=True)
    every = _integer("sample_every", cfg.get("sample_every", 100))
    check = cfg.get("memory_check", False)
    if not isinstance(check, bool):
        raise ConfigError("memory_check: expected true or false")
    model = FieldModel(omega, gamma, half_width, n_modes, dt)
    _check_resolution(model)
    if check and every % 2:
        raise ConfigError("sample_every: must be even when memory_check is on")
    params = {
        "omega": omega, "gamma": gamma, "half_width": half_width, "n_modes": n_modes,
        "dt": dt, "total_time": total, "sample_every": every, "memory_check": check,
    }

    def run():
        series = simulate_field(model, total, every)
        ts = series.sample_times
        xr, yr = reduced_dynamics(omega, gamma, ts)
        rows = [row + (a.real, a.imag, b.real, b.imag) for row, a, b in zip(series.rows(), xr, yr)]
        extra = {}
        if check:
            extra["memory_kernel_residual"] = memory_kernel_check(model, series).residual
        cols = ["t", "re_x", "im_x", "re_y", "im_y", "norm2", "re_x_reduced", "im_x_reduced", "re_y_reduced", "im_y_reduced"]
        return Table(cols, rows, extra)

    return Prepared(params, run)


def prepare_selfenergy(cfg: dict) -> Prepared:
    from .resolvent import Sheet, self_energy

    _check_keys("selfenergy", cfg, {"form_factor", "points", "sheet"})
    ff = _form_factor("form_factor", _get(cfg, "form_factor"))
    raw = _get(cfg, "points")
    if not isinstance(raw, list) or not raw:
        raise ConfigError("points: expected a non-empty list of energies")
    points = [_complex(f"points[{i}]", p) for i, p in enumerate(raw)]
    sheet_name = cfg.get("sheet", "first")
    try:
        sheet = Sheet(sheet_name)
    except ValueError:
        raise ConfigError(f"sheet: expected 'first' or 'second', got {sheet_name!r}") from None
    params = {"form_factor": ff.to_dict(), "points": [_as_pair(p) for p in points], "sheet": sheet.value}

    def run():
        rows = []
        for e in points:
            s = self_energy(ff, e, sheet).value
            rows.append((e.real, e.imag, s.real, s.imag))
        return Table(["re_E", "im_E", "re_sigma", "im_sigma"], rows)

    return Prepared(params, run)


def _model_block(cfg):
    ff = _form_factor("form_factor", _get(cfg, "form_factor"))
    omega0 = _number("omega0", _get(cfg, "omega0"))
    return ff, omega0


def prepare_pole(cfg: dict) -> Prepared:
    from .resolvent import find_pole, golden_rule, zeno_time_continuum

    _check_keys("pole", cfg, {"form_factor", "omega0"})
    ff, omega0 = _model_block(cfg)
    params = {"form_factor": ff.to_dict(), "omega0": omega0}

    def run():
        pole = find_pole(ff, omega0)
        gr = golden_rule(ff, omega0)
        tz = zeno_time_continuum(ff).tau_z
        cols = ["re_E", "im_E", "delta_omega0", "gamma", "z", "golden_rule", "zeno_time", "residual"]
        row = (pole.e_pole.real, pole.e_pole.imag, pole.delta_omega0, pole.gamma, pole.z, gr, tz, pole.residual)
        return Table(cols, [row], {"pole": pole.to_dict(), "golden_rule": gr, "zeno_time": tz})

    return Prepared(params, run)


def _series_table(series) -> Table:
    return Table(series.columns(), list(series.rows()))


def _inversion_setup(cfg, command):
    _check_keys(command, cfg, {"form_factor", "omega0", "times", "decompose"})
    ff, omega0 = _model_block(cfg)
    times = _times("times", cfg.get("times", "auto"), allow_auto=True)
    dec = cfg.get("decompose", True)
    if not isinstance(dec, bool):
        raise ConfigError("decompose: expected true or false")
    params = {"form_factor": ff.to_dict(), "omega0": omega0, "times": _echo_times(times), "decompose": dec}
    return ff, omega0, times, dec, params


def _compute_series(ff, omega0, times, dec):
    from .inversion import decompose, regime_time_grid, spectral_density, survival_from_spectrum
    from .resolvent import find_pole

    sd = spectral_density(ff, omega0)
    pole = find_pole(ff, omega0) if (dec or isinstance(times, str)) else None
    grid = regime_time_grid(sd, pole) if isinstance(times, str) else times
    return decompose(sd, pole, grid) if dec else survival_from_spectrum(sd, grid)


def prepare_invert(cfg: dict) -> Prepared:
    ff, omega0, times, dec, params = _inversion_setup(cfg, "invert")
    return Prepared(params, lambda: _series_table(_compute_series(ff, omega0, times, dec)))


def prepare_regimes(cfg: dict) -> Prepared:
    from .inversion import fit_regimes

    ff, omega0, times, dec, params = _inversion_setup(cfg, "regimes")
    if not dec:
        raise ConfigError("decompose: regime fitting needs the pole/cut decomposition")

    def run():
        series = _compute_series(ff, omega0, times, True)
        fit = fit_regimes(series)
        table = _series_table(series)
        table.extra["regime_fit"] = fit.to_dict()
        return table

    return Prepared(params, run)


PREPARERS: dict[str, Callable[[dict], Prepared]] = {
    "survival": prepare_survival,
    "pulsed": prepare_pulsed,
    "continuous": prepare_continuous,
    "fieldsim": prepare_fieldsim,
    "selfenergy": prepare_selfenergy,
    "pole": prepare_pole,
    "invert": prepare_invert,
    "regimes": prepare_regimes,
}


def _set_path(cfg: dict, dotted: str, value):
    parts = dotted.split(".")
    node = cfg
    for p in parts[:-1]:
        if not isinstance(node.get(p), dict):
            raise ConfigError(f"parameter: {dotted!r} does not name a nested field of the base config")
        node = node[p]
    node[parts[-1]] = value


def resolve_workers(requested: int | None) -> tuple[int, str]:
    """Worker count and where it came from; the environment wins."""
    env = os.environ.get(WORKERS_ENV)
    if env is not None:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV}: expected an integer, got {env!r}") from None
        if n < 1:
            raise ConfigError(f"{WORKERS_ENV}: must be >= 1")
        return n, "env"
    if requested is not None:
        return requested, "config"
    return 1, "default"


def prepare_sweep(cfg: dict, cli_workers: int | None = None) -> tuple[Prepared, int, str]:
    _check_keys("sweep", cfg, {"command", "parameter", "values", "base", "workers"})
    command = _get(cfg, "command")
    if command not in PREPARERS:
        raise ConfigError(f"command: must be one of {sorted(PREPARERS)}, got {command!r}")
    parameter = _get(cfg, "parameter")
    if not isinstance(parameter, str) or not parameter:
        raise ConfigError("parameter: expected a (dotted) config key")
    values = _get(cfg, "values")
    if isinstance(values, dict):
        values = [float(v) for v in _times("values", values)]
    if not isinstance(values, list) or not values:
        raise ConfigError("values: expected a non-empty list")
    base = _get(cfg, "base", {})
    if not isinstance(base, dict):
        raise ConfigError("base: expected an object")
    workers = cli_workers if cli_workers is not None else cfg.get("workers")
    if workers is not None:
        workers = _integer("workers", workers)
    workers, source = resolve_workers(workers)

    points = []
    for i, v in enumerate(values):
        point = copy.deepcopy(base)
        _set_path(point, parameter, v)
        try:
            points.append(PREPARERS[command](point))
        except ConfigError as exc:
            raise ConfigError(f"values[{i}]: {exc}") from None
    params = {
        "command": command, "parameter": parameter, "values": values,
        "base": base, "points": [p.params for p in points],
    }

    def run():
        with ThreadPoolExecutor(max_workers=workers) as pool:
            tables = list(pool.map(lambda p: p.run(), points))
        columns = ["sweep_index", "sweep_value"] + tables[0].columns
        rows, extras = [], []
        for i, (v, t) in enumerate(zip(values, tables)):
            rows.extend((i, v) + tuple(r) for r in t.rows)
            extras.append(t.extra)
        extra = {"point_extras": extras} if any(extras) else {}
        return Table(columns, rows, extra)

    return Prepared(params, run), workers, source


# ---------------------------------------------------------------- output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, str):
        return v
    return json.dumps(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, allow_nan=False)


def render_csv(command: str, params: dict, table: Table, meta: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION}\n")
    buf.write(f"# command={command}\n")
    buf.write(f"# params={_dumps(params)}\n")
    for k, v in sorted((meta or {}).items()):
        buf.write(f"# {k}={_dumps(v)}\n")
    for k, v in sorted(table.extra.items()):
        if k != "regime_fit":
            buf.write(f"# {k}={_dumps(v)}\n")
    buf.write(",".join(table.columns) + "\n")
    for row in table.rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def render_json(command: str, params: dict, table: Table, meta: dict | None = None) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "params": params,
        "columns": table.columns,
        "rows": [list(r) for r in table.rows],
        **(meta or {}),
        **table.extra,
    }
    return _dumps(doc) + "\n"


def _output_target(cfg: dict, out_arg: str | None) -> tuple[Path | None, str]:
    out = cfg.get("output", {})
    if not isinstance(out, dict) or set(out) - {"path", "format"}:
        raise ConfigError("output: expected an object with optional 'path' and 'format'")
    path = out_arg if out_arg is not None else out.get("path")
    fmt = out.get("format")
    if fmt is None:
        fmt = "json" if path is not None and str(path).endswith(".json") else "csv"
    if fmt not in ("csv", "json"):
        raise ConfigError(f"output.format: expected 'csv' or 'json', got {fmt!r}")
    return (Path(path) if path is not None else None), fmt


def _write(path: Path | None, text: str):
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _fit_path(path: Path) -> Path:
    return path.with_name(path.stem + ".fit.json")


# ---------------------------------------------------------------- entry point


def _parse_scales(items: list[str]) -> dict[int, float]:
    scales = {}
    for item in items or []:
        try:
            k, v = item.split("=", 1)
            scales[int(k)] = float(v)
        except ValueError:
            raise ConfigError(f"--tolerance-scale: expected ID=FACTOR, got {item!r}") from None
    return scales


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zenolab", description="Survival, Zeno-effect and decay-law computations.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in [*PREPARERS, "sweep"]:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", help="output file (default stdout)")
        if name == "sweep":
            p.add_argument("--workers", type=int, help=f"parallel sweep points (overridden by ${WORKERS_ENV})")
    acc = sub.add_parser("acceptance")
    acc.add_argument("--only", type=int, nargs="+", help="criterion ids to run")
    acc.add_argument("--tolerance-scale", action="append", metavar="ID=FACTOR", help="scale a criterion tolerance")
    acc.add_argument("--out", help="also write the report as JSON")
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"--config: cannot read {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--config: invalid JSON ({exc})") from None
    if not isinstance(cfg, dict):
        raise ConfigError("--config: top level must be a JSON object")
    return cfg


def _run_acceptance(args) -> int:
    from .acceptance import format_report, run_acceptance

    scales = _parse_scales(args.tolerance_scale)
    try:
        results = run_acceptance(args.only, scales)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    print(format_report(results))
    if args.out:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "results": [
                {"id": r.id, "name": r.name, "measured": r.measured, "tolerance": r.tolerance,
                 "passed": r.passed, "runtime": r.runtime, "budget": r.budget, "detail": r.detail}
                for r in results
            ],
        }
        _write(Path(args.out), _dumps(doc) + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_ACCEPTANCE


def _run_command(args) -> int:
    cfg = _load_config(args.config)
    cfg_body = {k: v for k, v in cfg.items() if k != "output"}
    path, fmt = _output_target(cfg, args.out)
    meta = {}
    if args.command == "sweep":
        prepared, workers, source = prepare_sweep(cfg_body, args.workers)
        meta["workers"] = workers
        if source == "env":
            print(f"zenolab: {WORKERS_ENV}={workers} overrides the configured worker count", file=sys.stderr)
    else:
        prepared = PREPARERS[args.command](cfg_body)
    if args.command == "regimes" and path is None:
        raise ConfigError("regimes: an output path is required (the fit is written next to it)")
    if "seed" in cfg:
        prepared.params["seed"] = _integer("seed", cfg["seed"], minimum=0)
    table = prepared.run()
    render = render_json if fmt == "json" else render_csv
    _write(path, render(args.command, prepared.params, table, meta))
    if args.command == "regimes":
        fit_doc = {"schema_version": SCHEMA_VERSION, "params": prepared.params, **table.extra["regime_fit"]}
        _write(_fit_path(path), _dumps(fit_doc) + "\n")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_CONFIG
    try:
        if args.command == "acceptance":
            return _run_acceptance(args)
        return _run_command(args)
    except (ConfigurationError, InvalidInputError) as exc:
        print(f"zenolab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ZenoLabError as exc:
        print(f"zenolab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
