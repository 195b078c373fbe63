"""Command-line interface: spectrum, wavefunction, verify and oracle tables."""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from dataclasses import dataclass

from .errors import (
    ComplexEnergy,
    InvalidParameter,
    NonNormalizable,
    NoPositiveCosine,
    OracleError,
    StateConstructionError,
    SupercriticalCoupling,
)
from .model import MINUS, PLUS, ChannelSpec, ModelParams, parse_sign, sign_str, validate
from .oracle import FdGrid, self_consistent_epsilon
from .rotation import solve_rotation
from .spectrum import energy_level
from .verify import config_report
from .wavefunction import COLUMNS as WAVE_COLUMNS
from .wavefunction import check_radii, make_bound_state, sample_grid

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_SUPERCRITICAL, EXIT_STATE, EXIT_ORACLE = range(6)

DEFAULTS = {
    "z": -1.0,
    "mu": 0.1,
    "lambda": 0.1,
    "kappa": [-2, -1, 1, 2],
    "branch": "both",
    "n_max": 2,
    "format": "csv",
    "output": "-",
    "pairing": "auto",
    # wavefunction: the kappa = -1 lowest state is constructible at the defaults
    "wave_kappa": [-1],
    "wave_branch": "-",
    "n": 0,
    "component": "+",
    "sign": "+",
    "r_min": None,
    "r_max": None,
    "points": 200,
    "spacing": "log",
    "skip_oracle": False,
    "grid_points": 2000,
    "r_max_grid": None,
}

SPECTRUM_COLUMNS = (
    "kappa", "component", "branch", "sign_branch", "n", "ell_eff", "N",
    "epsilon", "E_equiv", "q_eff", "binding",
)
ORACLE_COLUMNS = (
    "kappa", "component", "branch", "sign_branch", "n", "Z", "mu", "lambda",
    "epsilon_analytic", "epsilon_oracle", "abs_delta", "grid_estimate", "status",
)


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    channels: tuple[ChannelSpec, ...]
    kappas: tuple[int, ...]
    branches: tuple[int, ...]
    n_max: int
    output: str
    format: str
    oracle_grid: FdGrid | None
    options: dict


# -- argument handling -------------------------------------------------------


def _common(parser):
    parser.add_argument("--z", type=float, help="charge Z (signed; attraction needs Z eps + mu < 0)")
    parser.add_argument("--mu", type=float, help="mass scale mu")
    parser.add_argument("--lambda", dest="lambda", type=float, help="Compton wavelength, > 0")
    parser.add_argument("--kappa", type=int, action="append", help="spin-orbit number (repeatable)")
    parser.add_argument("--branch", choices=("+", "-", "both"), help="constraint branch")
    parser.add_argument("--n-max", dest="n_max", type=int, help="largest radial index")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--output", help="output path ('-' for stdout)")
    parser.add_argument("--config", help="JSON file with the same keys; flags take precedence")
    parser.add_argument("--pairing", choices=("auto", "same", "offset"),
                        help="partner-index convention for two-component states")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdmdirac",
        description="Dirac-Coulomb bound states with a singular position-dependent mass.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="closed-form energy table")
    _common(p)

    p = sub.add_parser("wavefunction", help="sample radial components of one state")
    _common(p)
    p.add_argument("--n", type=int, help="radial index of the solved component")
    p.add_argument("--component", choices=("+", "-", "both"), help="solved component")
    p.add_argument("--sign", choices=("+", "-"), help="sign branch of the energy")
    p.add_argument("--r-min", dest="r_min", type=float)
    p.add_argument("--r-max", dest="r_max", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--spacing", choices=("linear", "log"))

    p = sub.add_parser("verify", help="run every check and report pass/fail")
    _common(p)
    p.add_argument("--skip-oracle", dest="skip_oracle", action="store_true", default=None)
    p.add_argument("--grid-points", dest="grid_points", type=int)

    p = sub.add_parser("oracle", help="finite-difference cross-check of the spectrum")
    _common(p)
    p.add_argument("--grid-points", dest="grid_points", type=int)
    p.add_argument("--r-max-grid", "--r-max", dest="r_max_grid", type=float)
    return parser


def _load_config(path):
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _merge(args, command) -> dict:
    """Flags win over the config file, which wins over the defaults."""
    config = _load_config(args.config)
    merged = dict(DEFAULTS)
    if command == "wavefunction":
        merged["kappa"], merged["branch"] = DEFAULTS["wave_kappa"], DEFAULTS["wave_branch"]
    for key, value in config.items():
        merged[key] = value
    for key, value in vars(args).items():
        if value is not None and key not in ("command", "config"):
            merged[key] = value
    return merged


def _branches(value) -> tuple[int, ...]:
    if value == "both":
        return (PLUS, MINUS)
    return (parse_sign(value),)


def make_config(args, command) -> RunConfig:
    o = _merge(args, command)
    params = ModelParams(_number(o["z"], "z"), _number(o["mu"], "mu"),
                         _number(o["lambda"], "lambda"))
    kappas = o["kappa"] if isinstance(o["kappa"], list) else [o["kappa"]]
    if not kappas:
        raise InvalidParameter("at least one kappa is required")
    branches = _branches(o["branch"])
    channels = tuple(ChannelSpec(k, b) for k in kappas for b in branches)
    n_max = o["n_max"]
    if isinstance(n_max, bool) or not isinstance(n_max, int) or n_max < 0:
        raise InvalidParameter(f"n_max must be a nonnegative integer, got {n_max!r}")
    if o["format"] not in ("csv", "json"):
        raise InvalidParameter(f"format must be csv or json, got {o['format']!r}")
    grid = None
    if command == "oracle" and o.get("r_max_grid") is not None:
        grid = FdGrid(float(o["r_max_grid"]), int(o["grid_points"]))
    return RunConfig(params, channels, tuple(int(k) for k in kappas), branches, n_max,
                     o["output"], o["format"], grid, o)


def _number(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidParameter(f"{name} must be a number, got {value!r}")
    return float(value)


# -- formatting --------------------------------------------------------------


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def _csv_text(columns, rows, comment=None) -> str:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _json_text(payload) -> str:
    def clean(obj):
        if isinstance(obj, dict):
            return {k: clean(v) for k, v in obj.items()}
        if isinstance(obj, list):
            return [clean(v) for v in obj]
        return _json_value(obj)

    return json.dumps(clean(payload), indent=1) + "\n"


def _emit(text: str, output: str):
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# -- commands ----------------------------------------------------------------


def spectrum_rows(cfg: RunConfig) -> list[dict]:
    rows = []
    for kappa, comp, branch in itertools.product(cfg.kappas, (PLUS, MINUS), cfg.branches):
        vc = validate(cfg.params, ChannelSpec(kappa, branch, comp))
        try:
            rot = solve_rotation(vc)
        except NoPositiveCosine as exc:
            _warn(f"skipping kappa={kappa} branch {sign_str(branch)}: {exc}")
            continue
        for n, s in itertools.product(range(cfg.n_max + 1), (PLUS, MINUS)):
            try:
                lev = energy_level(vc, rot, n, s)
            except (NonNormalizable, ComplexEnergy) as exc:
                _warn(f"skipping kappa={kappa} component {sign_str(comp)} n={n}: {exc}")
                continue
            rows.append({
                "kappa": kappa, "component": sign_str(comp), "branch": sign_str(branch),
                "sign_branch": sign_str(s), "n": n, "ell_eff": lev.qn.ell_eff, "N": lev.qn.N,
                "epsilon": lev.epsilon, "E_equiv": lev.E_equiv, "q_eff": lev.q_eff,
                "binding": lev.binding,
            })
    return rows


def cmd_spectrum(cfg: RunConfig) -> int:
    rows = spectrum_rows(cfg)
    text = _json_text(rows) if cfg.format == "json" else _csv_text(SPECTRUM_COLUMNS, rows)
    _emit(text, cfg.output)
    return EXIT_OK


def cmd_wavefunction(cfg: RunConfig) -> int:
    o = cfg.options
    components = _branches(o["component"])
    sign = parse_sign(o["sign"])
    n = o["n"]
    blocks = []
    for kappa, comp, branch in itertools.product(cfg.kappas, components, cfg.branches):
        state = make_bound_state(cfg.params, kappa, comp, n, sign, branch, o["pairing"])
        window = check_radii(state.omega, 2)
        r_min = o["r_min"] if o["r_min"] is not None else float(window[0])
        r_max = o["r_max"] if o["r_max"] is not None else float(window[-1])
        samples = sample_grid(state, r_min, r_max, int(o["points"]), o["spacing"])
        label = (f"state kappa={kappa} component={sign_str(comp)} branch={sign_str(branch)} "
                 f"sign={sign_str(sign)} n={n} pairing={state.pairing} "
                 f"epsilon={fmt(state.level.epsilon)} C={fmt(state.rot.C)}")
        meta = {"kappa": kappa, "component": sign_str(comp), "branch": sign_str(branch),
                "sign_branch": sign_str(sign), "n": n, "pairing": state.pairing,
                "epsilon": state.level.epsilon, "C": state.rot.C}
        blocks.append((label, meta, [s.as_row() for s in samples]))
    if cfg.format == "json":
        if len(blocks) == 1:
            payload = blocks[0][2]
        else:
            payload = [{"state": meta, "samples": rows} for _, meta, rows in blocks]
        text = _json_text(payload)
    else:
        text = "".join(_csv_text(WAVE_COLUMNS, rows, label) for label, _, rows in blocks)
    _emit(text, cfg.output)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    checks = config_report(cfg.params, cfg.kappas, cfg.n_max, cfg.branches,
                           skip_oracle=bool(cfg.options["skip_oracle"]),
                           oracle_count=int(cfg.options["grid_points"]))
    if cfg.format == "json":
        text = _json_text([
            {"name": c.name, "passed": c.passed, "value": c.value, "tolerance": c.tolerance,
             "detail": c.detail}
            for c in checks
        ])
    else:
        text = "".join(c.line() + "\n" for c in checks)
        failed = sum(not c.passed for c in checks)
        text += f"{len(checks) - failed}/{len(checks)} checks passed\n"
    _emit(text, cfg.output)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def oracle_rows(cfg: RunConfig) -> list[dict]:
    rows, cache = [], {}
    p = cfg.params
    count = int(cfg.options["grid_points"])
    for kappa, comp, branch in itertools.product(cfg.kappas, (PLUS, MINUS), cfg.branches):
        vc = validate(p, ChannelSpec(kappa, branch, comp))
        rot = solve_rotation(vc)
        for n, s in itertools.product(range(cfg.n_max + 1), (PLUS, MINUS)):
            lev = energy_level(vc, rot, n, s)
            row = {"kappa": kappa, "component": sign_str(comp), "branch": sign_str(branch),
                   "sign_branch": sign_str(s), "n": n, "Z": p.Z, "mu": p.mu, "lambda": p.lam,
                   "epsilon_analytic": lev.epsilon}
            if not lev.binding:
                row.update(epsilon_oracle=math.nan, abs_delta=math.nan, grid_estimate=math.nan,
                           status="non-binding, skipped")
            else:
                key = (lev.qn.ell_eff, n, s)
                if key not in cache:
                    cache[key] = self_consistent_epsilon(vc, rot, n, s, cfg.oracle_grid, count)
                res = cache[key]
                row.update(epsilon_oracle=res.epsilon, abs_delta=abs(res.epsilon - lev.epsilon),
                           grid_estimate=res.grid_estimate, status="ok")
            rows.append(row)
    return rows


def cmd_oracle(cfg: RunConfig) -> int:
    rows = oracle_rows(cfg)
    text = _json_text(rows) if cfg.format == "json" else _csv_text(ORACLE_COLUMNS, rows)
    _emit(text, cfg.output)
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "wavefunction": cmd_wavefunction,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
}


def _warn(message: str):
    print(f"warning: {message}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args, args.command)
        return COMMANDS[args.command](cfg)
    except (UsageError, InvalidParameter, NoPositiveCosine, NonNormalizable, ComplexEnergy) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SupercriticalCoupling as exc:
        print(f"error: supercritical coupling: {exc}", file=sys.stderr)
        return EXIT_SUPERCRITICAL
    except StateConstructionError as exc:
        print(f"error: cannot construct state: {exc}", file=sys.stderr)
        return EXIT_STATE
    except OracleError as exc:
        print(f"error: oracle failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ORACLE


if __name__ == "__main__":
    sys.exit(main())
