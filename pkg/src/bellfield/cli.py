"""Batch front-end: ``bellfield <command> [--config FILE] [flags]``.

Every command reads an optional JSON config, validates it strictly (unknown
keys are errors), runs one computation and writes JSON or CSV.  JSON
reports embed the resolved config and the tool version, with floats at 17
significant digits and a fixed key order, so identical configs give
byte-identical output.

Exit codes: 0 success, 1 numerical failure, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any

import numpy as np

from . import __version__
from .bell import BipartiteState, assemble, qm_reduction, tsirelson_check
from .correlator import TSIRELSON, chsh_correlator, is_violation
from .errors import NumericalError, ParameterError
from .fock import FockConfig
from .jc import JCParams, MomentumProfile, delta_squared, jc_chsh_oracle, radial_modes
from .modular import ModularParams, validate_params
from .optimize import DEFAULT_BUDGET, REFERENCE_POINT, QFT_LIMITS, maximize_chsh_qft, maximize_chsh_spin
from .spin import STATES, AngleSet, chsh_spin

COMMANDS = ("correlator", "oracle", "jc", "spin", "optimize", "sweep")
SWEEP_COLUMNS = ("eta", "eta_prime", "lambda", "C0", "violation")
DEFAULT_TOLERANCES = {"oracle": 1e-6, "quadrature": 1e-8}


class ConfigError(ParameterError):
    pass


# --- output -------------------------------------------------------------------


def _scalar(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if x is None:
        return "null"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(x, str):
        return json.dumps(x, ensure_ascii=False)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON with insertion-ordered keys and 17-significant-digit floats."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_scalar(v) for v in obj) + "]"
        items = [inner + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return _scalar(obj)


def _csv_cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return "" if x is None else str(x)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_csv_cell(x) for x in r])
    return buf.getvalue()


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            continue
        else:
            out[key] = v
    return out


# --- config parsing -----------------------------------------------------------


def _section(d, allowed: dict, path: str) -> dict:
    """Merge ``d`` over defaults in ``allowed``; reject unknown keys."""
    if d is None:
        d = {}
    if not isinstance(d, dict):
        raise ConfigError(f"{path or 'config'} must be an object")
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown field(s) in {path or 'config'}: {', '.join(unknown)}")
    return {k: d.get(k, v) for k, v in allowed.items()}


def _number(v, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path} must be a number, got {v!r}")
    return float(v)


def _integer(v, path: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path} must be an integer, got {v!r}")
    return v


def _params(d) -> ModularParams:
    s = _section(d, {"eta": REFERENCE_POINT.eta, "eta_prime": REFERENCE_POINT.eta_prime, "lambda": REFERENCE_POINT.lam}, "params")
    return validate_params(ModularParams(*(_number(s[k], f"params.{k}") for k in ("eta", "eta_prime", "lambda"))))


def _complex(v, path: str) -> complex:
    if isinstance(v, list) and len(v) == 2:
        return complex(_number(v[0], path), _number(v[1], path))
    return complex(_number(v, path))


def _profile(d, path: str) -> MomentumProfile:
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError(f"{path} needs a 'kind' of 'gaussian' or 'discrete'")
    if d["kind"] == "gaussian":
        s = _section(d, {"kind": "gaussian", "amplitude": 1.0, "center": 0.0, "width": 1.0}, path)
        return MomentumProfile.gaussian(_complex(s["amplitude"], f"{path}.amplitude"),
                                        _number(s["center"], f"{path}.center"), _number(s["width"], f"{path}.width"))
    if d["kind"] == "discrete":
        s = _section(d, {"kind": "discrete", "modes": [], "values": []}, path)
        try:
            modes = [(_number(w, path), _number(p, path)) for w, p in s["modes"]]
        except (TypeError, ValueError):
            raise ConfigError(f"{path}.modes must be a list of [weight, momentum] pairs") from None
        return MomentumProfile.discrete(modes, [_complex(v, f"{path}.values") for v in s["values"]])
    raise ConfigError(f"{path}.kind must be 'gaussian' or 'discrete', got {d['kind']!r}")


def _profile_dict(h: MomentumProfile) -> dict:
    def c(v):
        v = complex(v)
        return v.real if v.imag == 0 else [v.real, v.imag]

    if h.kind == "gaussian":
        return {"kind": "gaussian", "amplitude": c(h.amplitude), "center": h.center, "width": h.width}
    return {"kind": "discrete", "modes": [list(m) for m in h.modes], "values": [c(v) for v in h.values]}


def _state(d) -> BipartiteState:
    s = _section(d, {"kind": "maximally_entangled", "n": 2, "delta": None, "m_max": None, "coefficients": None}, "state")
    kind = s["kind"]
    if kind == "maximally_entangled":
        return BipartiteState.maximally_entangled(_integer(s["n"], "state.n"))
    if kind == "squeezed":
        m_max = None if s["m_max"] is None else _integer(s["m_max"], "state.m_max")
        return BipartiteState.squeezed(_number(s["delta"], "state.delta"), m_max)
    if kind == "coefficients":
        if not isinstance(s["coefficients"], list):
            raise ConfigError("state.coefficients must be a list")
        return BipartiteState([_complex(v, "state.coefficients") for v in s["coefficients"]])
    raise ConfigError(f"state.kind must be maximally_entangled, squeezed or coefficients, got {kind!r}")


def _angles(d) -> AngleSet:
    defaults = AngleSet.reference().as_dict()
    s = _section(d, defaults, "angles")
    return AngleSet(**{k: _number(v, f"angles.{k}") for k, v in s.items()})


def _bounds(d) -> tuple:
    s = _section(d, dict(zip(("eta", "eta_prime", "lambda"), map(list, QFT_LIMITS))), "bounds")
    out = []
    for k, v in s.items():
        if not isinstance(v, list) or len(v) != 2:
            raise ConfigError(f"bounds.{k} must be [low, high]")
        out.append((_number(v[0], f"bounds.{k}"), _number(v[1], f"bounds.{k}")))
    return tuple(out)


def _tolerances(d) -> dict:
    s = _section(d, DEFAULT_TOLERANCES, "tolerances")
    return {k: _number(v, f"tolerances.{k}") for k, v in s.items()}


# --- commands -------------------------------------------------------------------
# each returns (resolved config, result dict, csv header, csv rows)


def cmd_correlator(cfg: dict, args) -> tuple:
    s = _section(cfg, {"params": None}, "")
    p = _params(s["params"])
    rep = chsh_correlator(p)
    return {"params": p.as_dict()}, rep.as_dict(), None, None


def cmd_oracle(cfg: dict, args) -> tuple:
    s = _section(cfg, {"params": None, "state": None, "n_max": 16, "convergence": [8, 12, 16, 20], "tolerances": None}, "")
    p = _params(s["params"])
    st = _state(s["state"])
    tol = _tolerances(s["tolerances"])
    n_max = args.nmax if args.nmax is not None else _integer(s["n_max"], "n_max")
    levels = sorted({_integer(n, "convergence") for n in s["convergence"]})
    closed = qm_reduction(st) * chsh_correlator(p).value

    def run(n):
        asm = assemble(p, st, FockConfig(n))
        v = asm.expectation()
        return v, tsirelson_check(asm.c)

    table = []
    for n in levels:
        v, norm = run(n)
        table.append({"n_max": n, "oracle": v, "abs_error": abs(v - closed), "norm_C": norm})
    main = next((r for r in table if r["n_max"] == n_max), None)
    if main is None:
        v, norm = run(n_max)
        main = {"n_max": n_max, "oracle": v, "abs_error": abs(v - closed), "norm_C": norm}
    if main["abs_error"] > tol["oracle"]:
        raise NumericalError(f"oracle differs from closed form by {main['abs_error']:.3e} at n_max={n_max}")
    resolved = {"params": p.as_dict(), "state": {"coefficients": [[c.real, c.imag] for c in st.coefficients]},
                "n_max": n_max, "convergence": levels, "tolerances": tol}
    result = {"closed_form": closed, "oracle": main["oracle"], "abs_difference": main["abs_error"],
              "norm_C": main["norm_C"], "convergence": table}
    header = ("n_max", "oracle", "abs_error", "norm_C")
    return resolved, result, header, [tuple(r[h] for h in header) for r in table]


def cmd_jc(cfg: dict, args) -> tuple:
    s = _section(cfg, {"params": None, "jc": None, "profile_A": {"kind": "gaussian"}, "profile_B": {"kind": "gaussian"},
                       "n_max": 16, "oracle_modes": 8, "tolerances": None}, "")
    p = _params(s["params"])
    j = _section(s["jc"], {"omega_A": 0.01, "omega_B": 0.0, "J": 1.0, "m": 1.0}, "jc")
    jc = JCParams(*(_number(j[k], f"jc.{k}") for k in ("omega_A", "omega_B", "J", "m")))
    ha, hb = _profile(s["profile_A"], "profile_A"), _profile(s["profile_B"], "profile_B")
    tol = _tolerances(s["tolerances"])
    n_max = args.nmax if args.nmax is not None else _integer(s["n_max"], "n_max")
    n_modes = _integer(s["oracle_modes"], "oracle_modes")

    c0 = chsh_correlator(p).value
    d2 = delta_squared(jc, ha, hb, rtol=tol["quadrature"])
    if d2 > 1:
        raise NumericalError(f"delta^2 = {d2!r} exceeds 1")
    # the oracle needs discrete modes; gaussian profiles are sampled on a radial grid
    if ha.kind == "gaussian" or hb.kind == "gaussian":
        reach = max(h.center + 10 * h.width for h in (ha, hb) if h.kind == "gaussian")
        modes = radial_modes(reach, n_modes, jc.m)
        ha_d = ha.sampled(modes) if ha.kind == "gaussian" else ha
        hb_d = hb.sampled(modes) if hb.kind == "gaussian" else hb
    else:
        ha_d, hb_d = ha, hb
    d2_disc = delta_squared(jc, ha_d, hb_d)
    oracle = -jc_chsh_oracle(p, jc, ha_d, hb_d, FockConfig(n_max))
    resolved = {"params": p.as_dict(), "jc": jc.as_dict(), "profile_A": _profile_dict(ha), "profile_B": _profile_dict(hb),
                "n_max": n_max, "oracle_modes": n_modes, "tolerances": tol}
    result = {"delta_sq": d2, "C0": c0, "corrected": (1 - d2) * c0,
              "oracle": {"delta_sq": d2_disc, "value": oracle, "residual": oracle - (1 - d2_disc) * c0}}
    return resolved, result, None, None


def cmd_spin(cfg: dict, args) -> tuple:
    s = _section(cfg, {"angles": None, "state": "double-singlet"}, "")
    a = _angles(s["angles"])
    if s["state"] not in STATES:
        raise ConfigError(f"state must be one of {STATES}, got {s['state']!r}")
    matrix = chsh_spin(a, s["state"], "matrix")
    closed = chsh_spin(a, s["state"], "closed") if s["state"] == "double-singlet" else None
    result = {"matrix": matrix, "closed_form": closed, "violation": is_violation(matrix)}
    return {"angles": a.as_dict(), "state": s["state"]}, result, None, None


def cmd_optimize(cfg: dict, args) -> tuple:
    s = _section(cfg, {"target": "qft", "bounds": None, "budget": DEFAULT_BUDGET, "seed": 0, "state": "double-singlet",
                       "start": None}, "")
    seed = args.seed if args.seed is not None else _integer(s["seed"], "seed")
    budget = _integer(s["budget"], "budget")
    if s["target"] == "qft":
        b = _bounds(s["bounds"])
        r = maximize_chsh_qft(b, seed=seed, budget=budget)
        resolved = {"target": "qft", "bounds": {k: list(v) for k, v in zip(("eta", "eta_prime", "lambda"), b)},
                    "budget": budget, "seed": seed}
    elif s["target"] == "spin":
        if s["state"] not in STATES:
            raise ConfigError(f"state must be one of {STATES}, got {s['state']!r}")
        start = None if s["start"] is None else _angles(s["start"])
        r = maximize_chsh_spin(seed=seed, budget=budget, state=s["state"], start=start)
        resolved = {"target": "spin", "state": s["state"], "budget": budget, "seed": seed,
                    "start": None if start is None else start.as_dict()}
    else:
        raise ConfigError(f"target must be 'qft' or 'spin', got {s['target']!r}")
    return resolved, r.as_dict(), None, None


def sweep_rows(eta, eta_prime, lam):
    """Lattice rows ``(eta, eta', lambda, C0, violation)`` in lexicographic order."""
    for e in eta:
        for ep in eta_prime:
            for l in lam:
                v = chsh_correlator(ModularParams(float(e), float(ep), float(l))).value
                if abs(v) > TSIRELSON:
                    raise NumericalError(f"C0 = {v!r} exceeds 2 sqrt 2 at ({e}, {ep}, {l})")
                yield float(e), float(ep), float(l), v, is_violation(v)


def _axis(v, path: str) -> np.ndarray:
    if not isinstance(v, list) or len(v) != 3:
        raise ConfigError(f"{path} must be [low, high, count]")
    return np.linspace(_number(v[0], path), _number(v[1], path), _integer(v[2], path))


def cmd_sweep(cfg: dict, args) -> tuple:
    s = _section(cfg, {"eta": [0.0, 3.0, 20], "eta_prime": [0.0, 3.0, 20], "lambda": [0.01, 0.99, 20]}, "")
    axes = [_axis(s[k], k) for k in ("eta", "eta_prime", "lambda")]
    lam = axes[2]
    if lam.size and not (lam.min() > 0 and lam.max() < 1):
        raise ConfigError("lambda out of (0,1) in sweep range")
    rows = list(sweep_rows(*axes))
    result = {"rows": len(rows), "max_C0": max((r[3] for r in rows), default=None),
              "violations": sum(r[4] for r in rows)}
    return dict(s), result, SWEEP_COLUMNS, rows


_DISPATCH = {"correlator": cmd_correlator, "oracle": cmd_oracle, "jc": cmd_jc, "spin": cmd_spin,
             "optimize": cmd_optimize, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bellfield", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"bellfield {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON configuration file")
        sp.add_argument("--format", choices=("json", "csv"), default="csv" if name == "sweep" else "json")
        sp.add_argument("--seed", type=int, help="random seed (optimize)")
        sp.add_argument("--nmax", type=int, help="Fock cutoff override (oracle, jc)")
        sp.add_argument("--out", help="write output here instead of stdout")
    return ap


def run(argv=None) -> tuple[int, str, str | None]:
    """Execute a command line; return (exit code, output text, output path)."""
    args = build_parser().parse_args(argv)
    try:
        cfg = {}
        if args.config:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    cfg = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if args.seed is not None and args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        resolved, result, header, rows = _DISPATCH[args.command](cfg, args)
    except ParameterError as exc:
        return 2, f"error: {exc}\n", None
    except NumericalError as exc:
        return 1, f"numerical failure: {exc}\n", None
    if args.format == "json":
        report = {"command": args.command, "version": __version__, "config": resolved, "result": result}
        if rows is not None and args.command == "sweep":
            report["columns"] = list(header)
            report["rows"] = [list(r) for r in rows]
        text = dumps(report) + "\n"
    elif header is not None:
        text = to_csv(header, rows)
    else:
        flat = _flatten(result)
        text = to_csv(list(flat), [list(flat.values())])
    return 0, text, args.out


def main(argv=None) -> int:
    code, text, out = run(argv)
    if code:
        sys.stderr.write(text)
        return code
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # downstream closed early (e.g. piped into head)
            sys.stderr.close()
    return 0
