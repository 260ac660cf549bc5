"""Command-line driver: ``pqjc {spectrum,vcs,dynamics,moments,verify}``.

A run is described by a JSON config with blocks ``model``, ``scheme``,
``vcs``, ``numeric`` and ``output``; missing keys take defaults and
``--set block.key=value`` overrides single entries. Output is CSV or JSON
and is byte-for-byte reproducible when ``--no-timestamp`` is given.

Exit codes: 0 success, 2 config error, 3 numeric contract violated,
4 quadrature failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import ConfigError, PQJCError, QuadratureFailure
from .ladder import LadderScheme, SchemeKind, algebra_residual, bind_coefficients
from .moments import (
    WeightChoice,
    ramanujan_classical,
    ramanujan_pq,
    resolution_check,
    verify_moments,
)
from .pqmath import (
    DeformationParams,
    Regime,
    SeriesControl,
    basic_number,
    cal_E_pq,
    e_pq,
    e_q,
    jackson_Eq,
    pq_shifted_factorial,
    q_pochhammer,
)
from .spectrum import HChoice, JCModelParams, build_spectrum, verify_spectrum
from .vcs import (
    VCSParams,
    action_identity_residual,
    action_variables,
    annihilation_residual,
    atomic_inversion,
    build_vcs,
    coefficient_recursion_residual,
    evolve,
    evolve_by_phase,
    expectation_H,
    expectation_number,
    inversion_crossings,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_QUADRATURE = 0, 2, 3, 4

DEFAULT_CONFIG = {
    "model": {"p": 1.2, "q": 0.5, "epsilon": 0.05, "lambda": 0.3, "omega0": 1.0,
              "h_constant": 1.0, "h_tag": None, "mu": 0.5, "nu": 0.0},
    "scheme": {"kind": "algebra", "p0": None, "q0": None, "alpha": None, "moduli": None,
               "tau_plus": 0.0, "tau_minus": 0.0, "weight": "pq_explicit"},
    "vcs": {"z_re": 0.7, "z_im": 0.0, "theta": math.pi / 4, "phi": 0.0},
    "numeric": {"n_max": 64, "rel_tol": 1e-15, "abs_tol": 1e-15, "max_terms": 4000,
                "quad_tol": 1e-10, "n_check": 8},
    "output": {"format": "csv", "path": None},
}

SCHEME_KINDS = {"algebra": SchemeKind.ALGEBRA, "action_identity": SchemeKind.ACTION_IDENTITY,
                "custom": SchemeKind.CUSTOM}
WEIGHTS = ("pq_explicit", "fock", "alpha")


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    raw: dict
    model: JCModelParams
    scheme: LadderScheme
    z: complex
    theta: float
    phi: float
    ctl: SeriesControl
    n_max: int
    quad_tol: float
    n_check: int
    weight: WeightChoice
    fmt: str
    path: str | None

    def canonical(self) -> str:
        return json.dumps(self.raw, sort_keys=True)


def _number(raw: dict, block: str, key: str, *, positive: bool = False, integer: bool = False,
            allow_none: bool = False):
    value = raw[block][key]
    where = f"{block}.{key}"
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(where, f"expected a number, got {value!r}")
    if integer and (not float(value).is_integer()):
        raise ConfigError(where, f"expected an integer, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(where, "must be finite")
    if positive and not value > 0:
        raise ConfigError(where, f"must be positive, got {value!r}")
    return int(value) if integer else float(value)


def _merge(defaults: dict, given: dict) -> dict:
    merged = copy.deepcopy(defaults)
    if not isinstance(given, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    for block, values in given.items():
        if block not in defaults:
            raise ConfigError(block, "unknown config block")
        if not isinstance(values, dict):
            raise ConfigError(block, "block must be a JSON object")
        for key, value in values.items():
            if key not in defaults[block]:
                raise ConfigError(f"{block}.{key}", "unknown key")
            merged[block][key] = value
    return merged


def locate_field(text: str, field_name: str) -> int | None:
    """Line of the last key in ``block.key`` (or ``block.a/block.b``) inside config text."""
    head = field_name.split("/")[-1]
    key = head.split(".")[-1]
    block = head.split(".")[0]
    start = text.find(f'"{block}"')
    if start < 0:
        return None
    pos = text.find(f'"{key}"', start) if key != block else start
    return text.count("\n", 0, pos) + 1 if pos >= 0 else None


def load_config_text(text: str) -> dict:
    """Parse config JSON; a full result envelope is accepted and its config reused."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<json>", exc.msg, line=exc.lineno) from None
    if isinstance(data, dict) and "command" in data and "config" in data:
        data = data["config"]
    return data


def apply_overrides(raw: dict, overrides: list[str]) -> dict:
    raw = copy.deepcopy(raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must look like block.key=value")
        path, value = item.split("=", 1)
        if path.count(".") != 1:
            raise ConfigError(path, "override key must be block.key")
        block, key = path.split(".")
        if block not in raw or key not in raw[block]:
            raise ConfigError(path, "unknown key")
        try:
            raw[block][key] = json.loads(value)
        except json.JSONDecodeError:
            raw[block][key] = value
    return raw


def parse_config(given: dict, overrides: list[str] = ()) -> RunConfig:
    raw = apply_overrides(_merge(DEFAULT_CONFIG, given), list(overrides))
    p = _number(raw, "model", "p")
    q = _number(raw, "model", "q")
    try:
        d = DeformationParams(p, q)
    except ValueError as exc:
        raise ConfigError("model.p/model.q", str(exc)) from None
    h_tag = raw["model"]["h_tag"]
    try:
        h_choice = HChoice.custom(h_tag) if h_tag is not None else HChoice.constant(
            _number(raw, "model", "h_constant", positive=True))
        model = JCModelParams(d=d, epsilon=_number(raw, "model", "epsilon"),
                              lam=_number(raw, "model", "lambda"),
                              omega0=_number(raw, "model", "omega0", positive=True), h_choice=h_choice,
                              mu=_number(raw, "model", "mu"), nu=_number(raw, "model", "nu"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("model", str(exc)) from None

    sraw = raw["scheme"]
    kind = sraw["kind"]
    if kind not in SCHEME_KINDS:
        raise ConfigError("scheme.kind", f"expected one of {sorted(SCHEME_KINDS)}, got {kind!r}")
    alpha = _number(raw, "scheme", "alpha", positive=True, allow_none=True)
    taus = dict(tau_plus=_number(raw, "scheme", "tau_plus"), tau_minus=_number(raw, "scheme", "tau_minus"))
    try:
        if kind == "algebra":
            p0 = _number(raw, "scheme", "p0", allow_none=True)
            q0 = _number(raw, "scheme", "q0", allow_none=True)
            a = 1.0 if alpha is None else alpha
            p0 = d.p**a if p0 is None else p0
            q0 = d.q**a if q0 is None else q0
            scheme = LadderScheme.algebra(p0, q0, **taus)
        elif kind == "action_identity":
            scheme = LadderScheme.action_identity(**taus)
        else:
            moduli = sraw["moduli"]
            if not isinstance(moduli, list):
                raise ConfigError("scheme.moduli", "custom scheme needs a list of moduli")
            scheme = LadderScheme.custom(moduli, **taus)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("scheme", str(exc)) from None

    weight = sraw["weight"]
    if weight not in WEIGHTS:
        raise ConfigError("scheme.weight", f"expected one of {list(WEIGHTS)}, got {weight!r}")
    if weight == "alpha":
        if alpha is None:
            raise ConfigError("scheme.alpha", "weight 'alpha' needs scheme.alpha")
        choice = WeightChoice.alpha_family(alpha)
    else:
        choice = WeightChoice.pq_explicit() if weight == "pq_explicit" else WeightChoice.fock()

    theta = _number(raw, "vcs", "theta")
    phi = _number(raw, "vcs", "phi")
    if not 0 <= theta <= math.pi:
        raise ConfigError("vcs.theta", "must lie in [0, pi]")
    if not 0 <= phi < 2 * math.pi:
        raise ConfigError("vcs.phi", "must lie in [0, 2 pi)")
    z = complex(_number(raw, "vcs", "z_re"), _number(raw, "vcs", "z_im"))

    n_max = _number(raw, "numeric", "n_max", positive=True, integer=True)
    ctl = SeriesControl(rel_tol=_number(raw, "numeric", "rel_tol", positive=True),
                        abs_tol=_number(raw, "numeric", "abs_tol", positive=True),
                        max_terms=_number(raw, "numeric", "max_terms", positive=True, integer=True))
    fmt = raw["output"]["format"]
    if fmt not in ("csv", "json"):
        raise ConfigError("output.format", f"expected csv or json, got {fmt!r}")
    path = raw["output"]["path"]
    if path is not None and not isinstance(path, str):
        raise ConfigError("output.path", "expected a string or null")
    return RunConfig(raw=raw, model=model, scheme=scheme, z=z, theta=theta, phi=phi, ctl=ctl,
                     n_max=n_max, quad_tol=_number(raw, "numeric", "quad_tol", positive=True),
                     n_check=_number(raw, "numeric", "n_check", positive=True, integer=True),
                     weight=choice, fmt=fmt, path=path)


# ---------------------------------------------------------------------------
# results


@dataclass
class ResultEnvelope:
    command: str
    config: dict
    columns: list[str]
    rows: list[list]
    diagnostics: dict = field(default_factory=dict)
    timestamp: str | None = None

    def to_json(self) -> str:
        body = {"command": self.command, "config": self.config,
                "payload": {"columns": self.columns, "rows": self.rows},
                "diagnostics": self.diagnostics}
        if self.timestamp is not None:
            body["timestamp"] = self.timestamp
        return json.dumps(_jsonable(body), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# command: {self.command}\n")
        if self.timestamp is not None:
            buf.write(f"# timestamp: {self.timestamp}\n")
        buf.write(f"# config: {json.dumps(_jsonable(self.config), sort_keys=True)}\n")
        buf.write(f"# diagnostics: {json.dumps(_jsonable(self.diagnostics), sort_keys=True)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_csv_cell(v) for v in row])
        return buf.getvalue()


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _radius_text(state) -> dict:
    return {"plus": str(state.radius_plus), "minus": str(state.radius_minus)}


def _vcs_params(cfg: RunConfig) -> VCSParams:
    return VCSParams(z=cfg.z, theta=cfg.theta, phi=cfg.phi, scheme=cfg.scheme, model=cfg.model)


def _build_state(cfg: RunConfig):
    return build_vcs(_vcs_params(cfg), cfg.n_max, cfg.ctl)


def cmd_spectrum(cfg: RunConfig) -> ResultEnvelope:
    table = build_spectrum(cfg.model, cfg.n_max)
    report = verify_spectrum(cfg.model, min(cfg.n_max, 40), table=build_spectrum(cfg.model, min(cfg.n_max, 40)))
    columns = ["n", "script_E", "Q", "sin_theta", "cos_theta", "E_plus", "E_minus", "zeeman"]
    rows = [[lv.n, lv.script_E, lv.Q, lv.sin_theta, lv.cos_theta, lv.E_plus, lv.E_minus, lv.zeeman]
            for lv in table.levels]
    diag = table.diagnostics
    return ResultEnvelope("spectrum", cfg.raw, columns, rows, {
        "singleton_energy": table.singleton_energy,
        "turnaround_n0": diag.turnaround_n0,
        "min_E_minus": diag.min_E_minus,
        "degenerate_pairs": [list(p) for p in diag.degenerate_pairs],
        "crossings": list(diag.crossings),
        "oracle_max_residual": report.max_residual,
        "oracle_matched_levels": report.matched_levels,
    })


def cmd_vcs(cfg: RunConfig) -> ResultEnvelope:
    state = _build_state(cfg)
    columns = ["n", "re_plus", "im_plus", "re_minus", "im_minus", "prob_plus", "prob_minus"]
    rows = [[n, a.real, a.imag, b.real, b.imag, abs(a) ** 2, abs(b) ** 2]
            for n, (a, b) in enumerate(zip(state.coeff_plus, state.coeff_minus))]
    J_plus, J_minus = action_variables(state)
    return ResultEnvelope("vcs", cfg.raw, columns, rows, {
        "norm_error": abs(state.total_norm() - 1.0),
        "norm_plus": state.norm_plus,
        "norm_minus": state.norm_minus,
        "recursion_residual": coefficient_recursion_residual(state),
        "annihilation_residual": annihilation_residual(state),
        "expectation_H": expectation_H(state),
        "expectation_number": expectation_number(state),
        "J_plus": J_plus,
        "J_minus": J_minus,
        "action_identity_residual": action_identity_residual(state),
        "radius": _radius_text(state),
        "truncation": {"n_max": state.report.n_max, "last_term_plus": state.report.last_term_plus,
                       "last_term_minus": state.report.last_term_minus, "tail_ok": state.report.tail_ok},
    })


def _threads() -> int:
    value = os.environ.get("PQJC_NUM_THREADS", "1")
    try:
        n = int(value)
    except ValueError:
        raise ConfigError("PQJC_NUM_THREADS", f"expected a positive integer, got {value!r}") from None
    if n < 1:
        raise ConfigError("PQJC_NUM_THREADS", f"expected a positive integer, got {value!r}")
    return n


def cmd_dynamics(cfg: RunConfig, t_start: float = 0.0, t_end: float = 50.0,
                 t_steps: int = 1000) -> ResultEnvelope:
    if t_steps < 2:
        raise ConfigError("--t-steps", "must be >= 2")
    if not t_end >= t_start:
        raise ConfigError("--t-end", "must be >= --t-start")
    state = _build_state(cfg)
    times = np.linspace(t_start, t_end, t_steps)
    workers = min(_threads(), t_steps)
    chunks = np.array_split(times, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda ts: atomic_inversion(state, ts), chunks))
    sigma3 = np.concatenate(parts)
    rows = [[float(t), float(s)] for t, s in zip(times, sigma3)]
    return ResultEnvelope("dynamics", cfg.raw, ["t", "sigma3"], rows, {
        "t_start": t_start, "t_end": t_end, "t_steps": t_steps,
        "spread": float(np.max(sigma3) - np.min(sigma3)),
        "max_abs": float(np.max(np.abs(sigma3))),
        "crossings": list(inversion_crossings(state)),
        "radius": _radius_text(state),
    })


def cmd_moments(cfg: RunConfig) -> ResultEnvelope:
    report = verify_moments(cfg.weight, cfg.model, cfg.n_check, cfg.quad_tol)
    rows = [[r.n, r.lhs, r.rhs, r.rel_err] for r in report.rows]
    d = cfg.model.d
    q_classical = d.q if d.q < 1 else 0.5
    ram = [ramanujan_classical(n, q_classical, cfg.quad_tol).rel_err for n in range(6)]
    diag = {"weight": cfg.weight.kind.value, "alpha": cfg.weight.alpha,
            "max_rel_err": report.max_rel_err,
            "ramanujan_classical_q": q_classical,
            "ramanujan_classical_max_rel_err": max(ram)}
    if d.regime is not Regime.CLASSICAL:
        diag["ramanujan_pq_max_rel_err"] = max(
            ramanujan_pq(n, lam0, d, cfg.quad_tol).rel_err for n in range(6) for lam0 in (1.0, 2.0))
    return ResultEnvelope("moments", cfg.raw, ["n", "lhs", "rhs", "rel_err"], rows, diag)


@dataclass
class Check:
    name: str
    residual: float
    tolerance: float
    informational: bool = False

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)


def _identity_checks(d: DeformationParams) -> list[Check]:
    checks = []
    b = [basic_number(n, d) for n in range(66)]
    rec = max(max(abs(b[n + 1] - d.p**-n - d.q * b[n]), abs(b[n + 1] - d.q**n - b[n] / d.p))
              for n in range(65))
    checks.append(Check("basic_number_recursions", rec, 1e-12))
    if d.regime is not Regime.CLASSICAL:
        worst = 0.0
        for mu in (0.0, 0.5, 1.0):
            for nu in (0.0, 0.5, 1.0):
                for n in range(21):
                    lhs = pq_shifted_factorial(d.p**mu, d.q**nu, d, n)
                    rhs = d.p ** (-mu * n - n * (n - 1) / 2) * q_pochhammer(d.p**mu * d.q**nu, d.p * d.q, n)
                    worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
        checks.append(Check("bridge_identity", worst, 1e-10))
        base = d.p * d.q
        zs = np.linspace(-0.9, 0.9, 20) / d.p
        inv = max(abs(jackson_Eq(-d.p * z, base) * e_q(d.p * z, base) - 1) for z in zs)
        checks.append(Check("inversion_identity_base_pq", float(inv), 1e-9))
        pq_inv = max(abs(cal_E_pq(-z / math.sqrt(d.q), 0.5, 0.0, d) * e_pq(math.sqrt(d.p) * z, d) - 1)
                     for z in zs)
        checks.append(Check("inversion_identity_pq", float(pq_inv), 1e-9))
    return checks


def cmd_verify(cfg: RunConfig) -> ResultEnvelope:
    model, scheme = cfg.model, cfg.scheme
    checks = _identity_checks(model.d)
    N = min(cfg.n_max, 40)
    checks.append(Check("spectrum_oracle", verify_spectrum(model, N, tol=math.inf).max_residual, 1e-10))
    table = build_spectrum(model, cfg.n_max)
    checks.append(Check("singleton_energy", abs(table.singleton_energy - model.epsilon / 2), 0.0))

    state = _build_state(cfg)
    checks.append(Check("vcs_unit_norm", abs(state.total_norm() - 1.0), 1e-10))
    checks.append(Check("vcs_coefficient_recursion", coefficient_recursion_residual(state), 1e-10))
    checks.append(Check("vcs_annihilation", annihilation_residual(state), 1e-8))
    later = evolve(state, 0.37)
    plus, minus = evolve_by_phase(state, 0.37)
    stab = max(np.max(np.abs(later.coeff_plus - plus)), np.max(np.abs(later.coeff_minus - minus)))
    checks.append(Check("vcs_temporal_stability", float(stab), 1e-12))
    J_plus, J_minus = action_variables(state)
    checks.append(Check("actions_sum_to_energy", abs(J_plus + J_minus - expectation_H(state)), 1e-10))
    sigma = atomic_inversion(state, np.linspace(0.0, 20.0, 201))
    checks.append(Check("inversion_bounded", max(0.0, float(np.max(np.abs(sigma))) - 1.0), 1e-9))

    ident = action_identity_residual(state)
    is_action = scheme.kind is SchemeKind.ACTION_IDENTITY
    checks.append(Check("action_identity", ident, 1e-8, informational=not is_action))
    if scheme.kind is SchemeKind.ALGEBRA:
        res = algebra_residual(state.ladder, scheme.p0, scheme.q0).worst
        checks.append(Check("ladder_algebra", res, 1e-12))
    elif model.d.regime is not Regime.CLASSICAL:
        # a non-algebra scheme measured against the model's own (p, q) algebra
        res = algebra_residual(bind_coefficients(scheme, table, min(cfg.n_max, table.n_max)),
                               model.d.p, model.d.q).worst
        checks.append(Check("ladder_algebra_vs_model_pq", res, 1e-12, informational=True))

    weight_applies = cfg.weight.kind.value == "FockExplicit" or model.d.regime is not Regime.CLASSICAL
    if weight_applies:
        report = verify_moments(cfg.weight, model, cfg.n_check, cfg.quad_tol)
        checks.append(Check(f"moments_{cfg.weight.kind.value}", report.max_rel_err, 1e-6))
        res = resolution_check(cfg.weight, model, min(cfg.n_check, 6), cfg.quad_tol)
        checks.append(Check("resolution_of_identity", res.max_diagonal_error, 1e-5))
    q_classical = model.d.q if model.d.q < 1 else 0.5
    ram = max(ramanujan_classical(n, q_classical, cfg.quad_tol).rel_err for n in range(6))
    checks.append(Check("ramanujan_classical", ram, 1e-6))
    if model.d.regime is not Regime.CLASSICAL:
        ram_pq = max(ramanujan_pq(n, 1.0, model.d, cfg.quad_tol).rel_err for n in range(6))
        checks.append(Check("ramanujan_pq", ram_pq, 1e-6))

    rows = [[c.name, c.passed, c.residual, c.tolerance, c.informational] for c in checks]
    failed = [c.name for c in checks if not c.passed and not c.informational]
    return ResultEnvelope("verify", cfg.raw, ["check", "passed", "residual", "tolerance", "informational"],
                          rows, {"failed": failed, "all_passed": not failed})


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pqjc", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [("spectrum", "closed-form spectrum table"),
                       ("vcs", "coherent-state amplitudes and expectation values"),
                       ("dynamics", "atomic inversion over a time grid"),
                       ("moments", "moment conditions of the configured weight"),
                       ("verify", "run every contract check; nonzero exit on failure")]:
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", type=Path, help="JSON config file (or a previous JSON result)")
        p.add_argument("--format", choices=["csv", "json"], help="output format (overrides config)")
        p.add_argument("--out", type=Path, help="output path (default stdout)")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="BLOCK.KEY=VALUE",
                       help="override one config entry; value parsed as JSON")
        p.add_argument("--no-timestamp", action="store_true", help="omit the wall-clock header")
        if name == "dynamics":
            p.add_argument("--t-start", type=float, default=0.0)
            p.add_argument("--t-end", type=float, default=50.0)
            p.add_argument("--t-steps", type=int, default=1000)
    return parser


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    args = build_parser().parse_args(argv)
    text = None
    try:
        given = {}
        if args.config is not None:
            try:
                text = args.config.read_text()
            except OSError as exc:
                raise ConfigError("--config", str(exc)) from None
            given = load_config_text(text)
        cfg = parse_config(given, args.overrides)
        if args.command == "spectrum":
            env = cmd_spectrum(cfg)
        elif args.command == "vcs":
            env = cmd_vcs(cfg)
        elif args.command == "dynamics":
            env = cmd_dynamics(cfg, args.t_start, args.t_end, args.t_steps)
        elif args.command == "moments":
            env = cmd_moments(cfg)
        else:
            env = cmd_verify(cfg)
    except ConfigError as exc:
        if exc.line is None and text is not None:
            line = locate_field(text, exc.field)
            if line is not None:
                exc = ConfigError(exc.field, str(exc).split(": ", 1)[-1], line=line)
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG
    except QuadratureFailure as exc:
        print(f"quadrature failure: {exc}", file=stderr)
        return EXIT_QUADRATURE
    except (PQJCError, ValueError, ArithmeticError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=stderr)
        return EXIT_NUMERIC

    if not args.no_timestamp:
        env.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    fmt = args.format or cfg.fmt
    text = env.to_json() if fmt == "json" else env.to_csv()
    out = args.out if args.out is not None else (Path(cfg.path) if cfg.path else None)
    if out is None:
        stdout.write(text)
    else:
        out.write_text(text)
    if env.command == "verify" and not env.diagnostics["all_passed"]:
        print(f"failed checks: {', '.join(env.diagnostics['failed'])}", file=stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(run())
