"""
``morphosplit`` command-line front end.

Subcommands::

    morphosplit simulate CONFIG     # states.csv (+ frame_XXXX.svg)
    morphosplit bracket  CONFIG     # bracket.csv, summary.csv (+ bracket.svg)
    morphosplit holder   CONFIG     # pairs.csv, fit.csv
    morphosplit validate            # CHECK lines, exit 3 on any failure

The config is an INI file (``#`` comments, UTF-8). Unknown sections or keys
and out-of-range values are rejected with exit code 1. The output directory
is ``[output] directory``, overridden by ``$MORPHOSPLIT_OUTPUT_DIR``.

Exit codes: 0 success, 1 config error, 2 I/O error, 3 validation failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Optional

import numpy as np

from . import bracket_analytic as ba
from .flow import GrowthField, named_field, polynomial_field
from .geometry import build_circle, weighted_norm
from .measure import SignalMeasure, cosine, format_float, from_density, uniform
from .splitting import SchemeOrder, SplitSchedule, epsilon_sweep, fitted_order, run_scheme
from .svg import curve_frame, line_overlay
from .wasserstein import MAX_ATOMS, holder_certificate

ENV_OUTPUT_DIR = "MORPHOSPLIT_OUTPUT_DIR"

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_VALIDATION = 0, 1, 2, 3

STATES_COLUMNS = ("step", "time", "node", "theta", "x", "y", "sqrt_g", "mass", "density")
BRACKET_COLUMNS = ("epsilon", "node", "theta", "estimate", "reference", "abs_error")
SUMMARY_COLUMNS = ("epsilon", "l1", "l2", "linf", "fitted_order")
PAIRS_COLUMNS = ("t", "s", "W2")
FIT_COLUMNS = ("L", "C", "max_violation")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


class OutputError(OSError):
    pass


# key -> (parser, default); a default of ``None`` means optional
_SCHEMA = {
    "manifold": {"n_nodes": ("int", 128), "radius": ("float", 1.0)},
    "field": {"name": ("str", "paper"), "coefficients": ("json", None)},
    "signal": {"kind": ("str", "uniform"), "value": ("float", 0.1), "samples": ("json", None)},
    "schedule": {
        "horizon": ("float", 0.25), "level": ("int", 4), "order": ("str", "growth_first"),
        "flow_dt": ("float", 1e-3), "heat_substeps": ("int", 4), "theta_scheme": ("float", 0.5),
    },
    "bracket": {
        "epsilons": ("json", [0.04, 0.02, 0.01, 0.005]), "flow_dt": ("float", None),
        "heat_substeps": ("int", 20), "reference": ("str", "weak_form"),
    },
    "holder": {"pairs": ("int", 64), "seed": ("int", 0)},
    "output": {"directory": ("str", "out"), "emit_svg": ("bool", False), "svg_every": ("int", 1)},
}


@dataclass
class ExperimentConfig:
    n_nodes: int = 128
    radius: float = 1.0
    field_name: str = "paper"
    coefficients: Optional[list] = None
    signal_kind: str = "uniform"
    signal_value: float = 0.1
    samples: Optional[list] = None
    horizon: float = 0.25
    level: int = 4
    order: str = "growth_first"
    flow_dt: float = 1e-3
    heat_substeps: int = 4
    theta_scheme: float = 0.5
    epsilons: list = dc_field(default_factory=lambda: [0.04, 0.02, 0.01, 0.005])
    bracket_flow_dt: Optional[float] = None
    bracket_heat_substeps: int = 20
    reference: str = "weak_form"
    holder_pairs: int = 64
    holder_seed: int = 0
    output_dir: str = "out"
    emit_svg: bool = False
    svg_every: int = 1

    # -- derived objects ---------------------------------------------------

    def curve(self):
        return build_circle(self.n_nodes, self.radius)

    def growth_field(self) -> GrowthField:
        if self.coefficients is not None:
            return polynomial_field(self.coefficients, name="custom")
        return named_field(self.field_name)

    def initial_measure(self) -> SignalMeasure:
        c = self.curve()
        if self.signal_kind == "uniform":
            return uniform(c, self.signal_value)
        if self.signal_kind == "cosine":
            return cosine(c, self.signal_value)
        return from_density(c, np.asarray(self.samples, dtype=float))

    def schedule(self) -> SplitSchedule:
        return SplitSchedule(self.horizon, self.level, SchemeOrder(self.order), self.flow_dt,
                             self.heat_substeps, self.theta_scheme)


def _convert(section, key, kind, raw):
    where = f"[{section}] {key}"
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError
            return v
        if kind == "bool":
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError
        if kind == "json":
            return json.loads(raw)
        return raw.strip()
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {kind}") from None


def _check(cond, key, msg):
    if not cond:
        raise ConfigError(f"{key}: {msg}")


def _validate(cfg: ExperimentConfig):
    _check(8 <= cfg.n_nodes <= 4096, "[manifold] n_nodes", "must be in [8, 4096]")
    _check(cfg.radius > 0, "[manifold] radius", "must be positive")
    if cfg.coefficients is None:
        try:
            named_field(cfg.field_name)
        except ValueError as exc:
            raise ConfigError(f"[field] name: {exc}") from None
    else:
        c = np.asarray(cfg.coefficients, dtype=object)
        ok = c.ndim == 2 and c.shape[0] == 2 and 1 <= c.shape[1] <= 6
        try:
            ok = ok and bool(np.all(np.isfinite(c.astype(float))))
        except (TypeError, ValueError):
            ok = False
        _check(ok, "[field] coefficients", "must be a 2 x k table of numbers, k <= 6")
    _check(cfg.signal_kind in ("uniform", "cosine", "samples"), "[signal] kind",
           "must be uniform, cosine or samples")
    _check(cfg.signal_value >= 0, "[signal] value", "must be nonnegative")
    if cfg.signal_kind == "samples":
        s = cfg.samples
        ok = isinstance(s, list) and len(s) == cfg.n_nodes
        ok = ok and all(isinstance(v, (int, float)) and math.isfinite(v) and v >= 0 for v in s)
        _check(ok, "[signal] samples", "must list n_nodes finite nonnegative densities")
    _check(cfg.horizon > 0, "[schedule] horizon", "must be positive")
    _check(0 <= cfg.level <= 12, "[schedule] level", "must be in [0, 12]")
    _check(cfg.order in ("growth_first", "diffusion_first"), "[schedule] order",
           "must be growth_first or diffusion_first")
    _check(0 < cfg.flow_dt <= 1.0, "[schedule] flow_dt", "must be in (0, 1]")
    _check(0 <= cfg.heat_substeps <= 100000, "[schedule] heat_substeps", "must be in [0, 100000]")
    _check(0.5 <= cfg.theta_scheme <= 1.0, "[schedule] theta_scheme", "must be in [0.5, 1]")
    eps = cfg.epsilons
    ok = isinstance(eps, list) and len(eps) >= 3
    ok = ok and all(isinstance(e, (int, float)) and e > 0 for e in eps)
    ok = ok and all(a > b for a, b in zip(eps, eps[1:]))
    _check(ok, "[bracket] epsilons", "need >= 3 positive, strictly decreasing values")
    _check(cfg.bracket_flow_dt is None or cfg.bracket_flow_dt > 0, "[bracket] flow_dt",
           "must be positive")
    _check(1 <= cfg.bracket_heat_substeps <= 100000, "[bracket] heat_substeps",
           "must be in [1, 100000]")
    _check(cfg.reference in ("weak_form", "closed_form", "zero"), "[bracket] reference",
           "must be weak_form, closed_form or zero")
    if cfg.reference == "closed_form":
        _check(cfg.signal_kind in ("uniform", "cosine") and cfg.coefficients is None
               and cfg.field_name == "paper" and cfg.radius == 1.0, "[bracket] reference",
               "closed_form needs field name = paper, the unit circle and a uniform or cosine signal")
    _check(cfg.holder_pairs >= 1, "[holder] pairs", "must be >= 1")
    _check(cfg.holder_seed >= 0, "[holder] seed", "must be nonnegative")
    _check(cfg.svg_every >= 1, "[output] svg_every", "must be >= 1")


_TARGET = {
    ("manifold", "n_nodes"): "n_nodes", ("manifold", "radius"): "radius",
    ("field", "name"): "field_name", ("field", "coefficients"): "coefficients",
    ("signal", "kind"): "signal_kind", ("signal", "value"): "signal_value",
    ("signal", "samples"): "samples",
    ("schedule", "horizon"): "horizon", ("schedule", "level"): "level",
    ("schedule", "order"): "order", ("schedule", "flow_dt"): "flow_dt",
    ("schedule", "heat_substeps"): "heat_substeps", ("schedule", "theta_scheme"): "theta_scheme",
    ("bracket", "epsilons"): "epsilons", ("bracket", "flow_dt"): "bracket_flow_dt",
    ("bracket", "heat_substeps"): "bracket_heat_substeps", ("bracket", "reference"): "reference",
    ("holder", "pairs"): "holder_pairs", ("holder", "seed"): "holder_seed",
    ("output", "directory"): "output_dir", ("output", "emit_svg"): "emit_svg",
    ("output", "svg_every"): "svg_every",
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate config text. Raises :class:`ConfigError`."""
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",),
                                       inline_comment_prefixes=("#",), default_section="\0")
    parser.optionxform = str  # keys are case-sensitive
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    cfg = ExperimentConfig()
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"[{section}]: unknown section")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"[{section}] {key}: unknown key")
            kind, _ = _SCHEMA[section][key]
            setattr(cfg, _TARGET[section, key], _convert(section, key, kind, raw))
    _validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def output_directory(cfg: ExperimentConfig) -> Path:
    out = Path(os.environ.get(ENV_OUTPUT_DIR) or cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {out}: {exc.strerror}") from None
    if not os.access(out, os.W_OK):
        raise OutputError(f"output directory {out} is not writable")
    return out


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return format_float(float(v))
    return str(v)


def write_csv(path: Path, header, rows):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_cell(v) for v in r])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from None


def _write_text(path: Path, text: str):
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from None


# -- commands --------------------------------------------------------------


def cmd_simulate(cfg: ExperimentConfig) -> Path:
    out = output_directory(cfg)
    traj = run_scheme(cfg.initial_measure(), cfg.growth_field(), cfg.schedule())

    def rows():
        for step, state in enumerate(traj.states):
            m = state.measure
            c = m.curve
            for k in range(c.n_nodes):
                yield (step, float(state.time), k, float(c.theta[k]), float(c.positions[k, 0]),
                       float(c.positions[k, 1]), float(c.sqrt_g[k]), float(m.masses[k]),
                       float(m.density[k]))

    write_csv(out / "states.csv", STATES_COLUMNS, rows())
    if cfg.emit_svg:
        for step, state in enumerate(traj.states):
            if step % cfg.svg_every == 0 or step == len(traj) - 1:
                _write_text(out / f"frame_{step:04d}.svg",
                            curve_frame(state.measure, f"t = {state.time:.6g}"))
    return out


def _bracket_reference(cfg: ExperimentConfig, mu: SignalMeasure, field: GrowthField):
    if cfg.reference == "zero":
        return np.zeros(mu.curve.n_nodes)
    if cfg.reference == "closed_form":
        kind = ba.SignalKind.CONSTANT if cfg.signal_kind == "uniform" else ba.SignalKind.COSINE
        return ba.reference_s1(kind, cfg.signal_value, mu.curve.theta)
    return ba.bracket_density(mu.curve, field, mu)


def cmd_bracket(cfg: ExperimentConfig) -> Path:
    out = output_directory(cfg)
    mu = cfg.initial_measure()
    field = cfg.growth_field()
    ref = _bracket_reference(cfg, mu, field)
    rep = epsilon_sweep(mu, field, cfg.epsilons, reference=ref, flow_dt=cfg.bracket_flow_dt,
                        heat_substeps=cfg.bracket_heat_substeps)
    theta = mu.curve.theta

    def rows():
        for e, est in zip(rep.epsilons, rep.estimates):
            for k in range(theta.size):
                yield (float(e), k, float(theta[k]), float(est[k]), float(ref[k]),
                       float(abs(est[k] - ref[k])))

    write_csv(out / "bracket.csv", BRACKET_COLUMNS, rows())
    order = fitted_order(rep.epsilons, rep.errors["l2"])
    write_csv(out / "summary.csv", SUMMARY_COLUMNS,
              [(float(e), float(rep.errors["l1"][i]), float(rep.errors["l2"][i]),
                float(rep.errors["linf"][i]), float(order)) for i, e in enumerate(rep.epsilons)])
    if cfg.emit_svg:
        _write_text(out / "bracket.svg", line_overlay(
            theta, {f"estimate eps={rep.epsilons[-1]:g}": rep.estimates[-1], "reference": ref},
            "bracket density"))
    return out


def cmd_holder(cfg: ExperimentConfig) -> Path:
    if cfg.level < 4:
        raise ConfigError("[schedule] level: holder needs level >= 4")
    if cfg.n_nodes > MAX_ATOMS:
        raise ConfigError(f"[manifold] n_nodes: holder supports at most {MAX_ATOMS} atoms")
    out = output_directory(cfg)
    traj = run_scheme(cfg.initial_measure(), cfg.growth_field(), cfg.schedule())
    fit = holder_certificate(traj, cfg.holder_pairs, cfg.holder_seed)
    write_csv(out / "pairs.csv", PAIRS_COLUMNS, ((float(t), float(s), float(w)) for t, s, w in fit.pairs))
    write_csv(out / "fit.csv", FIT_COLUMNS, [(fit.lipschitz, fit.holder, fit.max_violation)])
    return out


def cmd_validate(stream=None) -> int:
    from .validation import run_checks

    stream = sys.stdout if stream is None else stream
    results = run_checks()
    for r in results:
        print(r.line(), file=stream)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="morphosplit",
                                description="Growth/diffusion splitting experiments on closed curves.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("simulate", "run the splitting scheme, write states.csv"),
                        ("bracket", "epsilon sweep of the bracket estimator"),
                        ("holder", "empirical Hoelder-1/2 certificate")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("config", help="INI configuration file")
    sub.add_parser("validate", help="run the fixed invariant suite")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        return cmd_validate()
    commands = {"simulate": cmd_simulate, "bracket": cmd_bracket, "holder": cmd_holder}
    try:
        cfg = load_config(args.config)
        out = commands[args.command](cfg)
    except ConfigError as exc:
        print(f"morphosplit: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(f"morphosplit: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {args.command} output to {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
