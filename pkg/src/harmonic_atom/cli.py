"""Command-line front end: ``harmonic-atom <subcommand> [options]``.

Every run writes one table (CSV or JSON) preceded by a provenance block
that echoes the fully resolved configuration. Output is byte-stable: the
same configuration always produces the same file.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, fields, replace
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from .covariance import (
    evolve_covariance,
    intrinsic_induced_split,
    stationary_covariance,
    uncertainty_onset_time,
)
from .errors import HarmonicAtomError, UsageError
from .gaussian_states import excited_populations, fock_populations
from .kernels import OscillatorParams
from .perturbative import compare_methods
from .transitions import p00, p01, transition_report
from .validation import run_suite

__all__ = ["RunConfig", "main", "run_subcommand", "time_grid", "load_config"]

SUBCOMMANDS = ("steady", "evolve", "transition", "populations", "validate")
DIGITS = 12
N_POPULATIONS = 10
STEADY_GAMMA_RANGE = (0.001, 0.5)


@dataclass(frozen=True)
class RunConfig:
    command: str = "steady"
    m: float = 1.0
    omega: float = 1.0
    gamma: float | None = None
    cutoff: float = 100.0
    level: int = 1
    tmax: float | None = None
    points: int | None = None
    spacing: str = "linear"
    bath_n: int = 2000
    format: str = "csv"
    out: str | None = None

    def params(self, default_gamma: float = 0.01) -> OscillatorParams:
        g = default_gamma if self.gamma is None else self.gamma
        return OscillatorParams(m=self.m, omega=self.omega, gamma=g, cutoff=self.cutoff)

    def resolved(self) -> "RunConfig":
        """Copy with the defaults that depend on the subcommand filled in."""
        default_gamma = 0.1 if self.command == "validate" else 0.01
        gamma = self.gamma
        if gamma is None and self.command != "steady":
            gamma = default_gamma
        p = self.params(default_gamma)
        tmax = self.tmax or (20.0 / p.gamma if p.gamma > 0 else 100.0 / p.omega)
        points = self.points or (12 if self.command == "steady" else 200)
        return replace(self, gamma=gamma, tmax=tmax, points=points)

    def validate(self) -> None:
        if self.command not in SUBCOMMANDS:
            raise UsageError(f"unknown subcommand {self.command!r}")
        if self.level not in (0, 1):
            raise UsageError(f"level must be 0 or 1, got {self.level}")
        if self.spacing not in ("linear", "log"):
            raise UsageError(f"spacing must be 'linear' or 'log', got {self.spacing!r}")
        if self.format not in ("csv", "json"):
            raise UsageError(f"format must be 'csv' or 'json', got {self.format!r}")
        if self.points is not None and self.points < 2:
            raise UsageError("points must be at least 2")
        if self.tmax is not None and not self.tmax > 0:
            raise UsageError("tmax must be positive")
        self.params()


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, raw: str):
    kind = _TYPES[key]
    if "int" in kind:
        return int(raw)
    if "float" in kind:
        return float(raw)
    return raw


def load_config(path: str) -> dict:
    """Read flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key not in _TYPES or key == "command":
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                out[key] = _coerce(key, value)
            except ValueError as exc:
                raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="harmonic-atom",
        description="Harmonic atom coupled to a vacuum field: covariances, "
                    "transition probabilities and oracle checks.",
    )
    parser.add_argument("command", choices=SUBCOMMANDS)
    parser.add_argument("--m", type=float)
    parser.add_argument("--omega", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--cutoff", type=float)
    parser.add_argument("--level", type=int, help="initial Fock level (0 or 1)")
    parser.add_argument("--tmax", type=float)
    parser.add_argument("--points", type=int)
    parser.add_argument("--spacing", choices=("linear", "log"))
    parser.add_argument("--bath-n", dest="bath_n", type=int)
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--out", help="output file (stdout when omitted)")
    parser.add_argument("--config", help="key=value file; flags take precedence")
    return parser


def resolve_config(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    values = load_config(ns.config) if ns.config else {}
    for key in _TYPES:
        flag = getattr(ns, key, None)
        if flag is not None:
            values[key] = flag
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def time_grid(cfg: RunConfig, params: OscillatorParams) -> np.ndarray:
    """Linear grid from 0, or log grid from ``1/cutoff``, up to ``tmax``.

    Raises
    ------
    UsageError
        If a positive grid point falls inside the initial stretch where the
        model's covariance sits below the uncertainty bound.
    """
    cfg = cfg.resolved()
    tmax, points = cfg.tmax, cfg.points
    if cfg.spacing == "log":
        start = 1.0 / params.cutoff
        if tmax <= start:
            raise UsageError(f"log spacing needs tmax > 1/cutoff = {start:g}")
        t = np.geomspace(start, tmax, points)
    else:
        t = np.linspace(0.0, tmax, points)
    onset = uncertainty_onset_time(params)
    if params.gamma > 0 and np.any((t > 0) & (t < onset)):
        raise UsageError(
            f"time grid has points in (0, {onset:.6g}), where the local-damping model "
            "violates the uncertainty bound; use a coarser grid or log spacing"
        )
    return t


# ----------------------------------------------------------------------------
# subcommands


@dataclass
class Table:
    columns: list[str]
    rows: list[list[float]]
    units: str
    notes: dict


def _units(params: OscillatorParams) -> str:
    return ("hbar=1; emitted in units of omega=1: t*omega, gamma/omega, cutoff/omega, "
            "<Q^2>*m*omega, <P^2>/(m*omega), <{Q,P}>/2 dimensionless")


def _scales(params: OscillatorParams):
    mw = params.m * params.omega
    return params.omega, mw, 1.0 / mw


def _steady(cfg: RunConfig) -> Table:
    base = cfg.params()
    if cfg.gamma is None:
        gammas = np.geomspace(*STEADY_GAMMA_RANGE, cfg.resolved().points) * base.omega
    else:
        gammas = np.array([cfg.gamma])
    w, q_scale, p_scale = _scales(base)
    rows = []
    for g in gammas:
        p = base.with_gamma(float(g))
        st = stationary_covariance(p)
        rep = transition_report(p, None)
        rows.append([g / w, st.qq * q_scale, st.pp * p_scale, st.qp, st.det,
                     rep[(0, 0)], rep[(0, 1)], rep[(0, 0)] + rep[(0, 1)],
                     rep[(1, 0)], rep[(1, 1)], rep[(1, 2)]])
    cols = ["gamma", "qq", "pp", "qp", "det", "P00", "P01", "P00+P01", "P10", "P11", "P12"]
    return Table(cols, rows, _units(base), {})


def _evolve(cfg: RunConfig) -> Table:
    p = cfg.params()
    w, q_scale, p_scale = _scales(p)
    rows = []
    for t in time_grid(cfg, p):
        intr, ind = intrinsic_induced_split(p, cfg.level, float(t))
        tot = intr + ind
        rows.append([t * w, tot.qq * q_scale, tot.pp * p_scale, tot.qp,
                     intr.qq * q_scale, intr.pp * p_scale, intr.qp,
                     ind.qq * q_scale, ind.pp * p_scale, ind.qp,
                     tot.qq * tot.pp - tot.qp**2])
    cols = ["t", "qq", "pp", "qp", "qq_intrinsic", "pp_intrinsic", "qp_intrinsic",
            "qq_induced", "pp_induced", "qp_induced", "det"]
    return Table(cols, rows, _units(p), {})


def _transition(cfg: RunConfig) -> Table:
    p = cfg.params()
    t = time_grid(cfg, p)
    cmp = compare_methods(p, t)
    rows = []
    for i, ti in enumerate(t):
        c0 = evolve_covariance(p, 0, float(ti))
        rows.append([ti * p.omega, cmp.exact[i], cmp.tdpt[i], cmp.einstein[i],
                     cmp.exact[i] - cmp.einstein[i], p00(c0, p), p01(c0, p)])
    cols = ["t", "P10", "P10_tdpt", "P10_einstein", "P10_minus_einstein", "P00", "P01"]
    notes = {"saturation_gap": cmp.saturation_gap, "jolt_gap": cmp.jolt_gap}
    return Table(cols, rows, _units(p), notes)


def _populations(cfg: RunConfig) -> Table:
    p = cfg.params()
    n = N_POPULATIONS - 1
    rows = []
    for t in time_grid(cfg, p):
        c0 = evolve_covariance(p, 0, float(t))
        if cfg.level == 0:
            pops, _ = fock_populations(c0, n, params=p)
        else:
            c1 = evolve_covariance(p, 1, float(t))
            pops = excited_populations(c0, c1, n, params=p)
        rows.append([t * p.omega, *pops, 1.0 - pops.sum()])
    cols = ["t", *(f"p{k}" for k in range(N_POPULATIONS)), "tail"]
    return Table(cols, rows, _units(p), {})


def _validate(cfg: RunConfig) -> tuple[Table, bool]:
    p = cfg.params(default_gamma=0.1)
    checks = run_suite(p, cfg.bath_n)
    rows = [[c.name, "pass" if c.passed else "fail", c.measured, c.tolerance, c.detail]
            for c in checks]
    table = Table(["check", "status", "measured", "tolerance", "detail"], rows, _units(p), {})
    return table, all(c.passed for c in checks)


# ----------------------------------------------------------------------------
# output


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    value = float(value)
    if value == 0:
        return "0"
    return f"{value:.{DIGITS}g}"


def _provenance(cfg: RunConfig) -> dict:
    try:
        ver = version("harmonic-atom")
    except PackageNotFoundError:
        ver = "unknown"
    conf = {k: v for k, v in asdict(cfg.resolved()).items() if k != "out"}
    if conf["gamma"] is None:
        conf["gamma"] = "sweep {:g}..{:g} (log)".format(*STEADY_GAMMA_RANGE)
    return {"program": "harmonic-atom", "version": ver, "config": conf}


def _csv_cell(text: str) -> str:
    return f'"{text}"' if ("," in text or '"' in text) else text


def render(cfg: RunConfig, table: Table) -> str:
    prov = _provenance(cfg)
    if cfg.format == "json":
        doc = {
            **prov,
            "units": table.units,
            "notes": {k: _fmt(v) for k, v in sorted(table.notes.items())},
            "columns": table.columns,
            "rows": [[_fmt(v) for v in row] for row in table.rows],
        }
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"
    lines = [f"# program: {prov['program']} {prov['version']}"]
    lines += [f"# {k}: {_fmt(v) if isinstance(v, float) else v}" for k, v in prov["config"].items()]
    lines.append(f"# units: {table.units}")
    lines += [f"# {k}: {_fmt(v)}" for k, v in sorted(table.notes.items())]
    lines.append(",".join(table.columns))
    lines += [",".join(_csv_cell(_fmt(v)) for v in row) for row in table.rows]
    return "\n".join(lines) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".harmonic-atom-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_subcommand(cfg: RunConfig) -> tuple[int, str]:
    """Run one subcommand; returns ``(exit_status, rendered_output)``."""
    cfg.validate()
    p = cfg.params(default_gamma=0.1 if cfg.command == "validate" else 0.01)
    if p.gamma >= p.omega:
        print(f"warning: gamma={p.gamma:g} >= omega={p.omega:g}; results leave the "
              "underdamped regime", file=sys.stderr)
    status = 0
    if cfg.command == "validate":
        table, ok = _validate(cfg)
        status = 0 if ok else 1
    else:
        table = {"steady": _steady, "evolve": _evolve, "transition": _transition,
                 "populations": _populations}[cfg.command](cfg)
    text = render(cfg, table)
    if cfg.out:
        write_atomic(cfg.out, text)
    return status, text


def _error_line(exc: BaseException) -> str:
    return "error: " + json.dumps({"type": type(exc).__name__, "message": str(exc)})


def main(argv=None) -> int:
    try:
        cfg = resolve_config(argv)
        status, text = run_subcommand(cfg)
    except (HarmonicAtomError, ValueError, OSError) as exc:
        print(_error_line(exc), file=sys.stderr)
        return 2
    if not cfg.out:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
