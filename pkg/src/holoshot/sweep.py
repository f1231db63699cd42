"""Error sweeps over a list of gates, written as CSV or JSON plus a manifest."""

from __future__ import annotations

import csv
import io
import json
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .error_models import (
    InputState,
    IntegratorConfig,
    QuadratureConfig,
    average_fidelity,
    dephasing_fidelities,
    detuning_avg_approx,
    detuning_fidelity,
    detuning_fidelity_approx,
    detuning_unitary,
    propagated_fidelities,
    pulse_area_avg_approx,
    pulse_area_fidelity,
    pulse_area_fidelity_approx,
    pulse_area_unitary,
)
from .exceptions import InvalidInput
from .gate import GateParams, TargetRotation, synthesize

COLUMNS = (
    "error_kind",
    "error_product",
    "axis_alpha",
    "axis_beta",
    "rotation_angle",
    "gamma",
    "fidelity_exact",
    "fidelity_approx",
    "fidelity_simulated",
    "avg_fidelity",
    "method_notes",
)

ERROR_KINDS = ("dephasing", "pulse_area", "detuning")

_PI_EXPR = re.compile(r"^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def parse_angle(value) -> float:
    """A number, or a string such as ``"pi/6"``, ``"2*pi/3"`` or ``"0.5pi"``."""
    if isinstance(value, bool):
        raise InvalidInput(f"angle must be a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _PI_EXPR.match(value)
        if m:
            coef = m.group(1)
            num = float(coef) if coef not in ("", "+", "-") else (-1.0 if coef == "-" else 1.0)
            den = float(m.group(2)) if m.group(2) else 1.0
            return num * math.pi / den
        try:
            return float(value)
        except ValueError:
            pass
    raise InvalidInput(f"cannot read an angle from {value!r}")


def parse_target(entry: dict) -> tuple[str, TargetRotation]:
    """Read one gate entry: an ``axis`` label, ``alpha``/``beta`` or a ``bloch`` vector, plus ``angle``."""
    if not isinstance(entry, dict) or "angle" not in entry:
        raise InvalidInput(f"gate entry needs an 'angle': {entry!r}")
    angle = parse_angle(entry["angle"])
    if "axis" in entry:
        label = str(entry["axis"]).upper()
        return label, TargetRotation.named(label, angle)
    if "bloch" in entry:
        return "bloch", TargetRotation.from_bloch(entry["bloch"], angle)
    if "alpha" in entry:
        alpha = parse_angle(entry["alpha"])
        beta = parse_angle(entry.get("beta", 0.0))
        return "custom", TargetRotation.from_axis_angles(alpha, beta, angle)
    raise InvalidInput(f"gate entry needs 'axis', 'alpha'/'beta' or 'bloch': {entry!r}")


@dataclass(frozen=True)
class SweepSpec:
    error_kind: str
    start: float
    stop: float
    count: int
    gates: tuple[dict, ...]
    omega: float = 1.0
    input: InputState | None = None
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    workers: int = 1
    output: str | None = None
    format: str = "csv"

    def __post_init__(self) -> None:
        if self.error_kind not in ERROR_KINDS:
            raise InvalidInput(f"error_kind must be one of {ERROR_KINDS}, got {self.error_kind!r}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)) or self.start > self.stop:
            raise InvalidInput(f"error-product range needs finite start <= stop, got {self.start}..{self.stop}")
        if self.count < 2:
            raise InvalidInput(f"error-product range needs count >= 2, got {self.count}")
        if self.error_kind == "dephasing" and self.start < 0:
            raise InvalidInput("dephasing error product must be >= 0")
        if not self.gates:
            raise InvalidInput("no gates specified")
        if self.workers < 1:
            raise InvalidInput("workers must be >= 1")
        if self.format not in ("csv", "json"):
            raise InvalidInput(f"format must be 'csv' or 'json', got {self.format!r}")
        for g in self.gates:
            parse_target(g)

    @classmethod
    def from_config(cls, cfg: dict) -> "SweepSpec":
        if not isinstance(cfg, dict):
            raise InvalidInput("sweep configuration must be a JSON object")
        known = {"error_kind", "error_product", "gates", "omega", "input", "integrator",
                 "quadrature", "workers", "output", "format"}
        unknown = set(cfg) - known
        if unknown:
            raise InvalidInput(f"unknown sweep configuration keys: {sorted(unknown)}")
        if "error_kind" not in cfg:
            raise InvalidInput("sweep configuration needs 'error_kind'")
        rng = cfg.get("error_product", {})
        try:
            start, stop = float(rng["start"]), float(rng["stop"])
            count = int(rng.get("count", 21))
        except (KeyError, TypeError, ValueError):
            raise InvalidInput("'error_product' needs numeric 'start', 'stop' and integer 'count'") from None
        inp = cfg.get("input")
        try:
            state = None if inp is None else InputState(parse_angle(inp["theta"]), parse_angle(inp.get("varphi", 0.0)))
            integ = IntegratorConfig(**cfg.get("integrator", {}))
            quad = QuadratureConfig(**cfg.get("quadrature", {}))
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed input/integrator/quadrature section: {exc}") from None
        return cls(
            error_kind=cfg["error_kind"],
            start=start,
            stop=stop,
            count=count,
            gates=tuple(cfg.get("gates") or ()),
            omega=float(cfg.get("omega", 1.0)),
            input=state,
            integrator=integ,
            quadrature=quad,
            workers=int(cfg.get("workers", 1)),
            output=cfg.get("output"),
            format=cfg.get("format", "csv"),
        )

    def error_products(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    def echo(self) -> dict:
        d = asdict(self)
        d["gates"] = list(self.gates)
        return d


def fig2_spec(**overrides) -> SweepSpec:
    """Dephasing on X, Y and Z rotations by pi/6 and pi/3 for epsT in [0, 0.1]."""
    gates = tuple({"axis": axis, "angle": angle} for axis in "XYZ" for angle in ("pi/6", "pi/3"))
    base = dict(error_kind="dephasing", start=0.0, stop=0.1, count=21, gates=gates)
    base.update(overrides)
    return SweepSpec(**base)


def _quad_note(quad: QuadratureConfig) -> str:
    if quad.mode == "gauss":
        return f"gauss-legendre {quad.n_theta}x{quad.n_phi}"
    return f"monte-carlo n={quad.samples} seed={quad.seed}"


def _gate_rows(spec: SweepSpec, index: int, seed: int) -> list[dict]:
    label, target = parse_target(spec.gates[index])
    p = synthesize(target, spec.omega)
    quad = spec.quadrature
    if quad.mode == "monte_carlo":
        # one independent, reproducible stream per gate
        quad = QuadratureConfig("monte_carlo", quad.n_theta, quad.n_phi, quad.samples, seed + index)
    rows = []
    for x in spec.error_products():
        x = float(x)
        exact = approx = simulated = None
        if spec.error_kind == "dephasing":
            sim = lambda th, ph: dephasing_fidelities(p, th, ph, x, spec.integrator)  # noqa: E731
            closed = None
            sim_note = f"rk4-fixed {spec.integrator.steps} steps"
        else:
            if spec.error_kind == "pulse_area":
                u = pulse_area_unitary(p, x / p.period)
                closed = lambda th, ph: pulse_area_fidelity(th, p.gamma, x) + 0.0 * ph  # noqa: E731
                approx_state = lambda th: pulse_area_fidelity_approx(th, p.gamma, x).value  # noqa: E731
                approx_avg = pulse_area_avg_approx(p.gamma, x).value
            else:
                u = detuning_unitary(p, x / p.period)
                closed = lambda th, ph: detuning_fidelity(th, p.gamma, x) + 0.0 * ph  # noqa: E731
                approx_state = lambda th: detuning_fidelity_approx(th, p.gamma, x).value  # noqa: E731
                approx_avg = detuning_avg_approx(p.gamma, x).value
            sim = lambda th, ph, u=u: propagated_fidelities(p, u, th, ph)  # noqa: E731
            sim_note = "unitary propagation"

        avg_sim = average_fidelity(sim, quad, "simulated", x, p).value
        avg_closed = None if closed is None else average_fidelity(closed, quad, "closed_form_exact", x, p).value
        if spec.input is None:
            simulated, exact = avg_sim, avg_closed
            approx = None if closed is None else approx_avg
            where = "input=sphere-average"
        else:
            s = spec.input
            simulated = float(sim(np.array([s.theta]), np.array([s.varphi]))[0])
            if closed is not None:
                exact = float(closed(s.theta, s.varphi))
                approx = approx_state(s.theta)
            where = f"input=theta:{s.theta:.17g}/varphi:{s.varphi:.17g}"
        headline = avg_sim if closed is None else avg_closed
        notes = [
            where,
            "exact=closed form" if closed is not None else "exact=n/a",
            "approx=second order" if closed is not None else "approx=n/a",
            f"simulated={sim_note}",
            f"avg={'closed form' if closed is not None else 'simulated'} {_quad_note(quad)}",
        ]
        rows.append({
            "error_kind": spec.error_kind,
            "error_product": x,
            "axis_alpha": p.alpha,
            "axis_beta": p.beta,
            "rotation_angle": target.angle,
            "gamma": p.gamma,
            "fidelity_exact": exact,
            "fidelity_approx": approx,
            "fidelity_simulated": simulated,
            "avg_fidelity": headline,
            "method_notes": "; ".join(notes),
            "_label": label,
        })
    return rows


def _clamp(v: float) -> float:
    return min(1.0, max(0.0, float(v)))


def run_sweep(spec: SweepSpec, seed: int = 0) -> list[dict]:
    """Rows ordered by (gate index, error product) regardless of worker count."""
    indices = range(len(spec.gates))
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            chunks = list(pool.map(_gate_rows, [spec] * len(spec.gates), indices, [seed] * len(spec.gates)))
    else:
        chunks = [_gate_rows(spec, i, seed) for i in indices]
    rows = [r for chunk in chunks for r in chunk]
    for r in rows:
        for key in ("fidelity_exact", "fidelity_approx", "fidelity_simulated", "avg_fidelity"):
            if r[key] is not None:
                r[key] = _clamp(r[key])
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def render(rows: list[dict], fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in COLUMNS])
        return buf.getvalue()
    payload = {
        "columns": list(COLUMNS),
        "rows": [{c: (float(_fmt(r[c])) if isinstance(r[c], float) else r[c]) for c in COLUMNS} for r in rows],
    }
    return json.dumps(payload, indent=2) + "\n"


def manifest_path(out: str | Path) -> Path:
    return Path(out).with_suffix(".manifest.json")


def build_manifest(command: str, config: dict, seed: int, monte_carlo: bool, started: float, rows: int) -> dict:
    return {
        "tool": "holoshot",
        "tool_version": __version__,
        "command": command,
        "config": config,
        "seed": seed,
        "monte_carlo": monte_carlo,
        "rows": rows,
        # everything that varies between identical runs lives under this key
        "timestamp": {
            "started_utc": datetime.fromtimestamp(started, timezone.utc).isoformat(),
            "wall_clock_seconds": time.time() - started,
        },
    }


def write_outputs(text: str, out: str | Path, manifest: dict) -> None:
    out = Path(out)
    with open(out, "w", newline="") as fh:
        fh.write(text)
    with open(manifest_path(out), "w", newline="") as fh:
        fh.write(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
