"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration
error, 3 rotating-wave approximation warning.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .error_models import IntegratorConfig, QuadratureConfig
from .exceptions import HoloshotError
from .gate import check_rwa, map_to_lasers, params_to_physical, synthesize
from .sweep import (
    SweepSpec,
    build_manifest,
    fig2_spec,
    manifest_path,
    parse_target,
    render,
    run_sweep,
    write_outputs,
)
from .verify import format_report, run_battery

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_RWA = 0, 1, 2, 3


class UsageError(Exception):
    pass


def load_config(value: str | None) -> dict:
    """Inline JSON (anything starting with ``{``) or a path to a JSON file."""
    if value is None:
        return {}
    text = value if value.lstrip().startswith("{") else None
    if text is None:
        try:
            text = Path(value).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read config {value!r}: {exc.strerror}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    return cfg


def _complex(value, name: str) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    raise UsageError(f"{name} must be a number or a [re, im] pair, got {value!r}")


def _pair(z: complex) -> list[float]:
    return [z.real, z.imag]


def cmd_synth(args) -> int:
    cfg = load_config(args.config)
    _, target = parse_target(cfg)
    omega = float(cfg.get("omega", 1.0))
    p = synthesize(target, omega)
    lasers = map_to_lasers(
        p,
        float(cfg.get("omega_e0", 1e4)),
        float(cfg.get("omega_e1", 1e4)),
        _complex(cfg.get("d0", 1.0), "d0"),
        _complex(cfg.get("d1", 1.0), "d1"),
    )
    rwa = check_rwa(p, lasers, float(cfg.get("rwa_threshold", 1e-3)))
    delta, o0, o1 = params_to_physical(p)
    out = {
        "alpha": p.alpha,
        "beta": p.beta,
        "gamma": p.gamma,
        "omega": p.omega,
        "T": p.period,
        "rotation_angle": target.angle,
        "Delta": delta,
        "Omega0": _pair(o0),
        "Omega1": _pair(o1),
        "lasers": {
            "nu": list(lasers.nu),
            "detuning": list(lasers.detuning),
            "g": list(lasers.envelope),
            "phase_offset": list(lasers.phase_offset),
            "dipole": [_pair(d) for d in lasers.dipole],
            "omega_e": list(lasers.omega_e),
        },
        "rwa": rwa.as_dict(),
    }
    text = json.dumps(out, indent=2) + "\n"
    _emit(text, args.out)
    if not rwa.passed:
        print(f"warning: rotating-wave approximation fails (max |Omega_j|/nu_j = {rwa.max_ratio:.3e})",
              file=sys.stderr)
        return EXIT_RWA
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_battery(seed=args.seed, samples=args.samples, perturb_hamiltonian=args.perturb_hamiltonian)
    text = format_report(results)
    _emit(text, args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def _sweep(args, spec: SweepSpec, command: str) -> int:
    started = time.time()
    rows = run_sweep(spec, seed=args.seed)
    text = render(rows, spec.format)
    out = args.out or spec.output
    if out is None:
        sys.stdout.write(text)
        return EXIT_OK
    manifest = build_manifest(command, spec.echo(), args.seed, spec.quadrature.mode == "monte_carlo",
                              started, len(rows))
    try:
        write_outputs(text, out, manifest)
    except OSError as exc:
        raise UsageError(f"cannot write {out!r}: {exc.strerror}") from None
    print(f"wrote {len(rows)} rows to {out} (manifest {manifest_path(out)})", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if not cfg:
        raise UsageError("sweep needs --config")
    if args.format:
        cfg["format"] = args.format
    return _sweep(args, SweepSpec.from_config(cfg), "sweep")


def cmd_fig2(args) -> int:
    cfg = load_config(args.config)
    overrides = {}
    if "integrator" in cfg:
        overrides["integrator"] = IntegratorConfig(**cfg["integrator"])
    if "quadrature" in cfg:
        overrides["quadrature"] = QuadratureConfig(**cfg["quadrature"])
    if "workers" in cfg:
        overrides["workers"] = int(cfg["workers"])
    if args.format:
        overrides["format"] = args.format
    return _sweep(args, fig2_spec(**overrides), "fig2")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON config: file path or inline object")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output path")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for random draws (default 0)")
    common.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(
        prog="holoshot", parents=[common],
        description="Single-shot holonomic one-qubit gates on a three-level lambda system.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("synth", parents=[common], help="synthesize gate and laser parameters for a target rotation")
    v = sub.add_parser("verify", parents=[common], help="run the invariant battery")
    v.add_argument("--samples", type=int, default=200, help="random draws per randomized check")
    v.add_argument("--perturb-hamiltonian", type=float, default=0.0, metavar="STRENGTH",
                   help="add STRENGTH*Omega|b><b| to H_eff in the holonomy checks (fault injection)")
    sub.add_parser("sweep", parents=[common], help="fidelity sweep over an error product")
    sub.add_parser("fig2", parents=[common], help="six-curve dephasing dataset (X, Y, Z at pi/6, pi/3)")
    return parser


COMMANDS = {"synth": cmd_synth, "verify": cmd_verify, "sweep": cmd_sweep, "fig2": cmd_fig2}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("config", None), ("out", None), ("seed", 0), ("format", None)):
        if not hasattr(args, name):
            setattr(args, name, default)
    if args.seed < 0:
        parser.error("--seed must be non-negative")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, HoloshotError, ValueError, TypeError, KeyError) as exc:
        print(f"holoshot {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _emit(text: str, out: str | None) -> None:
    sys.stdout.write(text)
    if out:
        try:
            with open(out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {out!r}: {exc.strerror}") from None


if __name__ == "__main__":
    sys.exit(main())
