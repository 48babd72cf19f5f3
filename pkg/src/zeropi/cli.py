"""Command-line runner for the experiment presets."""
from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy

from .config import ConfigError, ExperimentConfig, load_config
from .noise import calibrate_S0, unit_gamma_10
from .presets import CALIBRATION_FLUXES, PRESETS, RunSettings, gnuplot_script

MANIFEST = "run_manifest.json"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    listing = "\n".join(f"  {name:<14} {desc}" for name, (_, desc) in PRESETS.items())
    parser = _Parser(
        prog="zeropi",
        description="Spectra, relaxation and driven dynamics of the 0-pi qubit.",
        epilog=f"presets:\n{listing}",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--config", type=Path, help="YAML or JSON configuration file")
    parser.add_argument("--preset", choices=sorted(PRESETS), metavar="NAME", help="experiment to run (see below)")
    parser.add_argument("--set", type=int, choices=(1, 2, 3), help="built-in parameter set")
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: ./out)")
    parser.add_argument("--levels", type=int, metavar="K", help="eigenvalues per sweep point or basis truncation")
    parser.add_argument("--points", type=int, metavar="N", help="flux grid points")
    parser.add_argument("--dt", type=float, metavar="NS", help="time step in ns")
    parser.add_argument("--T", type=float, metavar="NS", help="final time in ns")
    parser.add_argument("--calibrate-T1", type=float, metavar="US", help="calibrate S0 to this T1 in microseconds")
    parser.add_argument("--basis", choices=("oscillator", "grid"), help="representation of modes 2 and 3")
    parser.add_argument("--full-basis", action="store_true", help="propagate in the untruncated basis")
    parser.add_argument("--workers", type=int, default=1, help="processes for flux sweeps")
    parser.add_argument("--gnuplot-script", action="store_true", help="also write plot.gp for the CSV outputs")
    return parser


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _versions() -> dict:
    try:
        package = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        package = "unknown"
    return {"package": package, "python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__}


def _prepare_out(out: Path) -> Path:
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc.strerror}") from exc
    return out


def _settings(args, cfg: ExperimentConfig) -> RunSettings:
    if args.set is not None:
        cfg = cfg.with_set(args.set)
    if args.basis is not None:
        cfg = cfg.with_basis(args.basis)
    return RunSettings(
        config=cfg,
        out=args.out,
        levels=args.levels,
        points=args.points,
        dt=args.dt,
        T=args.T,
        calibrate_T1=args.calibrate_T1,
        full_basis=args.full_basis or bool(cfg.run.get("full_basis", False)),
        workers=args.workers,
        explicit_set=args.set is not None or (args.config is not None and cfg.set_name != "set1"),
    )


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    preset = args.preset or cfg.run.get("preset")
    if preset is not None and preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}")
    if preset is None and args.calibrate_T1 is None:
        parser.error("nothing to do: give --preset or --calibrate-T1")
    settings = _settings(args, cfg)
    out = _prepare_out(args.out)

    started = time.time()
    manifest = {
        "argv": list(sys.argv[1:] if argv is None else argv),
        "preset": preset,
        "config": settings.config.as_dict(),
        "settings": {k: getattr(settings, k) for k in ("levels", "points", "dt", "T", "calibrate_T1", "full_basis")},
        "versions": _versions(),
    }
    if preset is None:
        unit = unit_gamma_10(settings.config.params, CALIBRATION_FLUXES, settings.config.space)
        S0 = calibrate_S0(unit, args.calibrate_T1)
        path = out / "calibration.csv"
        path.write_text(f"target_T1_us,S0_ns\n{args.calibrate_T1:.9g},{S0:.9g}\n")
        files, checks, info = [path], {}, {"S0_ns": S0}
        print(f"S0 = {S0:.6g} ns for T1 = {args.calibrate_T1:g} us")
    else:
        func, _ = PRESETS[preset]
        result = func(settings)
        files, checks, info = result.files, result.checks, result.info
    if args.gnuplot_script:
        gp = out / "plot.gp"
        gp.write_text(gnuplot_script([f for f in files if f.suffix == ".csv"]))
        files = [*files, gp]

    manifest.update(
        files={f.name: _sha256(f) for f in files},
        checks=checks,
        info=info,
        elapsed_s=round(time.time() - started, 3),
    )
    text = json.dumps(_finite(manifest), indent=2, default=_json_default, allow_nan=False)
    (out / MANIFEST).write_text(text + "\n")
    for name, ok in checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    print(f"wrote {len(files)} file(s) and {MANIFEST} to {out}")
    return 0


def _finite(value):
    """Replace non-finite floats by strings so the manifest stays strict JSON."""
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    if isinstance(value, (float, np.floating)) and not np.isfinite(value):
        return str(float(value))
    return value


def _json_default(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"cannot serialise {type(value).__name__}")


def main(argv=None) -> int:
    try:
        return run(argv)
    except (ConfigError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
