"""Command-line front end.

Subcommands wrap the library modules: static spectra, trajectory propagation,
Floquet analysis, parameter sweeps, continuum runs and closed-form prediction
tables.  Tables go to standard output; ``--csv``/``--json`` write files, and
``--plot`` renders a matplotlib figure next to the delimited output.  Every
file-writing run also writes a ``<output>.config.json`` echo of the resolved
configuration, and bundled presets (see ``--list-presets``) reproduce the
standard parameter scans of this model family.

Exit codes: 0 success, 2 configuration/usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources

import numpy as np

from . import analysis, continuum, floquet, plotting, sweep
from .errors import NumericalError
from .integrate import (
    DEFAULT_SAMPLES_PER_PERIOD,
    DEFAULT_STEPS_PER_PERIOD,
    default_z_end,
    min_population,
    propagate,
    write_trajectory_csv,
)
from .lattice import LatticeConfig, unit_excitation, unmodulated_spectrum
from .tableio import fmt

_LATTICE_KEYS = {"n_sites", "omega1", "omega2", "amplitude", "omega"}
_INTEGRATE_KEYS = {"z_end", "steps_per_period", "samples_per_period", "initial_site"}
_SWEEP_KEYS = {"parameter", "start", "stop", "points", "grid", "initial_site",
               "z_end", "steps_per_period", "samples_per_period", "eps_tol"}
_CONTINUUM_KEYS = {"n_guides", "ws1", "ws2", "guide_positions", "p", "w_x", "mu",
                   "omega", "half_width", "n_x", "dz", "z_max", "record_every"}
_SECTIONS = {"lattice": _LATTICE_KEYS, "integrate": _INTEGRATE_KEYS,
             "sweep": _SWEEP_KEYS, "continuum": _CONTINUUM_KEYS}


def _check_keys(section: str, data: dict) -> dict:
    allowed = _SECTIONS[section]
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"unknown keys in [{section}]: {sorted(unknown)}")
    return data


def load_run_config(path_or_text) -> dict:
    """Parse and validate a structured run-configuration document."""
    if isinstance(path_or_text, dict):
        doc = path_or_text
    else:
        with open(path_or_text) as fh:
            doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError("run configuration must be a JSON object")
    unknown = set(doc) - set(_SECTIONS)
    if unknown:
        raise ValueError(f"unknown sections: {sorted(unknown)}")
    for name, data in doc.items():
        if not isinstance(data, dict):
            raise ValueError(f"section [{name}] must be an object")
        _check_keys(name, data)
    return doc


def preset_names() -> list[str]:
    root = resources.files("darkfloquet") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> dict:
    root = resources.files("darkfloquet") / "presets"
    entry = root / f"{name}.json"
    if not entry.is_file():
        raise ValueError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return load_run_config(json.loads(entry.read_text()))


def _lattice_from(section: dict) -> LatticeConfig:
    missing = _LATTICE_KEYS - set(section)
    if missing:
        raise ValueError(f"lattice section missing keys: {sorted(missing)}")
    return LatticeConfig(int(section["n_sites"]), float(section["omega1"]),
                         float(section["omega2"]), float(section["amplitude"]),
                         float(section["omega"]))


def _sweep_spec_from(doc: dict) -> sweep.SweepSpec:
    if "lattice" not in doc or "sweep" not in doc:
        raise ValueError("sweep run needs [lattice] and [sweep] sections")
    base = _lattice_from(doc["lattice"])
    s = doc["sweep"]
    if "grid" in s:
        grid = np.asarray(s["grid"], dtype=float)
    else:
        for key in ("parameter", "start", "stop", "points"):
            if key not in s:
                raise ValueError(f"sweep section missing {key!r}")
        grid = np.linspace(float(s["start"]), float(s["stop"]), int(s["points"]))
    return sweep.SweepSpec(
        base,
        s["parameter"],
        grid,
        initial_site=int(s.get("initial_site", 1)),
        z_end=None if s.get("z_end") is None else float(s["z_end"]),
        steps_per_period=int(s.get("steps_per_period", DEFAULT_STEPS_PER_PERIOD)),
        samples_per_period=int(s.get("samples_per_period", DEFAULT_SAMPLES_PER_PERIOD)),
        eps_tol=None if s.get("eps_tol") is None else float(s["eps_tol"]),
    )


def _continuum_from(doc: dict) -> tuple[continuum.ContinuumConfig, int]:
    if "continuum" not in doc:
        raise ValueError("continuum run needs a [continuum] section")
    c = dict(doc["continuum"])
    grid = continuum.ContinuumGrid(
        half_width=float(c.get("half_width", 20.0)),
        n_x=int(c.get("n_x", 2048)),
        dz=float(c.get("dz", 0.005)),
        z_max=float(c.get("z_max", 400.0)),
    )
    if "guide_positions" in c:
        positions = tuple(float(x) for x in c["guide_positions"])
    else:
        positions = continuum.chain_positions(int(c["n_guides"]),
                                              float(c.get("ws1", 3.2)),
                                              float(c["ws2"]))
    config = continuum.ContinuumConfig(
        len(positions), float(c.get("p", 2.78)), float(c.get("w_x", 0.3)),
        float(c.get("mu", 0.2)), float(c.get("omega", 3.45 * math.pi / 100.0)),
        positions, grid,
    )
    return config, int(c.get("record_every", 10))


def _echo_config(doc: dict, out_path=None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True)
    print(f"resolved config:\n{text}", file=sys.stderr)
    if out_path is not None:
        sidecar = f"{out_path}.config.json"
        with open(sidecar, "w") as fh:
            fh.write(text + "\n")


def _parse_zend(text: str | None, config: LatticeConfig) -> float:
    if text is None:
        return default_z_end(config)
    text = text.strip()
    if text.endswith(("T", "t")):
        return float(text[:-1]) * config.period
    return float(text)


def _add_lattice_flags(parser, amplitude_default=None):
    parser.add_argument("--n", type=int, default=3, help="number of guides")
    parser.add_argument("--omega1", type=float, default=1.0, help="interior coupling")
    parser.add_argument("--omega2", type=float, default=1.0, help="boundary coupling")
    parser.add_argument("--a", type=float, default=amplitude_default,
                        help="drive amplitude")
    parser.add_argument("--omega", type=float, default=3.0, help="drive frequency")


def _lattice_from_args(args) -> LatticeConfig:
    amplitude = 0.0 if args.a is None else args.a
    return LatticeConfig(args.n, args.omega1, args.omega2, amplitude, args.omega)


def _lattice_doc(config: LatticeConfig) -> dict:
    return {"n_sites": config.n_sites, "omega1": config.omega1,
            "omega2": config.omega2, "amplitude": config.amplitude,
            "omega": config.omega}


# ---------------------------------------------------------------------------
# subcommands


def cmd_spectrum(args) -> int:
    config = _lattice_from_args(args)
    values = unmodulated_spectrum(config)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"eigenvalues": values.tolist()}, fh, indent=2)
            fh.write("\n")
    print("eigenvalue")
    for v in values:
        print(fmt(v))
    return 0


def cmd_propagate(args) -> int:
    if args.config:
        doc = load_run_config(args.config)
        config = _lattice_from(doc.get("lattice", {}))
        integ = doc.get("integrate", {})
        z_end = _parse_zend(str(integ["z_end"]) if "z_end" in integ else None, config)
        spp = int(integ.get("steps_per_period", DEFAULT_STEPS_PER_PERIOD))
        sampp = int(integ.get("samples_per_period", DEFAULT_SAMPLES_PER_PERIOD))
        site = int(integ.get("initial_site", 1))
    else:
        config = _lattice_from_args(args)
        z_end = _parse_zend(args.zend, config)
        spp, sampp, site = args.steps_per_period, args.samples_per_period, args.site
    traj = propagate(config, unit_excitation(config.n_sites, site), z_end, spp, sampp)
    doc = {"lattice": _lattice_doc(config),
           "integrate": {"z_end": z_end, "steps_per_period": spp,
                         "samples_per_period": sampp, "initial_site": site}}
    _echo_config(doc, args.csv)
    write_trajectory_csv(traj, args.csv)
    if args.plot:
        plotting.save_trajectory_figure(traj, args.plot)
    print(f"z_end={fmt(traj.z_samples[-1])} min_p1={fmt(min_population(traj, site))} "
          f"norm_drift={traj.norm_drift:.3e}")
    return 0


def cmd_floquet(args) -> int:
    config = _lattice_from_args(args)
    solution = floquet.solve(config, steps_per_period=args.steps_per_period)
    text = floquet.solution_to_json(solution, indent=2)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_sweep(args) -> int:
    if args.list_presets:
        for name in preset_names():
            print(name)
        return 0
    if args.preset:
        doc = load_preset(args.preset)
    elif args.config:
        doc = load_run_config(args.config)
    else:
        if not args.parameter:
            raise ValueError("need --preset, --config, or --parameter with --start/--stop/--points")
        config = _lattice_from_args(args)
        doc = {"lattice": _lattice_doc(config),
               "sweep": {"parameter": args.parameter, "start": args.start,
                         "stop": args.stop, "points": args.points}}
    spec = _sweep_spec_from(doc)
    result = sweep.run_sweep(spec, workers=args.workers)
    if args.refine:
        result = sweep.refine_extrema(spec, result, workers=args.workers)
    _echo_config(spec.to_dict(), args.csv)
    if args.csv:
        sweep.write_sweep_csv(result, args.csv)
    else:
        sys.stdout.write(sweep.sweep_csv_text(result))
    if args.plot:
        predictions = None
        if spec.parameter == "omega2":
            predictions = analysis.resonance_positions(spec.base.omega1,
                                                       spec.base.omega, 3)
        plotting.save_sweep_figure(result, args.plot, predictions)
    if result.messages:
        for idx, msg in result.messages:
            print(f"point {idx} flagged: {msg}", file=sys.stderr)
    return 0


def cmd_continuum(args) -> int:
    if args.action == "calibrate":
        grid = continuum.ContinuumGrid(z_max=args.zmax)
        cal = continuum.calibrate_coupling(args.spacing, p=args.p, w_x=args.wx,
                                           grid=grid)
        print(f"beat_period={fmt(cal.beat_period)}")
        print(f"coupling={fmt(cal.coupling)}")
        if args.json:
            with open(args.json, "w") as fh:
                json.dump({"spacing": args.spacing, "beat_period": cal.beat_period,
                           "coupling": cal.coupling}, fh, indent=2)
                fh.write("\n")
        return 0

    if args.preset:
        doc = load_preset(args.preset)
    elif args.config:
        doc = load_run_config(args.config)
    else:
        raise ValueError("continuum propagate needs --preset or --config")
    config, record_every = _continuum_from(doc)
    field = continuum.top_guide_mode(config)
    result = continuum.bpm_propagate(config, field, record_every=record_every,
                                     record_intensity=bool(args.plot))
    _echo_config(doc, args.csv)
    if args.csv:
        continuum.write_power_csv(result, args.csv)
    else:
        sys.stdout.write(continuum.power_csv_text(result))
    if args.plot:
        plotting.save_power_figure(result, args.plot)
    return 0


def cmd_bessel(args) -> int:
    zeros = analysis.bessel_zeros(args.n, args.count)
    rows = [[str(k + 1), fmt(z)] for k, z in enumerate(zeros)]
    text = "k,zero\n" + "\n".join(",".join(r) for r in rows) + "\n"
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_resonances(args) -> int:
    predictions = analysis.resonance_positions(args.omega1, args.omega, args.nmax)
    text = analysis.predictions_csv_text(predictions)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="darkfloquet",
        description="Driven waveguide-array simulator: spectra, trajectories, "
                    "Floquet analysis, parameter sweeps and continuum runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="eigenvalues of the unmodulated chain")
    _add_lattice_flags(p)
    p.add_argument("--json", help="also write eigenvalues as JSON")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("propagate", help="integrate a trajectory, write CSV")
    _add_lattice_flags(p)
    p.add_argument("--config", help="run-configuration JSON file")
    p.add_argument("--zend", help="propagation length; suffix T for periods (e.g. 50T)")
    p.add_argument("--site", type=int, default=1, help="initially excited guide")
    p.add_argument("--steps-per-period", type=int, default=DEFAULT_STEPS_PER_PERIOD)
    p.add_argument("--samples-per-period", type=int, default=DEFAULT_SAMPLES_PER_PERIOD)
    p.add_argument("--csv", required=True, help="trajectory CSV path")
    p.add_argument("--plot", help="render population traces to this image path")
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("floquet", help="quasi-energies, modes, dark-state data as JSON")
    _add_lattice_flags(p, amplitude_default=6.6)
    p.add_argument("--steps-per-period", type=int, default=DEFAULT_STEPS_PER_PERIOD)
    p.add_argument("--json", help="output path (default: stdout)")
    p.set_defaults(func=cmd_floquet)

    p = sub.add_parser("sweep", help="one-parameter scan, CSV plus config sidecar")
    _add_lattice_flags(p, amplitude_default=6.6)
    p.add_argument("--preset", help="bundled preset name")
    p.add_argument("--list-presets", action="store_true")
    p.add_argument("--config", help="run-configuration JSON file")
    p.add_argument("--parameter", choices=sweep.PARAMETERS)
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--refine", action="store_true",
                   help="re-sample around detected extrema at 10x density")
    p.add_argument("--workers", type=int, default=None,
                   help=f"process pool size (default ${sweep.WORKERS_ENV} or CPU count)")
    p.add_argument("--csv", help="output CSV path (default: stdout)")
    p.add_argument("--plot", help="render the scan panels to this image path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("continuum", help="beam-propagation runs and calibration")
    p.add_argument("action", choices=("propagate", "calibrate"))
    p.add_argument("--preset", help="bundled preset name (propagate)")
    p.add_argument("--config", help="run-configuration JSON file (propagate)")
    p.add_argument("--spacing", type=float, default=3.2, help="guide spacing (calibrate)")
    p.add_argument("--p", type=float, default=2.78, help="index contrast (calibrate)")
    p.add_argument("--wx", type=float, default=0.3, help="channel width (calibrate)")
    p.add_argument("--zmax", type=float, default=400.0, help="propagation length (calibrate)")
    p.add_argument("--csv", help="power-trace CSV path (default: stdout)")
    p.add_argument("--json", help="calibration JSON path")
    p.add_argument("--plot", help="render power traces and intensity map")
    p.set_defaults(func=cmd_continuum)

    p = sub.add_parser("bessel", help="zeros of an integer-order Bessel function")
    p.add_argument("--n", type=int, required=True, help="order")
    p.add_argument("--count", type=int, default=2, help="number of zeros")
    p.add_argument("--csv", help="output CSV path (default: stdout)")
    p.set_defaults(func=cmd_bessel)

    p = sub.add_parser("resonances", help="predicted resonant couplings table")
    p.add_argument("--omega1", type=float, required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--nmax", type=int, default=3)
    p.add_argument("--csv", help="output CSV path (default: stdout)")
    p.set_defaults(func=cmd_resonances)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
