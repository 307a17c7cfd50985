"""Command-line front end.

    hamevol OPTION [--config FILE] [--command trajectory|scan|resonance-info]
                   [--eps X] [--output PATH] [--plot-data PATH] [--antineutrino]

``OPTION`` 0 runs the Sun only, 1 adds a vacuum gap and an Earth crossing.
Settings come from built-in defaults, then a flat ``key = value`` config file,
then the flags. Every effective setting is echoed on standard output in the
same ``key = value`` form (other lines start with ``#``), so the echo can be
fed back as a config file.

Exit status: 0 on success, 1 for usage, configuration or I/O errors, 2 when
the numerics fail (including an exhausted scan budget).
"""

import argparse
import math
import sys
import time
from dataclasses import dataclass

from .constants import FERMI_MEV, GF, M_EV, NA, REARTH, RSUN
from .errors import IntegrationError
from .output import RecordWriter
from .physics import (
    DensityProfile,
    HamiltonianModel,
    MassSpectrum,
    MixingParameters,
    resonance_position,
)
from .propagation import (
    Mode,
    OuterLoopConfig,
    SplittingFactory,
    TrajectorySpec,
    iter_scan,
    iter_trajectory,
)
from .rk import StepControl

COMMANDS = ("trajectory", "scan", "resonance-info")

# key -> default; the type of the default decides how file values are parsed
DEFAULTS = {
    # stepper
    "MAXSTP": 1_000_000,
    "TINY": 1e-10,
    "SAFETY": 0.9,
    "PGROW": -0.2,
    "PSHRNK": -0.25,
    "ERRCON": 1.89e-4,
    "Eps_Error": 1e-8,
    "dist": 1e-5,
    "dist_min": 1e-7,
    # scan loop
    "MAX_STEPS": 100_000,
    "MIN_STEPS": 10_000,
    "INIT_STEPS": 10_000,
    "DECREASE": 0.1,
    "INCREASE": 5.0,
    "Prob_Error": 0.01,
    "VarI": -2.39794,
    "VarF": -12.3979,
    # physics
    "N": 2,
    "theta12": 0.5857,
    "theta23": math.pi / 4,
    "theta13": 0.148,
    "mass1": 0.0,
    "mass2": 8.66e-3,
    "mass3": 5.03e-2,
    "energy": 1e7,
    "antineutrino": False,
    "density_profile": "solar-exponential",
    "density_table": "",
    "n0": 245.0,
    "lambda": 10.6,
    "earth_core_density": 11.0,
    "earth_mantle_density": 4.5,
    "earth_core_fraction": 0.55,
    # trajectory and output
    "samples": 101,
    "initial_flavor": 0,
    "vacuum_gap": 0.0,
    "length_scale": 1.0,
    "scan_length_scale": 1e-12,
    "resonance_form": "printed",
    "command": "trajectory",
    "output": "runge.out",
    "plot_data": "",
}

COMMENTS = {
    "Eps_Error": "Runge-Kutta tolerance",
    "dist": "initial step (1/eV)",
    "dist_min": "minimum step (1/eV)",
    "Prob_Error": "scan tolerance on probabilities",
    "VarI": "scan start, log10(dm2 / 2E in eV)",
    "N": "number of flavors",
    "energy": "eV",
    "mass1": "eV",
    "n0": "central density, N_A / cm^3",
    "vacuum_gap": "metres",
    "length_scale": "trajectory length in units of RSun",
    "scan_length_scale": "scan trajectory length in units of RSun",
    "initial_flavor": "0 = electron",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="hamevol", description="Neutrino flavor evolution in the Sun and Earth.")
    p.add_argument("option", type=int, choices=(0, 1), metavar="OPTION",
                   help="0 = Sun only, 1 = Sun plus Earth")
    p.add_argument("--config", help="flat key = value settings file")
    p.add_argument("--command", choices=COMMANDS)
    p.add_argument("--eps", type=float, help="Runge-Kutta tolerance (Eps_Error)")
    p.add_argument("--output", help="record file (default runge.out)")
    p.add_argument("--plot-data", dest="plot_data", help="also write (coordinate, P_e) pairs here")
    p.add_argument("--antineutrino", action="store_true", default=None)
    return p


def _parse_value(key, text):
    default = DEFAULTS[key]
    try:
        if isinstance(default, bool):
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if isinstance(default, int):
            value = float(text)
            if not value.is_integer():
                raise ValueError(text)
            return int(value)
        if isinstance(default, float):
            return float(text)
    except ValueError:
        raise UsageError(f"bad value for {key}: {text!r}") from None
    return text


def read_config(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    values = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, text = (part.strip() for part in line.split("=", 1))
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = _parse_value(key, text)
    return values


@dataclass
class RunConfig:
    mode: Mode
    settings: dict
    model: HamiltonianModel
    control: StepControl
    outer: OuterLoopConfig
    spec: TrajectorySpec
    command: str
    output_path: str
    plot_path: str


def _profile(s, radius):
    kind = s["density_profile"]
    if kind == "solar-exponential":
        return DensityProfile.solar(s["n0"], s["lambda"], radius)
    if kind == "user-tabulated":
        if not s["density_table"]:
            raise UsageError("density_profile = user-tabulated needs density_table")
        try:
            return DensityProfile.from_file(s["density_table"], radius)
        except OSError as exc:
            raise UsageError(f"cannot read density table {s['density_table']}: {exc.strerror}") from None
    raise UsageError(f"unknown density_profile {kind!r}")


def resolve(mode, s):
    """Build the run objects from fully resolved settings."""
    if s["command"] not in COMMANDS:
        raise UsageError(f"unknown command {s['command']!r}")
    if s["resonance_form"] not in ("printed", "conventional"):
        raise UsageError(f"resonance_form must be printed or conventional, got {s['resonance_form']!r}")
    n = s["N"]
    if n not in (2, 3):
        raise UsageError(f"N must be 2 or 3, got {n}")
    if s["command"] == "scan" and n != 2:
        raise UsageError("the scan command needs N = 2")
    scale = s["scan_length_scale"] if s["command"] == "scan" else s["length_scale"]
    if not scale > 0:
        raise UsageError("length scales must be positive")
    try:
        if n == 2:
            mixing = MixingParameters(s["theta12"], n_flavors=2)
        else:
            mixing = MixingParameters(s["theta12"], s["theta23"], s["theta13"])
        masses = tuple(s[f"mass{i + 1}"] for i in range(n))
        model = HamiltonianModel(
            mixing,
            MassSpectrum(masses, s["energy"]),
            _profile(s, RSUN * scale),
            s["antineutrino"],
        )
        control = StepControl(
            eps=s["Eps_Error"],
            h1=s["dist"],
            hmin=s["dist_min"],
            maxstp=s["MAXSTP"],
            safety=s["SAFETY"],
            pgrow=s["PGROW"],
            pshrnk=s["PSHRNK"],
            errcon=s["ERRCON"],
            tiny=s["TINY"],
        )
        outer = OuterLoopConfig(
            s["MAX_STEPS"],
            s["MIN_STEPS"],
            s["INIT_STEPS"],
            s["DECREASE"],
            s["INCREASE"],
            s["Prob_Error"],
            s["VarI"],
            s["VarF"],
        )
        earth = DensityProfile.earth(
            s["earth_core_density"],
            s["earth_mantle_density"],
            s["earth_core_fraction"],
            REARTH * scale,
        )
        spec = TrajectorySpec(
            mode,
            sun_end=RSUN * scale,
            earth_segment=2 * REARTH * scale,
            initial_flavor=s["initial_flavor"],
            vacuum_gap=s["vacuum_gap"] * M_EV,
            earth_profile=earth,
        )
        if s["initial_flavor"] >= n:
            raise ValueError(f"initial_flavor {s['initial_flavor']} out of range for N = {n}")
        if s["samples"] < 2:
            raise ValueError(f"samples must be >= 2, got {s['samples']}")
        if s["command"] == "scan" and outer.var_start == outer.var_end:
            raise ValueError("VarI and VarF coincide: empty scan")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return RunConfig(mode, s, model, control, outer, spec, s["command"], s["output"], s["plot_data"])


def parse_and_validate(argv):
    """Resolve defaults, config file and flags into a :class:`RunConfig`.

    Raises :class:`UsageError` for bad settings; argparse exits on bad flags.
    """
    args = build_parser().parse_args(argv)
    settings = dict(DEFAULTS)
    if args.config:
        settings.update(read_config(args.config))
    overrides = {
        "command": args.command,
        "Eps_Error": args.eps,
        "output": args.output,
        "plot_data": args.plot_data,
        "antineutrino": args.antineutrino,
    }
    settings.update({k: v for k, v in overrides.items() if v is not None})
    mode = Mode.SUN if args.option == 0 else Mode.SUN_EARTH
    return resolve(mode, settings)


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def header_lines(config):
    """Informational header; non-setting lines are comments."""
    where = "the Sun" if config.mode is Mode.SUN else "the Sun and the Earth"
    lines = [
        f"# Starting evolution in {where}",
        f"# OPTION = {0 if config.mode is Mode.SUN else 1}  (0 = Sun only, 1 = Sun plus Earth)",
        "# Used parameters:",
    ]
    for key, value in config.settings.items():
        note = COMMENTS.get(key)
        line = f"{key} = {_format(value)}"
        lines.append(f"{line}  # {note}" if note else line)
    lines += [
        f"# fermi_MeV = {FERMI_MEV!r}",
        f"# m_eV = {M_EV!r}",
        f"# Gf = {GF!r}",
        f"# Na = {NA!r}",
        f"# RSun = {RSUN!r}",
        f"# REarth = {REARTH!r}",
    ]
    return lines


def _run_records(config, records, label, scale):
    n = config.model.n
    plot = None
    try:
        with RecordWriter(config.output_path, n, label, scale) as out:
            if config.plot_path:
                plot = RecordWriter(config.plot_path, n, label, scale, plot=True)
            for rec in records:
                out.write(rec)
                if plot is not None:
                    plot.write(rec)
    finally:
        if plot is not None:
            plot.close()
    return out.count


def run(config):
    """Execute the configured command; returns the process exit status."""
    start = time.perf_counter()
    for line in header_lines(config):
        print(line)
    s = config.settings
    try:
        if config.command == "resonance-info":
            r = resonance_position(config.model, conventional=s["resonance_form"] == "conventional")
            if r is None:
                print("# no resonance")
            else:
                print(f"# resonance at r = {r!r} 1/eV (r/RSun = {r / config.spec.sun_end:.6g})")
        elif config.command == "trajectory":
            records = iter_trajectory(config.model, config.spec, config.control, s["samples"])
            count = _run_records(config, records, "r/RSun", config.spec.sun_end)
            print(f"# wrote {count} records to {config.output_path}")
        else:
            factory = SplittingFactory(
                s["theta12"],
                s["energy"],
                config.model.profile,
                s["mass1"],
                s["antineutrino"],
            )
            records = iter_scan(factory, config.spec, config.outer, config.control)
            count = _run_records(config, records, "Var", 1.0)
            print(f"# wrote {count} records to {config.output_path}")
    except IntegrationError as exc:
        where = f" (segment starting at t={exc.position!r})" if exc.position is not None else ""
        print(f"{exc}{where}", file=sys.stderr)
        print(f"# {exc}")
        return 2
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    print(f"# t={time.perf_counter() - start:.3f}")
    return 0


def main(argv=None):
    try:
        config = parse_and_validate(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"hamevol: error: {exc}", file=sys.stderr)
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
