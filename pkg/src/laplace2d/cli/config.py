"""Run configuration: typed parameters per subcommand, JSON config files, validation."""

import json
from dataclasses import dataclass, field
from pathlib import Path


class UsageError(ValueError):
    """Bad command line or configuration (exit code 2)."""


@dataclass(frozen=True)
class Param:
    type: type
    default: object
    help: str = ""
    choices: tuple = None
    check: object = None  # callable returning an error message or None


def _positive(v):
    return None if v > 0 else "must be positive"


def _nonzero(v):
    return None if v != 0 else "must be nonzero"


def _even_min8(v):
    return None if v >= 8 and v % 2 == 0 else "must be an even integer >= 8"


def _at_least(k):
    return lambda v: None if v >= k else f"must be >= {k}"


def _unit_interval(v):
    return None if 0 < v < 1 else "must lie in (0, 1)"


def _a_ladder(v):
    return None if v > 0 and v != 1 else "must be positive and != 1"


def _gamma(v):
    return None if v > 1 else "must be > 1"


GRID = Param(int, 32, "grid points per period", check=_even_min8)
SEED = Param(int, 0, "random seed")
C2P = Param(float, 2.0, "chain constant C2", check=_positive)
DEPTH = Param(float, 0.3, "distance of C from its double-root value", check=_positive)
FLUX = Param(int, 1, "flux quanta per cell", check=_at_least(1))
CHAIN_IN = Param(str, None, "chain JSON written by the chain subcommand")

SPECS = {
    "laplace-step": {
        "input": Param(str, None, "JSON with fields H and V (field_core format)"),
        "seed": SEED,
        "N": Param(int, 64, "grid size of the random example", check=_even_min8),
    },
    "chain": {
        "input": Param(str, None, "JSON with fields H0 and f0"),
        "n": Param(int, 2, "number of Laplace steps", check=_at_least(1)),
        "seed": SEED,
        "N": GRID,
    },
    "toda-check": {"n": Param(int, 4, "chain length", check=_at_least(2)), "seed": SEED, "N": GRID},
    "profile": {
        "kind": Param(str, "quasi", "chain type", choices=("quasi", "semi")),
        "C2": C2P,
        "depth": DEPTH,
        "a": Param(float, 0.5, "semi-cyclic offset a"),
        "samples": Param(int, 256, "samples per period", check=_at_least(16)),
    },
    "pde-solve": {
        "C2": C2P,
        "T_factor": Param(float, 1.02, "period in units of the threshold T*", check=_positive),
        "amplitude": Param(float, 0.5, "seed amplitude", check=_positive),
        "N": Param(int, 64, "grid size", check=_even_min8),
        "expect": Param(str, "nonconstant", "outcome counted as a pass", choices=("nonconstant", "collapse")),
    },
    "bands": {
        "source": Param(str, "landau", "operator", choices=("landau", "quasi")),
        "m": FLUX,
        "N": GRID,
        "Np": Param(int, 4, "quasi-momenta per direction", check=_at_least(2)),
        "J": Param(int, 3, "highest band index", check=_at_least(0)),
        "C2": C2P,
        "depth": DEPTH,
        "level": Param(int, 2, "chain level for source=quasi", choices=(0, 1, 2)),
    },
    "landau": {
        "H0": Param(float, 1.0, "constant field", check=_nonzero),
        "m": FLUX,
        "N": Param(int, 64, "grid size", check=_even_min8),
        "levels": Param(int, 3, "highest Landau level", check=_at_least(0)),
    },
    "dn80": {
        "m": FLUX,
        "N": GRID,
        "seed": SEED,
        "amplitude": Param(float, 0.3, "relative field modulation", check=_at_least(0.0)),
    },
    "theorem-check": {"chain": CHAIN_IN, "C2": C2P, "depth": DEPTH, "m": FLUX, "N": GRID, "Np": Param(int, 0, "band grid (0 = skip)")},
    "prop3-check": {"chain": CHAIN_IN, "C2": C2P, "depth": Param(float, 0.5, "distance below the double root", check=_positive), "m": FLUX, "N": GRID, "Np": Param(int, 4, "quasi-momenta searched per direction", check=_at_least(2))},
    "chern": {
        "m": FLUX,
        "N": Param(int, 16, "grid size", check=_even_min8),
        "Np": Param(int, 8, "quasi-momenta per direction", check=_at_least(2)),
        "band": Param(int, 0, "band index", check=_at_least(0)),
    },
    "liouville": {
        "sample": Param(str, "z", "analytic function", choices=("z", "z2", "mobius", "elliptic")),
        "h": Param(float, 1e-3, "grid step", check=_positive),
    },
    "discrete": {
        "mode": Param(str, "factorize", "identity family", choices=("factorize", "step", "toda", "sinh-gordon")),
        "input": Param(str, None, "operator JSON (discrete_laplace format)"),
        "seed": SEED,
        "N": Param(int, 6, "lattice window", check=_at_least(4)),
        "count": Param(int, 10, "random instances", check=_at_least(1)),
    },
    "oscillator1": {
        "h": Param(float, 0.7, "level spacing", check=_positive),
        "M": Param(int, 500, "truncation", check=_at_least(20)),
        "levels": Param(int, 10, "levels compared", check=_at_least(1)),
    },
    "oscillator2": {
        "a": Param(float, 2.0, "ladder ratio", check=_a_ladder),
        "c": Param(float, 1.0, "coupling", check=_nonzero),
        "nmax": Param(int, 5, "highest level", check=_at_least(0)),
        "M": Param(int, 400, "window size", check=_at_least(20)),
    },
    "theta-state": {
        "gamma": Param(float, 2.0, "shift ratio", check=_gamma),
        "m": Param(int, 0, "sector index"),
        "offsets": Param(int, 10, "lattice offsets for the normalization", check=_at_least(1)),
    },
    "cyclic-1d": {
        "h": Param(float, 0.5, "oscillator spacing", check=_positive),
        "M": Param(int, 10, "truncation", check=_at_least(4)),
    },
    "acceptance": {
        "criteria": Param(str, "1-12", "criteria to reproduce, e.g. '1,3,5-7' (13 runs the property suite)"),
    },
}

# --tol NAME=VALUE overrides, per subcommand
TOLERANCES = {
    "laplace-step": {"flux_H": 1e-10, "flux_V": 1e-9},
    "chain": {"link": 1e-7},
    "toda-check": {"toda": 1e-7, "spread": 1e-9},
    "profile": {"energy": 1e-8, "closure": 1e-9},
    "pde-solve": {"residual": 1e-10, "energy": 1e-4},
    "bands": {"flat": 1e-3},
    "landau": {"level": 0.02},
    "dn80": {"residual": 1e-8, "bloch": 1e-10, "eigen": 1e-4},
    "theorem-check": {"level": 5e-3},
    "prop3-check": {"level": 5e-3},
    "chern": {"integer": 1e-8},
    "liouville": {"residual": 1e-6, "order": 0.3},
    "discrete": {},
    "oscillator1": {"spectrum": 1e-8, "qplus": 1e-12},
    "oscillator2": {"residual": 1e-10},
    "theta-state": {"shift": 1e-12, "normalization": 1e-10},
    "cyclic-1d": {"shift": 1e-8},
    "acceptance": {},
}


@dataclass
class RunConfig:
    command: str
    params: dict
    output_dir: Path
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    self_test: bool = False


def _coerce(name, spec: Param, value):
    if value is None:
        return None
    try:
        if spec.type is int and isinstance(value, float) and not value.is_integer():
            raise ValueError
        v = spec.type(value)
    except (TypeError, ValueError):
        raise UsageError(f"parameter {name!r}: cannot read {value!r} as {spec.type.__name__}") from None
    if spec.choices is not None and v not in spec.choices:
        raise UsageError(f"parameter {name!r}: {v!r} not in {list(spec.choices)}")
    if spec.check is not None:
        msg = spec.check(v)
        if msg:
            raise UsageError(f"parameter {name!r} = {v!r} {msg}")
    return v


def load_config_file(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    unknown = set(data) - {"command", "params", "output_dir", "seed", "tolerances"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return data


def build_config(command, flag_params: dict, output_dir=None, config_file=None, tol_flags=(), self_test=False):
    """Merge config-file values with flags (flags win) and validate everything."""
    if command not in SPECS:
        raise UsageError(f"unknown command {command!r}")
    file_data = load_config_file(config_file) if config_file else {}
    if file_data.get("command", command) != command:
        raise UsageError(f"config is for {file_data['command']!r}, not {command!r}")
    specs = SPECS[command]
    raw = dict(file_data.get("params", {}))
    unknown = set(raw) - set(specs)
    if unknown:
        raise UsageError(f"unknown parameters for {command}: {sorted(unknown)}")
    raw.update({k: v for k, v in flag_params.items() if v is not None})
    params = {k: _coerce(k, s, raw.get(k, s.default)) for k, s in specs.items()}
    tols = dict(TOLERANCES[command])
    overrides = dict(file_data.get("tolerances", {}))
    for item in tol_flags:
        if "=" not in item:
            raise UsageError(f"--tol expects NAME=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k] = v
    for k, v in overrides.items():
        if k not in tols:
            raise UsageError(f"unknown tolerance {k!r} for {command}; known: {sorted(tols)}")
        try:
            tols[k] = float(v)
        except ValueError:
            raise UsageError(f"tolerance {k!r}: {v!r} is not a number") from None
        if not tols[k] > 0:
            raise UsageError(f"tolerance {k!r} must be positive")
    seed = params.get("seed", file_data.get("seed", 0))
    out = Path(output_dir or file_data.get("output_dir") or f"runs/{command}")
    return RunConfig(command, params, out, int(seed or 0), tols, self_test)
