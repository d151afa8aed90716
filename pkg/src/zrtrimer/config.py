"""Run configuration: strict `key = value` files with [section] headers.

Sections: [system], [pair.1], [pair.2], [pair.3], [grid], [solver],
[output].  Pair sections are indexed by the spectator particle, so
[pair.3] describes the interaction between particles 1 and 2.  Unknown
sections or keys are errors; missing optional sections fall back to
defaults.  See the bundled configs under zrtrimer/data/ for examples.
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass

from .potential import Q_CONVENTIONS
from .system import DEFAULT_MASS_SCALE, PairParams, ParticleSystem, UnitSystem


class ConfigError(ValueError):
    """Invalid or malformed run configuration."""


_ALLOWED = {
    "system": {"names", "masses", "mass_scale", "hartree_per_mk"},
    "pair": {"a", "r_eff", "p_shape"},
    "grid": {"rho_min", "rho_max", "n", "spacing"},
    "solver": {"q_convention", "regularized", "tol_res", "tol_u",
               "radial_n", "radial_rho_min", "radial_rho_max", "max_states"},
    "output": {"format", "path"},
}

_REQUIRED_HINT = (
    "required: [system] masses = m1, m2, m3 and [pair.1], [pair.2], "
    "[pair.3] each with a scattering length key 'a'")


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration."""

    system: ParticleSystem
    rho_min: float = 0.05
    rho_max: float = 4000.0
    n: int = 600
    spacing: str = "log"
    q_convention: str = "leading_term"
    regularized: bool = True
    tol_res: float = 1e-10
    tol_u: float = 1e-10
    radial_n: int = 8000
    radial_rho_min: float = 0.05
    radial_rho_max: float | None = None   # None means automatic
    max_states: int = 4
    out_format: str = "csv"
    out_path: str = "-"
    sha256: str = ""


def _floats(text: str, where: str, count: int | None = None) -> list[float]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse {text!r} as numbers") from exc
    if count is not None and len(vals) != count:
        raise ConfigError(f"{where}: expected {count} comma-separated values")
    return vals


def _float(section, key: str, default: float, where: str) -> float:
    raw = section.get(key)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{where}.{key}: cannot parse {raw!r} as a number") from exc


def _int(section, key: str, default: int, where: str) -> int:
    raw = section.get(key)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{where}.{key}: cannot parse {raw!r} as an integer") from exc


def _bool(section, key: str, default: bool, where: str) -> bool:
    raw = section.get(key)
    if raw is None:
        return default
    low = raw.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{where}.{key}: expected a boolean, got {raw!r}")


def _choice(section, key: str, default: str, allowed, where: str) -> str:
    raw = section.get(key, default)
    val = raw.strip()
    if val not in allowed:
        raise ConfigError(f"{where}.{key}: {val!r} not in {tuple(allowed)}")
    return val


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration; raises ConfigError on problems."""
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    for name in parser.sections():
        base = "pair" if name.startswith("pair.") else name
        if base not in _ALLOWED or (base == "pair"
                                    and name not in ("pair.1", "pair.2", "pair.3")):
            raise ConfigError(f"unknown section [{name}]")
        for key in parser[name]:
            if key not in _ALLOWED[base]:
                raise ConfigError(f"unknown key {key!r} in section [{name}]")

    if "system" not in parser:
        raise ConfigError(f"missing section [system]; {_REQUIRED_HINT}")
    sys_sec = parser["system"]
    if "masses" not in sys_sec:
        raise ConfigError(f"[system] is missing 'masses'; {_REQUIRED_HINT}")
    masses = _floats(sys_sec["masses"], "[system].masses", count=3)

    names = ("p1", "p2", "p3")
    if "names" in sys_sec:
        parts = tuple(p.strip() for p in sys_sec["names"].split(","))
        if len(parts) != 3:
            raise ConfigError("[system].names: expected three comma-separated names")
        names = parts

    units = UnitSystem(
        mass_scale=_float(sys_sec, "mass_scale", DEFAULT_MASS_SCALE, "[system]"),
        hartree_per_mk=_float(sys_sec, "hartree_per_mk",
                              UnitSystem().hartree_per_mk, "[system]"))

    pairs = []
    for i in (1, 2, 3):
        sec_name = f"pair.{i}"
        if sec_name not in parser:
            raise ConfigError(f"missing section [{sec_name}]; {_REQUIRED_HINT}")
        sec = parser[sec_name]
        if "a" not in sec:
            raise ConfigError(f"[{sec_name}] is missing 'a'; {_REQUIRED_HINT}")
        where = f"[{sec_name}]"
        a = _float(sec, "a", math.nan, where)
        try:
            pairs.append(PairParams(
                a=a,
                r_eff=_float(sec, "r_eff", 0.0, where),
                p_shape=_float(sec, "p_shape", 0.0, where)))
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc

    try:
        system = ParticleSystem(masses=tuple(masses), pairs=tuple(pairs),
                                units=units, names=names)
    except ValueError as exc:
        raise ConfigError(f"[system]: {exc}") from exc

    grid = parser["grid"] if "grid" in parser else {}
    rho_min = _float(grid, "rho_min", 0.05, "[grid]")
    rho_max = _float(grid, "rho_max", 4000.0, "[grid]")
    n = _int(grid, "n", 600, "[grid]")
    spacing = _choice(grid, "spacing", "log", ("log", "linear"), "[grid]")
    if not 0.0 < rho_min < rho_max:
        raise ConfigError("[grid]: need 0 < rho_min < rho_max")
    if n < 2:
        raise ConfigError("[grid].n: need at least 2 grid nodes")

    solver = parser["solver"] if "solver" in parser else {}
    q_convention = _choice(solver, "q_convention", "leading_term",
                           Q_CONVENTIONS, "[solver]")
    radial_rho_max_raw = solver.get("radial_rho_max", "auto") if solver else "auto"
    if isinstance(radial_rho_max_raw, str) and radial_rho_max_raw.strip() == "auto":
        radial_rho_max = None
    else:
        radial_rho_max = _float(solver, "radial_rho_max", 0.0, "[solver]")
        if radial_rho_max <= 0.0:
            raise ConfigError("[solver].radial_rho_max: must be positive or 'auto'")

    output = parser["output"] if "output" in parser else {}
    out_format = _choice(output, "format", "csv", ("csv", "json"), "[output]")
    out_path = output.get("path", "-") if output else "-"

    return RunConfig(
        system=system,
        rho_min=rho_min, rho_max=rho_max, n=n, spacing=spacing,
        q_convention=q_convention,
        regularized=_bool(solver, "regularized", True, "[solver]"),
        tol_res=_float(solver, "tol_res", 1e-10, "[solver]"),
        tol_u=_float(solver, "tol_u", 1e-10, "[solver]"),
        radial_n=_int(solver, "radial_n", 8000, "[solver]"),
        radial_rho_min=_float(solver, "radial_rho_min", 0.05, "[solver]"),
        radial_rho_max=radial_rho_max,
        max_states=_int(solver, "max_states", 4, "[solver]"),
        out_format=out_format, out_path=out_path,
        sha256=hashlib.sha256(text.encode("utf-8")).hexdigest())
