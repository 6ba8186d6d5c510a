"""Scenario configuration files.

INI-style ``key = value`` lines grouped under ``[section]`` headers.  Values
may carry a unit suffix (``200 GHz``, ``16 mm``, ``30 deg``, ``35 dB``);
bare numbers are SI, except angles, which are degrees.  Lists are comma
separated and share one trailing unit (``2, 4, 8 GHz``).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .antennas import ANTENNAS, AngleGrid, AntennaModel, make_antenna
from .blind import (
    EqualizeAtBob,
    FreeSpaceSpherical,
    Location,
    TransmissionPlan,
    UniformSpectralDensity,
    thermal_threshold_default,
)
from .coding import Scheme, SecrecyCode
from .errors import ConfigError, OutOfRange

UNITS = {
    "freq": {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9, "thz": 1e12},
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6},
    "angle": {"deg": 1.0, "rad": 180.0 / np.pi},
    "db": {"db": 1.0},
    "float": {},
    "int": {},
}

# section -> key -> (kind, default); kind "str" values pass through untouched
SCHEMA: dict[str, dict[str, tuple[str, Any]]] = {
    "antenna": {
        "kind": ("str", None),
        "diameter": ("length", 16e-3),
        "focal_length": ("length", 10e-3),
        "elements": ("int", 16),
        "spacing": ("length", 0.75e-3),
        "plate_separation": ("length", 1e-3),
        "alpha": ("float", 1.0),
        "length": ("length", 20e-3),
        "aperture": ("length", 11e-3),
        "waist": ("length", 3e-3),
        "block_width": ("length", 4e-3),
    },
    "plan": {
        "f_c": ("freq", 200e9),
        "b": ("freq", None),
        "w": ("freq", 1e9),
        "q": ("int", None),
        "f_l": ("freq", None),
        "f_h": ("freq", None),
        "policy": ("str", "equalize"),
        "p_ab": ("db", None),
        "s_bob": ("float", None),
        "p0": ("float", None),
        "delta": ("str", None),
        "quad_points": ("int", 9),
        "min_gain": ("float", 1e-5),
    },
    "locations": {
        "bob_r": ("length", 1.0),
        "bob_theta": ("angle", 0.0),
        "eve_r": ("length", None),
        "eve_theta": ("angle", None),
    },
    "code": {
        "p": ("int", 11),
        "q": ("int", None),
        "scheme": ("str", "1"),
        "points": ("list_int", None),
        "seed": ("int", 0),
    },
    "grid": {
        "theta_min": ("angle", -90.0),
        "theta_max": ("angle", 90.0),
        "step": ("angle", 0.01),
    },
    "sweep": {
        "parameter": ("str", None),
        "values": ("str", None),
    },
    "message": {
        "bits": ("str", None),
        "n_bits": ("int", None),
        "seed": ("int", 0),
    },
    "leakage": {
        "subset": ("list_int", None),
        "target": ("str", "all"),
    },
    "patterns": {
        "frequencies": ("list_freq", None),
    },
    "ook": {
        "frequencies": ("list_freq", [100e9, 200e9, 400e9]),
        "w": ("freq", 0.1e9),
        "snr_db": ("db", 40.0),
    },
}

ANTENNA_KEYS = {
    "dish": ("diameter", "focal_length"),
    "phased_array": ("elements", "spacing"),
    "leaky_wave": ("plate_separation", "alpha"),
    "horn": ("length", "aperture"),
    "horn_block": ("waist", "block_width"),
}

SWEEP_ALIASES = {"b": "bandwidth", "bandwidth": "bandwidth", "w": "w", "p_ab": "p_ab"}
SWEEP_DIMENSION = {"bandwidth": "freq", "w": "freq", "p_ab": "db"}

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z/^0-9]*)\s*$")


def convert(text: str, kind: str, line: int | None = None):
    """Parse one scalar (or comma list for ``list_*`` kinds) into SI units."""
    if kind == "str":
        return text.strip()
    if kind.startswith("list_"):
        base = kind[5:]
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if not parts:
            raise ConfigError("empty list", line)
        unit = ""
        m = _NUMBER.match(parts[-1])
        if m and m.group(2):
            unit = m.group(2)
        out = []
        for part in parts:
            m = _NUMBER.match(part)
            if m and not m.group(2) and unit:
                part = f"{part} {unit}"
            out.append(convert(part, base, line))
        return out
    m = _NUMBER.match(text)
    if not m:
        raise ConfigError(f"cannot parse {text!r} as a number", line)
    value, unit = float(m.group(1)), m.group(2).lower()
    if kind == "int":
        if unit or value != int(value):
            raise ConfigError(f"expected an integer, got {text!r}", line)
        return int(value)
    if unit:
        scale = UNITS[kind].get(unit)
        if scale is None:
            allowed = ", ".join(UNITS[kind]) or "none"
            raise ConfigError(f"bad unit {unit!r} (allowed: {allowed})", line)
        value *= scale
    return value


def read_sections(text: str) -> dict[str, dict[str, tuple[str, int]]]:
    """Raw ``{section: {key: (value, line)}}`` with line numbers kept for error messages."""
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {raw.strip()!r}", lineno)
            current = line[1:-1].strip().lower()
            if current not in SCHEMA:
                raise ConfigError(f"unknown section [{current}]", lineno)
            if current in sections:
                raise ConfigError(f"duplicate section [{current}]", lineno)
            sections[current] = {}
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if current is None:
            raise ConfigError("key outside of any section", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key not in SCHEMA[current]:
            raise ConfigError(f"unknown key {key!r} in [{current}]", lineno)
        if key in sections[current]:
            raise ConfigError(f"duplicate key {key!r} in [{current}]", lineno)
        sections[current][key] = (value, lineno)
    return sections


@dataclass
class ScenarioConfig:
    """Validated, unit-normalized scenario; absent sections fall back to defaults."""

    sections: dict[str, dict[str, Any]] = field(default_factory=dict)
    lines: dict[tuple[str, str], int] = field(default_factory=dict)

    def has(self, section: str) -> bool:
        return section in self.sections

    def section(self, name: str) -> dict[str, Any]:
        """Section values with defaults filled, present or not."""
        values = {k: default for k, (_, default) in SCHEMA[name].items()}
        values.update(self.sections.get(name, {}))
        return values

    def require(self, name: str) -> dict[str, Any]:
        if name not in self.sections:
            raise ConfigError(f"missing required section [{name}]")
        return self.section(name)

    def echo(self) -> dict[str, dict[str, Any]]:
        out = {name: self.section(name) for name in sorted(self.sections)}
        if "antenna" in out:
            kind = out["antenna"]["kind"]
            out["antenna"] = {k: v for k, v in out["antenna"].items() if k == "kind" or k in ANTENNA_KEYS[kind]}
        return out

    # -- builders --

    def antenna(self) -> AntennaModel:
        sec = self.require("antenna")
        kind = sec["kind"]
        geometry = ANTENNA_KEYS[kind]
        try:
            return make_antenna(kind, **{k: sec[k] for k in geometry})
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def plan(self) -> TransmissionPlan:
        sec = self.require("plan")
        delta = sec["delta_value"]
        if sec["policy"] == "equalize":
            policy = (EqualizeAtBob(s_bob=sec["s_bob"], min_gain=sec["min_gain"]) if sec["s_bob"] is not None
                      else EqualizeAtBob(p_ab_db=sec["p_ab"], min_gain=sec["min_gain"]))
        else:
            policy = (UniformSpectralDensity(p0=sec["p0"]) if sec["p0"] is not None
                      else UniformSpectralDensity(p_ab_db=sec["p_ab"]))
        try:
            return TransmissionPlan(sec["f_low"], sec["f_high"], sec["q_resolved"], delta,
                                    power_policy=policy, quadrature_points=sec["quad_points"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def gain_model(self):
        return FreeSpaceSpherical()

    def bob(self) -> Location:
        sec = self.section("locations")
        return Location.from_degrees(sec["bob_r"], sec["bob_theta"])

    def eve(self) -> Location:
        sec = self.section("locations")
        if sec["eve_theta"] is None:
            raise ConfigError("[locations] eve_theta is required for this command")
        r = sec["eve_r"] if sec["eve_r"] is not None else sec["bob_r"]
        return Location.from_degrees(r, sec["eve_theta"])

    def eve_range(self) -> float:
        sec = self.section("locations")
        return sec["eve_r"] if sec["eve_r"] is not None else sec["bob_r"]

    def grid(self) -> AngleGrid:
        sec = self.section("grid")
        try:
            return AngleGrid(sec["theta_min"], sec["theta_max"], sec["step"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def code(self, q: int | None = None) -> SecrecyCode:
        sec = self.section("code")
        if q is None:
            q = sec["q"] if sec["q"] is not None else 3
        elif sec["q"] is not None and sec["q"] != q:
            raise ConfigError(f"[code] q = {sec['q']} disagrees with the plan's {q} subchannels",
                              self.lines.get(("code", "q")))
        try:
            return SecrecyCode(sec["p"], q, Scheme.parse(sec["scheme"]), sec["points"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def sweep(self) -> tuple[str, list[float]]:
        sec = self.require("sweep")
        return sec["parameter_resolved"], sec["values_resolved"]


def _resolve_plan(values: dict[str, Any], present: set[str], lines: dict) -> None:
    missing = []
    have_edges = "f_l" in present and "f_h" in present
    if not have_edges and "b" not in present:
        missing.append("B")
    if "delta" not in present:
        missing.append("delta")
    if missing:
        raise ConfigError(f"[plan] missing required keys: {', '.join(missing)}")

    if have_edges:
        f_low, f_high = values["f_l"], values["f_h"]
        width = f_high - f_low
    else:
        f_low = values["f_c"] - values["b"] / 2.0
        f_high = values["f_c"] + values["b"] / 2.0
        width = values["b"]
    if width <= 0:
        raise ConfigError("[plan] band must have positive width")
    if values["q"] is not None:
        q = values["q"]
    else:
        ratio = width / values["w"]
        q = int(round(ratio))
        if q < 1 or abs(ratio - q) > 1e-9 * max(1.0, ratio):
            raise ConfigError("[plan] bandwidth is not a whole number of w-wide channels",
                              lines.get(("plan", "w")))
    values.update(f_low=f_low, f_high=f_high, q_resolved=q)
    values["f_c"] = 0.5 * (f_low + f_high)

    if values["policy"] not in ("equalize", "uniform"):
        raise ConfigError("policy must be 'equalize' or 'uniform'", lines.get(("plan", "policy")))
    given = [k for k in ("p_ab", "s_bob", "p0") if k in present]
    if len(given) > 1:
        raise ConfigError(f"[plan] give only one of p_ab, s_bob, p0 (got {', '.join(given)})")
    if values["policy"] == "equalize" and "p0" in present:
        raise ConfigError("[plan] p0 applies to the uniform policy", lines.get(("plan", "p0")))
    if values["policy"] == "uniform" and "s_bob" in present:
        raise ConfigError("[plan] s_bob applies to the equalize policy", lines.get(("plan", "s_bob")))
    if not given:
        values["p_ab"] = 35.0

    raw = values["delta"]
    if raw.lower() == "thermal":
        try:
            values["delta_value"] = thermal_threshold_default(values["f_c"])
        except OutOfRange as exc:
            raise ConfigError(str(exc), lines.get(("plan", "delta"))) from exc
    else:
        values["delta_value"] = convert(raw, "float", lines.get(("plan", "delta")))
        if values["delta_value"] <= 0:
            raise ConfigError("delta must be positive", lines.get(("plan", "delta")))


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a scenario file; raises :class:`ConfigError` with line numbers."""
    raw = read_sections(text)
    cfg = ScenarioConfig()
    for name, entries in raw.items():
        values: dict[str, Any] = {}
        for key, (value, lineno) in entries.items():
            kind = SCHEMA[name][key][0]
            values[key] = convert(value, kind, lineno)
            cfg.lines[(name, key)] = lineno
        cfg.sections[name] = values

    if "antenna" in raw:
        kind = cfg.sections["antenna"].get("kind")
        if kind is None:
            raise ConfigError("[antenna] missing required keys: kind")
        if kind not in ANTENNAS:
            raise ConfigError(f"unknown antenna kind {kind!r}; choose from {', '.join(sorted(ANTENNAS))}",
                              cfg.lines[("antenna", "kind")])
        for key in raw["antenna"]:
            if key != "kind" and key not in ANTENNA_KEYS[kind]:
                raise ConfigError(f"key {key!r} does not apply to a {kind} antenna", cfg.lines[("antenna", key)])
    if "plan" in raw:
        values = cfg.section("plan")
        _resolve_plan(values, set(raw["plan"]), cfg.lines)
        cfg.sections["plan"] = values
    if "code" in raw:
        try:
            Scheme.parse(cfg.section("code")["scheme"])
        except ValueError as exc:
            raise ConfigError(str(exc), cfg.lines.get(("code", "scheme"))) from exc
    if "sweep" in raw:
        values = cfg.section("sweep")
        missing = [k for k in ("parameter", "values") if values[k] is None]
        if missing:
            raise ConfigError(f"[sweep] missing required keys: {', '.join(missing)}")
        param = SWEEP_ALIASES.get(values["parameter"].lower())
        if param is None:
            raise ConfigError("sweep parameter must be one of B, w, p_ab", cfg.lines[("sweep", "parameter")])
        values["parameter_resolved"] = param
        values["values_resolved"] = _sweep_values(values["values"], SWEEP_DIMENSION[param],
                                                  cfg.lines[("sweep", "values")])
        cfg.sections["sweep"] = values
    if "message" in raw:
        bits = cfg.section("message")["bits"]
        if bits is not None and set(bits.replace("_", "").replace(" ", "")) - {"0", "1"}:
            raise ConfigError("message bits may only contain 0 and 1", cfg.lines[("message", "bits")])
    return cfg


def _sweep_values(text: str, dim: str, line: int) -> list[float]:
    """Either an explicit list or ``start:stop:step`` (inclusive) with one unit."""
    if ":" in text:
        m = re.match(r"^\s*([^:]+):([^:]+):([^:]+?)\s*([A-Za-z]*)\s*$", text)
        if not m:
            raise ConfigError(f"cannot parse range {text!r}", line)
        unit = m.group(4)
        start, stop, step = (convert(f"{m.group(i)} {unit}", dim, line) for i in (1, 2, 3))
        if step <= 0:
            raise ConfigError("range step must be positive", line)
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(n)]
    return convert(text, f"list_{dim}", line)


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
