"""Sectioned ``key = value`` run configuration.

Format::

    # comment
    [pulse]
    kind = gaussian          ; inline comment
    wavelength = 1e-4

Sections: ``pulse``, ``plasma``, ``species``, ``particle``, ``run``. Unknown
sections or keys, malformed values and missing required keys are all reported
together with their line numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .kinematics import ELECTRON, POSITRON, PROTON, Species
from .pulse import (
    ConstantEnvelope,
    GaussianEnvelope,
    PolynomialEnvelope,
    Pulse,
    peak_field_for_w,
    read_tabulated_envelope,
)

__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config"]


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


def _float(text):
    v = float(text)
    if not math.isfinite(v):
        raise ValueError("not a finite number")
    return v


def _int(text):
    return int(text)


def _vec3(text):
    parts = text.replace(",", " ").split()
    if len(parts) != 3:
        raise ValueError("expected three numbers")
    return tuple(_float(p) for p in parts)


def _choice(*options):
    def parse(text):
        t = text.strip().lower()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return t

    return parse


def _str(text):
    return text.strip()


# key -> (parser, constraint, message)
_POSITIVE = (lambda v: v > 0, "must be > 0")
_NONNEG = (lambda v: v >= 0, "must be >= 0")
_ANY = (lambda v: True, "")

SCHEMA = {
    "pulse": {
        "kind": (_choice("gaussian", "polynomial", "constant", "tabulated"), _ANY),
        "wavelength": (_float, _POSITIVE),
        "polarization": (_choice("linear", "circular"), _ANY),
        "amplitude": (_float, _NONNEG),
        "peak_field": (_float, _NONNEG),
        "width": (_float, _POSITIVE),
        "center": (_float, _NONNEG),
        "length": (_float, _POSITIVE),
        "table": (_str, _ANY),
        "direction": (_vec3, (lambda v: math.hypot(*v) > 0, "must be a nonzero vector")),
    },
    "plasma": {
        "n0": (_float, _NONNEG),
        "profile": (_choice("step"), _ANY),
    },
    "species": {
        "name": (_choice("electron", "positron", "proton", "custom"), _ANY),
        "mass": (_float, _POSITIVE),
        "charge": (_float, (lambda v: v != 0, "must be nonzero")),
    },
    "particle": {
        "position": (_vec3, _ANY),
        "velocity": (_vec3, (lambda v: math.hypot(*v) < 1, "must have |beta| < 1")),
    },
    "run": {
        "xi_max": (_float, _POSITIVE),
        "tolerance": (_float, _POSITIVE),
        "threshold_T": (_float, _POSITIVE),
        "step": (_float, _POSITIVE),
        "t_start": (_float, _NONNEG),
        "t_stop": (_float, _NONNEG),
        "t_count": (_int, _POSITIVE),
        "Z_min": (_float, _ANY),
        "Z_max": (_float, _ANY),
        "Z_count": (_int, _POSITIVE),
        "Z": (_float, _NONNEG),
        "samples_per_wavelength": (_int, _POSITIVE),
        "radius": (_float, _POSITIVE),
        "pancake_length": (_float, _POSITIVE),
        "xi0": (_float, _POSITIVE),
        "seed": (_int, _NONNEG),
    },
}

REQUIRED = {"pulse": ("kind", "wavelength")}
KIND_REQUIRES = {"gaussian": ("width",), "polynomial": ("length",), "constant": ("length",), "tabulated": ("table",)}


@dataclass
class RunConfig:
    """Validated configuration; ``values[section][key]`` holds parsed values, ``lines`` their origin."""

    values: dict = field(default_factory=dict)
    lines: dict = field(default_factory=dict)
    base_dir: Path = field(default_factory=Path.cwd)

    def get(self, section, key, default=None):
        return self.values.get(section, {}).get(key, default)

    def set(self, section, key, value):
        self.values.setdefault(section, {})[key] = value

    # -- builders --------------------------------------------------------

    @property
    def wavelength(self):
        return self.get("pulse", "wavelength")

    def species(self) -> Species:
        name = self.get("species", "name", "electron")
        if name == "custom":
            return Species(self.get("species", "mass"), self.get("species", "charge"), "custom")
        return {"electron": ELECTRON, "positron": POSITRON, "proton": PROTON}[name]

    def peak_field(self):
        if self.get("pulse", "peak_field") is not None:
            return self.get("pulse", "peak_field")
        return peak_field_for_w(self.get("pulse", "amplitude", 1.0), self.wavelength)

    def pulse(self) -> Pulse:
        kind = self.get("pulse", "kind")
        lam = self.wavelength
        peak = self.peak_field()
        if kind == "gaussian":
            env = GaussianEnvelope(peak, self.get("pulse", "width"), self.get("pulse", "center"))
        elif kind == "polynomial":
            env = PolynomialEnvelope(peak, self.get("pulse", "length"))
        elif kind == "constant":
            env = ConstantEnvelope(peak, self.get("pulse", "length"))
        else:
            path = Path(self.get("pulse", "table"))
            if not path.is_absolute():
                path = self.base_dir / path
            env = read_tabulated_envelope(path)
        return Pulse(env, lam, self.get("pulse", "polarization", "linear"))

    def direction(self):
        return self.get("pulse", "direction", (0.0, 0.0, 1.0))

    @property
    def n0(self):
        return self.get("plasma", "n0", 0.0)

    @property
    def tolerance(self):
        return self.get("run", "tolerance", 1e-10)

    @property
    def threshold(self):
        return self.get("run", "threshold_T", 0.1)


def parse_config(text, base_dir=None) -> RunConfig:
    """Parse and validate configuration text.

    Raises
    ------
    ConfigError
        Listing every problem, each prefixed with its line number.
    """
    cfg = RunConfig(base_dir=Path(base_dir) if base_dir is not None else Path.cwd())
    errors = []
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                errors.append(f"line {lineno}: malformed section header {raw.strip()!r}")
                section = None
                continue
            name = line[1:-1].strip().lower()
            if name not in SCHEMA:
                errors.append(f"line {lineno}: unknown section [{name}] (expected one of {', '.join(SCHEMA)})")
                section = "__unknown__"
                continue
            section = name
            cfg.values.setdefault(section, {})
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if section is None:
            errors.append(f"line {lineno}: key {key!r} outside any section")
            continue
        if section == "__unknown__":
            continue
        entry = SCHEMA[section].get(key)
        if entry is None:
            errors.append(f"line {lineno}: unknown key {key!r} in [{section}]")
            continue
        if key in cfg.lines.get(section, {}):
            errors.append(f"line {lineno}: duplicate key {key!r} in [{section}] "
                          f"(first set on line {cfg.lines[section][key]})")
            continue
        parser, (check, msg) = entry
        try:
            v = parser(value)
        except ValueError as exc:
            errors.append(f"line {lineno}: [{section}] {key} = {value!r}: {exc}")
            continue
        if not check(v):
            errors.append(f"line {lineno}: [{section}] {key} = {value!r}: {msg}")
            continue
        cfg.set(section, key, v)
        cfg.lines.setdefault(section, {})[key] = lineno

    errors += _cross_checks(cfg)
    if errors:
        raise ConfigError(errors)
    return cfg


def _where(cfg, section, key):
    line = cfg.lines.get(section, {}).get(key)
    return f"line {line}: " if line else ""


def _cross_checks(cfg):
    errors = []
    for section, keys in REQUIRED.items():
        for key in keys:
            if cfg.get(section, key) is None:
                errors.append(f"missing required key {key!r} in [{section}]")
    kind = cfg.get("pulse", "kind")
    for key in KIND_REQUIRES.get(kind, ()):
        if cfg.get("pulse", key) is None:
            errors.append(f"missing required key {key!r} in [pulse] for kind = {kind}")
    if cfg.get("pulse", "amplitude") is not None and cfg.get("pulse", "peak_field") is not None:
        errors.append(f"{_where(cfg, 'pulse', 'peak_field')}[pulse] give either amplitude or peak_field, not both")
    if cfg.get("species", "name") == "custom":
        for key in ("mass", "charge"):
            if cfg.get("species", key) is None:
                errors.append(f"missing required key {key!r} in [species] for name = custom")
    elif cfg.get("species", "mass") is not None or cfg.get("species", "charge") is not None:
        errors.append(f"{_where(cfg, 'species', 'mass') or _where(cfg, 'species', 'charge')}"
                      "[species] mass/charge are only allowed with name = custom")
    t0, t1 = cfg.get("run", "t_start"), cfg.get("run", "t_stop")
    if t0 is not None and t1 is not None and t1 < t0:
        errors.append(f"{_where(cfg, 'run', 't_stop')}[run] t_stop must be >= t_start")
    z0, z1 = cfg.get("run", "Z_min"), cfg.get("run", "Z_max")
    if z0 is not None and z1 is not None and z1 < z0:
        errors.append(f"{_where(cfg, 'run', 'Z_max')}[run] Z_max must be >= Z_min")
    if not errors and kind is not None and cfg.wavelength is not None:
        try:
            cfg.pulse()
        except (ValueError, OSError) as exc:
            errors.append(f"[pulse] {exc}")
    return errors


def _strip_comment(line):
    s = line.lstrip()
    if s.startswith("#") or s.startswith(";"):
        return ""
    for marker in (" #", "\t#", " ;", "\t;"):
        i = line.find(marker)
        if i >= 0:
            line = line[:i]
    return line


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError([f"cannot read config {str(path)!r}: {exc}"]) from exc
    return parse_config(text, base_dir=path.parent)
