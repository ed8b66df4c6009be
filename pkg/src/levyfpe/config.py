"""Experiment configuration: ``key = value`` documents with ``[section]`` headers.

Parsing is strict. Unknown sections or keys and out-of-range values are
rejected with the offending line number.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "EXPERIMENTS", "SCHEMA"]

EXPERIMENTS = (
    "counterexample",
    "generator-compare",
    "adjoint-check",
    "fpe-residual",
    "dynkin-check",
    "growth-fit",
    "simulate",
)


class ConfigError(ValueError):
    """Invalid configuration document."""


# ----------------------------------------------------------------- value parsers
def _float(v):
    x = float(v)
    if not math.isfinite(x):
        raise ValueError("must be finite")
    return x


def _pos(v):
    x = _float(v)
    if not x > 0:
        raise ValueError("must be > 0")
    return x


def _nonneg(v):
    x = _float(v)
    if x < 0:
        raise ValueError("must be >= 0")
    return x


def _int(lo=None, hi=None):
    def parse(v):
        x = int(v)
        if lo is not None and x < lo:
            raise ValueError(f"must be >= {lo}")
        if hi is not None and x > hi:
            raise ValueError(f"must be <= {hi}")
        return x
    return parse


def _bool(v):
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _floats(v):
    parts = [p for p in re.split(r"[,\s]+", str(v).strip()) if p]
    if not parts:
        raise ValueError("expected a comma-separated list of numbers")
    return tuple(_float(p) for p in parts)


def _atoms(v):
    """``z:w, z:w, ...``"""
    s = str(v).strip()
    if not s:
        return ()
    out = []
    for item in s.split(","):
        z, sep, w = item.partition(":")
        if not sep:
            raise ValueError(f"atom {item.strip()!r} must be written z:w")
        out.append((_float(z), _pos(w)))
    return tuple(out)


def _choice(*opts):
    def parse(v):
        s = str(v).strip()
        if s not in opts:
            raise ValueError(f"must be one of {', '.join(opts)}")
        return s
    return parse


def _seed(v):
    x = int(v)
    if not 0 <= x < 2**64:
        raise ValueError("must be an unsigned 64-bit integer")
    return x


SCHEMA = {
    "experiment": {
        "x": (_float, 2.0),
        "s": (_float, 0.0),
        "t": (_pos, 1.0),
        "z": (_float, 1.0),
        "k_max": (_int(1, 170), 10),
        "delta_t": (_pos, 1e-3),
        "source": (_choice("test_function", "density"), "test_function"),
        "max_residual": (_pos, None),
        "require_converged": (_bool, False),
    },
    "triplet": {
        "b": (_float, 0.0),
        "A": (_nonneg, 0.0),
        "atoms": (_atoms, ((1.0, 1.0),)),
    },
    "model": {
        "noise": (_choice("counterexample", "constant", "linear", "polynomial"), "counterexample"),
        "noise_coeffs": (_floats, None),
        "drift": (_floats, (0.0,)),
    },
    "test_function": {
        "family": (_choice("bump", "gaussian", "cosine", "poly_gaussian"), "bump"),
        "center": (_float, 0.0),
        "radius": (_pos, 1.0),
        "a": (_float, 0.0),
        "b": (_pos, 1.0),
        "omega": (_float, 1.0),
        "coeffs": (_floats, (1.0,)),
    },
    "grid": {
        "lo": (_float, None),
        "hi": (_float, None),
        "n": (_int(3), None),
    },
    "series": {
        "K_max": (_int(1, 170), None),
        "tol": (_pos, 1e-12),
    },
    "sim": {
        "dt": (_pos, 1e-3),
        "t_end": (_pos, 1.0),
        "n_paths": (_int(2), 100_000),
        "seed": (_seed, 0),
        "antithetic": (_bool, False),
    },
    "density": {
        "x0": (_float, 0.0),
        "s": (_float, 0.0),
        "drift_rate": (_float, 0.0),
        "A": (_pos, 1.0),
        "lam": (_nonneg, 0.0),
        "jump_size": (_float, 1.0),
        "n_max": (_int(0), None),
    },
}


@dataclass
class ExperimentConfig:
    """Resolved configuration: every schema key present, defaults filled in."""

    experiment: str
    sections: dict = field(default_factory=dict)

    def __getitem__(self, section):
        return self.sections[section]

    def echo(self) -> dict:
        """Plain nested dict of every resolved value, in schema order."""
        return {sec: {k: _plain(v) for k, v in vals.items()} for sec, vals in self.sections.items()}


def _plain(v):
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    return v


def _line_of(text, section, key=None):
    cur = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"^\[([^\]]+)\]", s)
        if m:
            cur = m.group(1).strip()
            if key is None and cur == section:
                return i
            continue
        if key is not None and cur == section:
            k = re.split(r"[=:]", s, maxsplit=1)[0].strip()
            if k == key:
                return i
    return 0


def parse_config(experiment: str, text: str) -> ExperimentConfig:
    """Parse a config document for ``experiment``.

    Raises
    ------
    ConfigError
        On unknown experiment, sections or keys, malformed values, or an
        empty document.
    """
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    parser = configparser.ConfigParser(interpolation=None, default_section="\x00defaults")
    parser.optionxform = str  # keys are case-sensitive (A vs a)
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError(f"line {e.lineno}: key outside of any [section]") from None
    except configparser.Error as e:
        raise ConfigError(str(e).replace("\n", " ")) from None
    if not parser.sections():
        raise ConfigError("empty configuration: at least one [section] is required")
    resolved = {sec: {k: d for k, (_, d) in keys.items()} for sec, keys in SCHEMA.items()}
    given = {}
    for sec in parser.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"line {_line_of(text, sec)}: unknown section [{sec}]")
        given[sec] = set()
        for key, raw in parser.items(sec):
            if key not in SCHEMA[sec]:
                raise ConfigError(f"line {_line_of(text, sec, key)}: unknown key {key!r} in [{sec}]")
            conv, _ = SCHEMA[sec][key]
            try:
                resolved[sec][key] = conv(raw)
            except (TypeError, ValueError) as e:
                raise ConfigError(
                    f"line {_line_of(text, sec, key)}: [{sec}] {key} = {raw!r}: {e}"
                ) from None
            given[sec].add(key)
    cfg = ExperimentConfig(experiment, resolved)
    _cross_checks(cfg, given, text)
    return cfg


def _cross_checks(cfg, given, text):
    sim = cfg["sim"]
    if sim["dt"] > sim["t_end"]:
        raise ConfigError(f"line {_line_of(text, 'sim', 'dt')}: [sim] dt exceeds t_end")
    g = cfg["grid"]
    if g["lo"] is not None and g["hi"] is not None and not g["lo"] < g["hi"]:
        raise ConfigError(f"line {_line_of(text, 'grid', 'hi')}: [grid] needs lo < hi")
    z = [a[0] for a in cfg["triplet"]["atoms"]]
    if any(v == 0.0 for v in z) or len(set(z)) != len(z):
        raise ConfigError(
            f"line {_line_of(text, 'triplet', 'atoms')}: atoms need distinct nonzero jump sizes"
        )
    m = cfg["model"]
    if m["noise"] != "counterexample" and m["noise_coeffs"] is None:
        raise ConfigError(f"line {_line_of(text, 'model', 'noise')}: [model] noise = "
                          f"{m['noise']} needs noise_coeffs")
    if m["noise_coeffs"] is not None and len(m["noise_coeffs"]) > 3:
        raise ConfigError(f"line {_line_of(text, 'model', 'noise_coeffs')}: degree must be <= 2")
