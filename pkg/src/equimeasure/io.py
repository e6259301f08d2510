"""Serialization of measures and reports, and experiment config parsing.

Measures are written as a JSON array of ``{"coords": [...], "weight": w}``
records or as a CSV table, with every real printed to 17 significant
digits so that files reload bit-identically.
"""

import csv
import io
import json
import math

import numpy as np

from . import sphere
from .maps import RationalMap
from .measures import DiscreteMeasure

SCHEMA_VERSION = 1
MAP_FAMILIES = ("rational", "zorich")


class ConfigError(ValueError):
    """Invalid experiment config; ``field`` is a dotted path into the config."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


def _num(x):
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return "%.17g" % x


def measure_to_json(mu):
    rows = []
    for p, w in zip(mu.points, mu.weights):
        coords = ", ".join(_num(c) for c in p)
        rows.append(f'{{"coords": [{coords}], "weight": {_num(w)}}}')
    return "[\n" + ",\n".join(rows) + "\n]\n"


def measure_to_csv(mu):
    n1 = mu.points.shape[1]
    lines = [",".join([f"x{j}" for j in range(n1)] + ["weight"])]
    for p, w in zip(mu.points, mu.weights):
        lines.append(",".join([_num(c) for c in p] + [_num(w)]))
    return "\n".join(lines) + "\n"


def measure_from_records(records):
    pts = np.array([r["coords"] for r in records], dtype=float)
    w = np.array([r["weight"] for r in records], dtype=float)
    return DiscreteMeasure(pts, w)


def load_measure(path):
    """Read a measure file written by :func:`measure_to_json` or :func:`measure_to_csv`."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("["):
        return measure_from_records(json.loads(text))
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    rows = np.array([[float(x) for x in row] for row in reader if row])
    if header[-1] != "weight":
        raise ValueError("last CSV column must be 'weight'")
    return DiscreteMeasure(rows[:, :-1], rows[:, -1])


def rows_to_csv(rows):
    lines = []
    for row in rows:
        lines.append(",".join(_num(x) if isinstance(x, (float, np.floating)) else str(x) for x in row))
    return "\n".join(lines) + "\n"


def _clean(obj):
    """Make report objects JSON-ready; floats keep 17 significant digits."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def _iterencode(o, indent, level=0):
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    if isinstance(o, dict):
        if not o:
            yield "{}"
            return
        yield "{"
        for i, (k, v) in enumerate(o.items()):
            yield ("," if i else "") + pad + json.dumps(k) + ": "
            yield from _iterencode(v, indent, level + 1)
        yield end + "}"
    elif isinstance(o, list):
        if not o:
            yield "[]"
            return
        yield "["
        for i, v in enumerate(o):
            yield ("," if i else "") + pad
            yield from _iterencode(v, indent, level + 1)
        yield end + "]"
    elif isinstance(o, bool) or o is None:
        yield json.dumps(o)
    elif isinstance(o, float):
        yield _num(o)
    else:
        yield json.dumps(o)


def report_to_json(obj, indent=2):
    return "".join(_iterencode(_clean(obj), indent)) + "\n"


# ---------------------------------------------------------------- config


def _require(cfg, key, path):
    if key not in cfg:
        raise ConfigError(f"{path}.{key}".lstrip("."), "missing required field")
    return cfg[key]


def _complex_list(value, field):
    if not isinstance(value, list) or not value:
        raise ConfigError(field, "expected a non-empty list of [re, im] pairs")
    out = []
    for i, pair in enumerate(value):
        if isinstance(pair, (int, float)) and not isinstance(pair, bool):
            out.append(complex(pair))
            continue
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)):
            raise ConfigError(f"{field}[{i}]", f"expected [re, im], got {pair!r}")
        out.append(complex(pair[0], pair[1]))
    return out


def build_map(desc, field="map"):
    """Endomorphism from a map description ``{"family": "rational" | "zorich", ...}``."""
    if not isinstance(desc, dict):
        raise ConfigError(field, "expected an object")
    family = _require(desc, "family", field)
    if family == "rational":
        num = _complex_list(_require(desc, "numerator", field), f"{field}.numerator")
        den = _complex_list(desc.get("denominator", [[1.0, 0.0]]), f"{field}.denominator")
        try:
            return RationalMap(num, den)
        except ValueError as err:
            raise ConfigError(field, str(err)) from None
    if family == "zorich":
        from .zorich import ZorichPowerMap

        m = desc.get("stretch", 3)
        if not isinstance(m, int) or isinstance(m, bool):
            raise ConfigError(f"{field}.stretch", f"expected an odd integer >= 3, got {m!r}")
        try:
            return ZorichPowerMap(m)
        except ValueError as err:
            raise ConfigError(f"{field}.stretch", str(err)) from None
    raise ConfigError(f"{field}.family", f"expected one of {list(MAP_FAMILIES)}, got {family!r}")


def parse_point(value, dim, rng_seed, field):
    """Seed point from ``{"chart": [re, im] | "inf"}``, ``{"coords": [...]}`` or ``"random"``."""
    if value == "random":
        ss = np.random.SeedSequence(rng_seed, spawn_key=(5,))
        return sphere.sample_uniform(1, ss, dim)[0]
    if not isinstance(value, dict):
        raise ConfigError(field, "expected {'chart': [re, im]}, {'coords': [...]} or 'random'")
    if "chart" in value:
        if dim != 2:
            raise ConfigError(f"{field}.chart", "chart points exist only on S^2")
        c = value["chart"]
        if c == "inf":
            return sphere.north_pole(2)
        z = _complex_list([c], f"{field}.chart")[0]
        return sphere.stereo_lift(z)
    if "coords" in value:
        c = value["coords"]
        try:
            p = np.asarray(c, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError(f"{field}.coords", "expected a list of reals") from None
        if p.shape != (dim + 1,) or abs(np.linalg.norm(p) - 1) > 1e-12:
            raise ConfigError(f"{field}.coords", f"expected a unit vector of length {dim + 1}")
        return p
    raise ConfigError(field, "expected a 'chart' or 'coords' key")


def get_int(cfg, key, path, default=None, minimum=None):
    v = cfg.get(key, default)
    if v is None:
        raise ConfigError(f"{path}.{key}".lstrip("."), "missing required field")
    if not isinstance(v, int) or isinstance(v, bool):
        raise ConfigError(f"{path}.{key}".lstrip("."), f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{path}.{key}".lstrip("."), f"must be >= {minimum}")
    return v


def get_float(cfg, key, path, default=None, positive=False):
    v = cfg.get(key, default)
    if v is None:
        raise ConfigError(f"{path}.{key}".lstrip("."), "missing required field")
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ConfigError(f"{path}.{key}".lstrip("."), f"expected a number, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{path}.{key}".lstrip("."), "must be positive")
    return float(v)


def get_list(cfg, key, path, default=None, kind=float):
    v = cfg.get(key, default)
    field = f"{path}.{key}".lstrip(".")
    if v is None:
        raise ConfigError(field, "missing required field")
    if not isinstance(v, list) or not v:
        raise ConfigError(field, "expected a non-empty list")
    for i, x in enumerate(v):
        ok = isinstance(x, int) if kind is int else isinstance(x, (int, float))
        if not ok or isinstance(x, bool):
            raise ConfigError(f"{field}[{i}]", f"expected {'an integer' if kind is int else 'a number'}, got {x!r}")
    return [kind(x) for x in v]


def load_config(path):
    """Read and version-check a JSON experiment config."""
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as err:
        raise ConfigError("<file>", f"not valid JSON: {err}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("<root>", "expected a JSON object")
    version = cfg.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"expected {SCHEMA_VERSION}, got {version!r}")
    return cfg
