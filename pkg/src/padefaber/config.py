"""Experiment configuration: JSON parsing, validation and canonical echo.

Complex numbers are written either as a real number or as ``[re, im]``; the
canonical (effective) form always uses ``[re, im]`` pairs of floats.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from typing import Any

from padefaber.errors import ConfigError
from padefaber.faber import resolve_engine
from padefaber.functions import PrincipalPart, ScalarFunction, VectorFunctionSpec
from padefaber.geometry import Geometry, disk, ellipse, phi_abs, segment
from padefaber.polynomial import ComplexPolynomial
from padefaber.simpade import MultiIndex, Quadrature, Tolerances, pole_profile

DEFAULT_N = 4096
DEFAULT_RESOLUTION = 256
DEFAULT_N_CAP = 96

_GEOMETRY_PARAMS = {
    "disk": {"center": "complex", "radius": "float"},
    "segment": {"a": "complex", "b": "complex"},
    "ellipse": {"center": "complex", "rotation": "float", "c": "float", "R": "float"},
}
_GEOMETRY_DEFAULTS = {
    "disk": {"center": 0j, "radius": 1.0},
    "segment": {"a": -1 + 0j, "b": 1 + 0j},
    "ellipse": {"center": 0j, "rotation": 0.0, "c": 1.0, "R": 2.0},
}
_GRID_PARAMS = {
    "boundary": {},
    "level_curve": {"r": "float"},
    "band": {"r": "float"},
    "disk": {"center": "complex", "radius": "float"},
    "rectangle": {"x0": "float", "x1": "float", "y0": "float", "y1": "float"},
    "points": {"points": "complex_list"},
}
_TOP_KEYS = {"name", "geometry", "functions", "m", "n_start", "n_end", "n_cap", "quadrature",
             "grids", "tolerances", "fit", "output", "seed"}


def _reject_unknown(obj: dict, allowed, path: str):
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}" if path else key, "unknown key")


def _require_dict(obj, path):
    if not isinstance(obj, dict):
        raise ConfigError(path, f"expected an object, got {type(obj).__name__}")
    return obj


def _float(v, path) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(path, "must be finite")
    return v


def _int(v, path) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(path, f"expected an integer, got {v!r}")
    return v


def _complex(v, path) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigError(path, "complex numbers are [re, im]")
        return complex(_float(v[0], f"{path}[0]"), _float(v[1], f"{path}[1]"))
    return complex(_float(v, path), 0.0)


def _pair(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def _typed(kind: str, v, path):
    if kind == "float":
        return _float(v, path)
    if kind == "complex":
        return _complex(v, path)
    if kind == "complex_list":
        if not isinstance(v, list) or not v:
            raise ConfigError(path, "expected a nonempty list")
        return [_complex(x, f"{path}[{i}]") for i, x in enumerate(v)]
    raise AssertionError(kind)


def _canon(kind: str, v):
    if kind == "complex":
        return _pair(v)
    if kind == "complex_list":
        return [_pair(z) for z in v]
    return v


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; ``data`` is the canonical effective form."""

    data: dict

    @property
    def name(self) -> str:
        return self.data["name"]

    def geometry(self) -> Geometry:
        gd = self.data["geometry"]
        kind = gd["kind"]
        spec = _GEOMETRY_PARAMS[kind]
        kw = {k: (complex(*gd[k]) if t == "complex" else gd[k]) for k, t in spec.items()}
        return {"disk": disk, "segment": segment, "ellipse": ellipse}[kind](**kw)

    def function(self) -> VectorFunctionSpec:
        comps = []
        for fd in self.data["functions"]:
            parts = tuple(
                PrincipalPart(complex(p["re"], p["im"]), tuple(complex(*c) for c in p["coefficients"]))
                for p in fd["poles"]
            )
            entire = ComplexPolynomial([complex(*c) for c in fd["entire"]] or [0j])
            comps.append(ScalarFunction(parts, entire))
        return VectorFunctionSpec(tuple(comps), self.geometry())

    def multi_index(self) -> MultiIndex:
        return MultiIndex(tuple(self.data["m"]))

    def quadrature(self) -> Quadrature:
        q = self.data["quadrature"]
        return Quadrature(q["rho"], q["N"], q["dps"], q["engine"])

    def tolerances(self) -> Tolerances:
        return Tolerances(**self.data["tolerances"])

    def n_range(self):
        if self.data["n_end"] is None:
            return (self.data["n_start"], None)
        return range(self.data["n_start"], self.data["n_end"] + 1)

    def n_last(self) -> int:
        return self.data["n_end"] if self.data["n_end"] is not None else self.data["n_cap"]

    def grids(self):
        from padefaber.analysis import make_grid

        g = self.geometry()
        out = []
        for i, gd in enumerate(self.data["grids"]):
            spec = _GRID_PARAMS[gd["kind"]]
            kw = {k: (complex(*gd[k]) if t == "complex" else [complex(*z) for z in gd[k]] if t == "complex_list" else gd[k])
                  for k, t in spec.items() if k in gd}
            seed = self.data["seed"] + i if gd.get("random") else None
            out.append(make_grid(g, gd["kind"], gd["resolution"], name=gd["name"], seed=seed, **kw))
        return out

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True) + "\n"


def _parse_geometry(raw) -> dict:
    gd = _require_dict(raw, "geometry")
    kind = gd.get("kind")
    if kind not in _GEOMETRY_PARAMS:
        raise ConfigError("geometry.kind", f"expected one of {sorted(_GEOMETRY_PARAMS)}, got {kind!r}")
    spec = _GEOMETRY_PARAMS[kind]
    _reject_unknown(gd, {"kind", *spec}, "geometry")
    out: dict = {"kind": kind}
    for key, t in spec.items():
        v = _typed(t, gd[key], f"geometry.{key}") if key in gd else _GEOMETRY_DEFAULTS[kind][key]
        out[key] = _canon(t, v)
    if kind == "disk" and out["radius"] <= 0:
        raise ConfigError("geometry.radius", "must be positive")
    if kind == "segment" and out["a"] == out["b"]:
        raise ConfigError("geometry.b", "segment endpoints must differ")
    if kind == "ellipse":
        if out["c"] <= 0:
            raise ConfigError("geometry.c", "must be positive")
        if out["R"] <= 1:
            raise ConfigError("geometry.R", "must exceed 1")
    return out


def _parse_functions(raw) -> list:
    if not isinstance(raw, list) or not raw:
        raise ConfigError("functions", "expected a nonempty list of components")
    comps = []
    for a, fd in enumerate(raw):
        path = f"functions[{a}]"
        _require_dict(fd, path)
        _reject_unknown(fd, {"poles", "entire"}, path)
        poles = fd.get("poles", [])
        if not isinstance(poles, list):
            raise ConfigError(f"{path}.poles", "expected a list")
        parts = []
        for j, p in enumerate(poles):
            pp = f"{path}.poles[{j}]"
            _require_dict(p, pp)
            _reject_unknown(p, {"re", "im", "order", "coefficients"}, pp)
            if "re" not in p or "coefficients" not in p:
                raise ConfigError(pp, "needs 're' and 'coefficients'")
            coeffs = p["coefficients"]
            if not isinstance(coeffs, list) or not coeffs:
                raise ConfigError(f"{pp}.coefficients", "expected a nonempty list")
            cs = [_complex(c, f"{pp}.coefficients[{i}]") for i, c in enumerate(coeffs)]
            order = _int(p.get("order", len(cs)), f"{pp}.order")
            if order != len(cs):
                raise ConfigError(f"{pp}.order", f"order {order} does not match {len(cs)} coefficients")
            if cs[-1] == 0:
                raise ConfigError(f"{pp}.coefficients", "top-order coefficient must be nonzero")
            parts.append({"re": _float(p["re"], f"{pp}.re"), "im": _float(p.get("im", 0.0), f"{pp}.im"),
                          "order": order, "coefficients": [_pair(c) for c in cs]})
        entire = fd.get("entire", [])
        if not isinstance(entire, list):
            raise ConfigError(f"{path}.entire", "expected a list")
        ent = [_pair(_complex(c, f"{path}.entire[{i}]")) for i, c in enumerate(entire)]
        comps.append({"poles": parts, "entire": ent})
    return comps


def _parse_section(raw, path, defaults: dict, kinds: dict) -> dict:
    raw = {} if raw is None else _require_dict(raw, path)
    _reject_unknown(raw, defaults, path)
    out = dict(defaults)
    for key, v in raw.items():
        kind = kinds[key]
        if v is None and kind.endswith("?"):
            out[key] = None
        elif kind.startswith("int"):
            out[key] = _int(v, f"{path}.{key}")
        elif kind.startswith("float"):
            out[key] = _float(v, f"{path}.{key}")
        elif kind.startswith("bool"):
            if not isinstance(v, bool):
                raise ConfigError(f"{path}.{key}", "expected true/false")
            out[key] = v
        elif kind.startswith("str"):
            if not isinstance(v, str):
                raise ConfigError(f"{path}.{key}", "expected a string")
            out[key] = v
    return out


def _parse_grids(raw) -> list:
    if raw is None:
        raw = [{"name": "E", "kind": "boundary"}]
    if not isinstance(raw, list) or not raw:
        raise ConfigError("grids", "expected a nonempty list")
    out, names = [], set()
    for i, gd in enumerate(raw):
        path = f"grids[{i}]"
        _require_dict(gd, path)
        kind = gd.get("kind")
        if kind not in _GRID_PARAMS:
            raise ConfigError(f"{path}.kind", f"expected one of {sorted(_GRID_PARAMS)}, got {kind!r}")
        spec = _GRID_PARAMS[kind]
        _reject_unknown(gd, {"name", "kind", "resolution", "random", *spec}, path)
        name = gd.get("name", kind)
        if not isinstance(name, str) or not name or not name.replace("_", "").replace("-", "").isalnum():
            raise ConfigError(f"{path}.name", "grid names must be nonempty alphanumeric (with - or _)")
        if name in names:
            raise ConfigError(f"{path}.name", f"duplicate grid name {name!r}")
        names.add(name)
        res = _int(gd.get("resolution", DEFAULT_RESOLUTION), f"{path}.resolution")
        if res < 1:
            raise ConfigError(f"{path}.resolution", "must be positive")
        entry = {"name": name, "kind": kind, "resolution": res}
        if kind == "band":
            rnd = gd.get("random", False)
            if not isinstance(rnd, bool):
                raise ConfigError(f"{path}.random", "expected true/false")
            entry["random"] = rnd
        elif "random" in gd:
            raise ConfigError(f"{path}.random", "only band grids can be random")
        for key, t in spec.items():
            if key not in gd:
                if kind == "disk" and key == "center":
                    entry[key] = [0.0, 0.0]
                    continue
                raise ConfigError(f"{path}.{key}", "missing")
            entry[key] = _canon(t, _typed(t, gd[key], f"{path}.{key}"))
        out.append(entry)
    return out


def parse_config_dict(raw: Any) -> ExperimentConfig:
    """Validate a decoded document and fill defaults.

    Raises
    ------
    ConfigError
        With the offending key path.
    """
    raw = _require_dict(copy.deepcopy(raw), "<root>")
    _reject_unknown(raw, _TOP_KEYS, "")
    for key in ("geometry", "functions", "m", "n_start"):
        if key not in raw:
            raise ConfigError(key, "missing")
    data: dict = {"name": raw.get("name", "experiment")}
    if not isinstance(data["name"], str):
        raise ConfigError("name", "expected a string")
    data["geometry"] = _parse_geometry(raw["geometry"])
    data["functions"] = _parse_functions(raw["functions"])
    m = raw["m"]
    if not isinstance(m, list) or not m:
        raise ConfigError("m", "expected a nonempty list of nonnegative integers")
    m = [_int(v, f"m[{i}]") for i, v in enumerate(m)]
    if any(v < 0 for v in m):
        raise ConfigError("m", "entries must be nonnegative")
    if sum(m) == 0:
        raise ConfigError("m", "multi-index must be nonzero (m in N^d minus {0})")
    if len(m) != len(data["functions"]):
        raise ConfigError("m", f"has {len(m)} entries but there are {len(data['functions'])} components")
    data["m"] = m
    data["n_start"] = _int(raw["n_start"], "n_start")
    if data["n_start"] < max(m):
        raise ConfigError("n_start", f"must be at least max(m) = {max(m)}")
    n_end = raw.get("n_end")
    data["n_end"] = None if n_end is None else _int(n_end, "n_end")
    if data["n_end"] is not None and data["n_end"] < data["n_start"]:
        raise ConfigError("n_end", "must be at least n_start")
    data["n_cap"] = _int(raw.get("n_cap", DEFAULT_N_CAP), "n_cap")
    if data["n_cap"] < data["n_start"]:
        raise ConfigError("n_cap", "must be at least n_start")
    data["quadrature"] = _parse_section(raw.get("quadrature"), "quadrature",
                                        {"rho": None, "N": DEFAULT_N, "dps": None, "engine": "auto"},
                                        {"rho": "float?", "N": "int", "dps": "int?", "engine": "str"})
    t = Tolerances()
    data["tolerances"] = _parse_section(raw.get("tolerances"), "tolerances",
                                        {"defect": t.defect, "root": t.root, "degeneracy_ratio": t.degeneracy_ratio,
                                         "absolute_floor": t.absolute_floor, "residual_buffer": t.residual_buffer},
                                        {"defect": "float", "root": "float", "degeneracy_ratio": "float",
                                         "absolute_floor": "float", "residual_buffer": "int"})
    data["fit"] = _parse_section(raw.get("fit"), "fit", {"floor": 1e-12, "cap": 1e-1},
                                 {"floor": "float", "cap": "float"})
    data["output"] = _parse_section(raw.get("output"), "output", {"dir": None, "coefficients": False},
                                    {"dir": "str?", "coefficients": "bool"})
    data["seed"] = _int(raw.get("seed", 0), "seed")
    data["grids"] = _parse_grids(raw.get("grids"))
    cfg = ExperimentConfig(data)
    _validate_semantics(cfg)
    return cfg


def _validate_semantics(cfg: ExperimentConfig) -> None:
    d = cfg.data
    q = d["quadrature"]
    if q["N"] < 1:
        raise ConfigError("quadrature.N", "must be positive")
    if q["dps"] is not None and q["dps"] < 16:
        raise ConfigError("quadrature.dps", "extended precision needs at least 16 digits")
    try:
        resolve_engine(q["dps"], q["engine"])
    except ValueError as exc:
        raise ConfigError("quadrature.engine", str(exc)) from exc
    tol = d["tolerances"]
    if tol["residual_buffer"] < 1:
        raise ConfigError("tolerances.residual_buffer", "must be positive")
    if not 0 < d["fit"]["floor"] < d["fit"]["cap"]:
        raise ConfigError("fit", "need 0 < floor < cap")
    k_max = cfg.n_last() + tol["residual_buffer"]
    if q["N"] < 2 * (k_max + 1):
        raise ConfigError("quadrature.N", f"N = {q['N']} too small; need at least {2 * (k_max + 1)}")
    try:
        F = cfg.function()
    except ValueError as exc:
        raise ConfigError("functions", str(exc)) from exc
    if not F.all_poles():
        raise ConfigError("functions", "at least one component needs a pole")
    g = F.geometry
    min_level = min(phi_abs(g, lam) for lam in F.all_poles())
    if q["rho"] is not None and not 1 < q["rho"] < min_level:
        raise ConfigError("quadrature.rho", f"must lie in (1, {min_level:.6g}) for these poles")
    profile = pole_profile(F, cfg.multi_index())
    from padefaber.analysis import validate_grid

    try:
        grids = cfg.grids()
    except (ValueError, KeyError) as exc:
        raise ConfigError("grids", str(exc)) from exc
    for i, K in enumerate(grids):
        try:
            validate_grid(K, profile, g)
        except ValueError as exc:
            raise ConfigError(f"grids[{i}]", str(exc)) from exc


def parse_config(text: str) -> ExperimentConfig:
    """Parse a JSON document into a validated :class:`ExperimentConfig`."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"invalid JSON: {exc}") from exc
    return parse_config_dict(raw)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
