"""Problem configuration files (TOML, SI units, angles in degrees).

Layout::

    [array]      d1 d2 d3 d4 d5 d6 w1 w2
    [waim]       layers anisotropic t_min t_max eps_min eps_max
    [[waim.layer]]  t eps | t eps_xx eps_yy eps_zz   (optional fixed design)
    [scan]       theta_min theta_max phi_min phi_max f_min f_max n_theta n_phi n_freq solid_angle
    [spectral]   P Q M delta arl_cap engine tail_nodes
    [swarm]      R zeta1 zeta2 zeta3 K window threshold seed v_max_fraction

Unknown keys are rejected and every problem is reported at once.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import tomlkit
from tomlkit.exceptions import ParseError

from .errors import ValidationError
from .greens import UniaxialLayer, WaimStack
from .lattice import ArrayDescriptors
from .moments import TruncationConfig
from .objective import FeasibilitySets, Problem, ScanSpec, feasibility_check
from .swarm import SwarmConfig

REQUIRED = object()


@dataclass(frozen=True)
class WaimSettings:
    layers: int = 2
    anisotropic: bool = False
    bounds: FeasibilitySets = field(default_factory=FeasibilitySets)
    design: WaimStack | None = None


@dataclass(frozen=True)
class SpectralSettings:
    P: int = 60
    Q: int = 60
    M: int = 6
    delta: float = 1e-9
    arl_cap: float = 1e6
    engine: str = "fast"
    tail_nodes: int = 128

    @property
    def trunc(self) -> TruncationConfig:
        return TruncationConfig(self.P, self.Q, self.M)


@dataclass(frozen=True)
class ProblemConfig:
    array: ArrayDescriptors
    waim: WaimSettings = field(default_factory=WaimSettings)
    scan: ScanSpec = field(default_factory=ScanSpec)
    spectral: SpectralSettings = field(default_factory=SpectralSettings)
    swarm: SwarmConfig = field(default_factory=SwarmConfig)
    solid_angle: bool = False

    def problem(self) -> Problem:
        return Problem(self.array, self.scan, self.spectral.trunc, self.waim.bounds, self.spectral.delta,
                       self.spectral.arl_cap, self.solid_angle, self.spectral.engine == "fast",
                       self.spectral.tail_nodes)

    def with_seed(self, seed: int) -> "ProblemConfig":
        return replace(self, swarm=replace(self.swarm, seed=seed))

    def with_grid(self, n_theta: int, n_phi: int) -> "ProblemConfig":
        return replace(self, scan=replace(self.scan, n_theta=n_theta, n_phi=n_phi))

    def fingerprint(self) -> str:
        return fingerprint(self)


# key -> (kind, default); kinds: float, int, bool, vec2, str:<a|b>
_ARRAY = {k: ("float", REQUIRED) for k in ("d1", "d2", "d3", "d4", "d5", "d6")}
_ARRAY.update({"w1": ("vec2", REQUIRED), "w2": ("vec2", REQUIRED)})
_WAIM = {"layers": ("int", 2), "anisotropic": ("bool", False), "t_min": ("float", 0.0),
         "t_max": ("float", None), "eps_min": ("float", 1.0), "eps_max": ("float", 30.0)}
_LAYER = {"t": ("float", REQUIRED), "eps": ("float", None), "eps_xx": ("float", None),
          "eps_yy": ("float", None), "eps_zz": ("float", None)}
_SCAN = {"theta_min": ("float", 0.0), "theta_max": ("float", 90.0), "phi_min": ("float", 0.0),
         "phi_max": ("float", 90.0), "f_min": ("float", REQUIRED), "f_max": ("float", None),
         "n_theta": ("int", 30), "n_phi": ("int", 30), "n_freq": ("int", None), "solid_angle": ("bool", False)}
_SPECTRAL = {"P": ("int", 60), "Q": ("int", 60), "M": ("int", 6), "delta": ("float", 1e-9),
             "arl_cap": ("float", 1e6), "engine": ("str:fast|exact", "fast"), "tail_nodes": ("int", 128)}
_SWARM = {"R": ("int", 10), "zeta1": ("float", 0.4), "zeta2": ("float", 2.0), "zeta3": ("float", 2.0),
          "K": ("int", 200), "window": ("int", 30), "threshold": ("float", 1e-4), "seed": ("int", 0),
          "v_max_fraction": ("float", 0.5)}
_SECTIONS = {"array": _ARRAY, "waim": _WAIM, "scan": _SCAN, "spectral": _SPECTRAL, "swarm": _SWARM}


def _coerce(kind, value, path, errors):
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append(f"{path}: expected a number, got {value!r}")
            return None
        return float(value)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            errors.append(f"{path}: expected an integer, got {value!r}")
            return None
        return int(value)
    if kind == "bool":
        if not isinstance(value, bool):
            errors.append(f"{path}: expected true or false, got {value!r}")
            return None
        return value
    if kind == "vec2":
        ok = isinstance(value, list) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
        if not ok:
            errors.append(f"{path}: expected a two-element list of numbers, got {value!r}")
            return None
        return (float(value[0]), float(value[1]))
    if kind.startswith("str:"):
        choices = kind[4:].split("|")
        if value not in choices:
            errors.append(f"{path}: expected one of {choices}, got {value!r}")
            return None
        return value
    raise AssertionError(kind)


def _read_section(raw, name, schema, errors):
    out = {}
    if not isinstance(raw, dict):
        errors.append(f"{name}: expected a table")
        return {k: None for k in schema}
    for key in raw:
        if key not in schema and not (name == "waim" and key == "layer"):
            errors.append(f"{name}.{key}: unknown key")
    for key, (kind, default) in schema.items():
        if key in raw:
            out[key] = _coerce(kind, raw[key], f"{name}.{key}", errors)
        elif default is REQUIRED:
            errors.append(f"{name}.{key}: missing required key")
            out[key] = None
        else:
            out[key] = default
    return out


def _read_layers(raw, anisotropic, errors):
    if not isinstance(raw, list):
        errors.append("waim.layer: expected an array of tables")
        return None
    layers = []
    for i, entry in enumerate(raw):
        path = f"waim.layer[{i}]"
        v = _read_section(entry, path, _LAYER, errors)
        comps = (v["eps_xx"], v["eps_yy"], v["eps_zz"])
        if v["eps"] is not None and any(c is not None for c in comps):
            errors.append(f"{path}: give either eps or eps_xx/eps_yy/eps_zz, not both")
            continue
        if v["eps"] is not None:
            if anisotropic:
                errors.append(f"{path}: anisotropic designs need eps_xx, eps_yy and eps_zz")
                continue
            comps = (v["eps"],) * 3
        elif any(c is None for c in comps):
            errors.append(f"{path}: missing permittivity")
            continue
        elif not anisotropic and not comps[0] == comps[1] == comps[2]:
            errors.append(f"{path}: isotropic designs need equal permittivity components")
            continue
        if v["t"] is None:
            continue
        layers.append(UniaxialLayer(v["t"], *comps))
    return WaimStack(tuple(layers))


def parse_problem_config(text: str, source: str = "<string>") -> ProblemConfig:
    try:
        doc = tomlkit.parse(text).unwrap()
    except ParseError as exc:
        raise ValidationError([f"{source}:{exc.line}:{exc.col}: parse error: {exc}"]) from exc
    errors: list[str] = []
    for key in doc:
        if key not in _SECTIONS:
            errors.append(f"{key}: unknown section")
    vals = {}
    for name, schema in _SECTIONS.items():
        if name not in doc and name in ("array", "scan"):
            errors.append(f"{name}: missing section")
            vals[name] = {k: None for k in schema}
            continue
        vals[name] = _read_section(doc.get(name, {}), name, schema, errors)

    a = vals["array"]
    w = vals["waim"]
    s = vals["scan"]
    sp = vals["spectral"]
    sw = vals["swarm"]

    design = None
    if isinstance(doc.get("waim"), dict) and "layer" in doc["waim"]:
        design = _read_layers(doc["waim"]["layer"], bool(w["anisotropic"]), errors)
        if design is not None and w["layers"] is not None and design.L != w["layers"]:
            errors.append(f"waim.layers: {w['layers']} does not match {design.L} listed layers")

    if any(v is None for k, v in a.items()):
        array = None
    else:
        array = ArrayDescriptors(**a)
        errors += [f"array: {e}" for e in array.problems()]

    bounds = None
    if all(w[k] is not None for k in ("t_min", "eps_min", "eps_max")):
        bounds = FeasibilitySets(w["t_min"], w["t_max"], w["eps_min"], w["eps_max"])
        errors += [f"waim: {e}" for e in bounds.problems()]
    if w["layers"] is not None and w["layers"] < 0:
        errors.append("waim.layers: must be >= 0")

    scan = None
    if s["f_min"] is not None:
        f_max = s["f_max"] if s["f_max"] is not None else s["f_min"]
        n_freq = s["n_freq"] if s["n_freq"] is not None else (1 if f_max == s["f_min"] else 5)
        try:
            scan = ScanSpec(s["theta_min"], s["theta_max"], s["phi_min"], s["phi_max"], s["f_min"], f_max,
                            s["n_theta"], s["n_phi"], n_freq)
            errors += [f"scan: {e}" for e in scan.problems()]
        except TypeError:
            scan = None

    spectral = None
    if all(v is not None for v in sp.values()):
        spectral = SpectralSettings(**sp)
        errors += [f"spectral: {e}" for e in spectral.trunc.problems()]
        if spectral.arl_cap <= 1:
            errors.append("spectral.arl_cap: must exceed 1")
        if spectral.delta < 0:
            errors.append("spectral.delta: must be >= 0")
        if spectral.tail_nodes < 8:
            errors.append("spectral.tail_nodes: must be >= 8")

    swarm = None
    if all(v is not None for v in sw.values()):
        swarm = SwarmConfig(**sw)
        errors += [f"swarm: {e}" for e in swarm.problems()]

    if design is not None and bounds is not None and scan is not None and not scan.problems():
        ok, bad = feasibility_check(design, bounds, scan)
        errors += [f"waim.layer: {b}" for b in bad]

    if errors:
        raise ValidationError(errors)
    waim = WaimSettings(w["layers"], w["anisotropic"], bounds, design)
    return ProblemConfig(array, waim, scan, spectral, swarm, bool(s["solid_angle"]))


def load_problem_config(path) -> ProblemConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError([f"{path}: cannot read config: {exc.strerror}"]) from exc
    return parse_problem_config(text, str(path))


def config_to_dict(cfg: ProblemConfig) -> dict:
    a = cfg.array
    b = cfg.waim.bounds
    waim = {"layers": cfg.waim.layers, "anisotropic": cfg.waim.anisotropic, "t_min": b.t_min,
            "eps_min": b.eps_min, "eps_max": b.eps_max}
    if b.t_max is not None:
        waim["t_max"] = b.t_max
    if cfg.waim.design is not None:
        rows = []
        for layer in cfg.waim.design.layers:
            if cfg.waim.anisotropic:
                rows.append({"t": layer.t, "eps_xx": layer.eps_xx, "eps_yy": layer.eps_yy, "eps_zz": layer.eps_zz})
            else:
                rows.append({"t": layer.t, "eps": layer.eps_xx})
        waim["layer"] = rows
    s = cfg.scan
    return {
        "array": {"d1": a.d1, "d2": a.d2, "d3": a.d3, "d4": a.d4, "d5": a.d5, "d6": a.d6,
                  "w1": list(a.w1), "w2": list(a.w2)},
        "waim": waim,
        "scan": {"theta_min": s.theta_min, "theta_max": s.theta_max, "phi_min": s.phi_min, "phi_max": s.phi_max,
                 "f_min": s.f_min, "f_max": s.f_max, "n_theta": s.n_theta, "n_phi": s.n_phi,
                 "n_freq": s.n_freq, "solid_angle": cfg.solid_angle},
        "spectral": {f.name: getattr(cfg.spectral, f.name) for f in fields(SpectralSettings)},
        "swarm": asdict(cfg.swarm),
    }


def dump_problem_config(cfg: ProblemConfig) -> str:
    return tomlkit.dumps(config_to_dict(cfg))


def fingerprint(cfg: ProblemConfig) -> str:
    """SHA-256 over a canonical JSON rendering of every semantic field."""
    blob = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def shipped_configs() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files(__package__).joinpath("configs").iterdir()
                  if p.name.endswith(".toml"))


def shipped_config_path(name: str) -> Path:
    stem = name[:-5] if name.endswith(".toml") else name
    p = resources.files(__package__).joinpath("configs", stem + ".toml")
    return Path(str(p))


def resolve_config(ref: str) -> ProblemConfig:
    """Load ``ref`` as a path, falling back to a shipped config name."""
    p = Path(ref)
    if p.exists():
        return load_problem_config(p)
    stem = p.name
    for suffix in (".toml", ".cfg"):
        if stem.endswith(suffix):
            stem = stem[: -len(suffix)]
    if stem in shipped_configs():
        return load_problem_config(shipped_config_path(stem))
    raise ValidationError([f"{ref}: no such config file or shipped config"])
