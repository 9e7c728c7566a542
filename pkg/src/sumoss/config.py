"""TOML run configuration with strict key checking.

Sections and keys (all optional, all lengths in meters)::

    [area]       origin, width, height, rows, cols, layout
    [kernel]     phi, jitter
    [deviation]  w1, w2, gamma, regularization, loading_pos   # loading_pos relative to area origin
    [planner]    method, objective, expectation_samples, reuse_samples
    [mission]    n_max, seed, first_sensor
    [sweep]      w1_values, w2_values, runs, checkpoints, methods
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .deviation import DeviationModel
from .errors import ConfigError
from .experiments import WEIGHT_GRID, SweepSpec
from .gp import KernelModel, Position
from .simulator import AreaSpec, MissionConfig, PlannerSpec

__all__ = ["RunConfig", "load_config", "config_from_dict", "mission_to_dict", "mission_from_dict"]

_NUM = (int, float)

SCHEMA = {
    "area": {
        "origin": list,
        "width": _NUM,
        "height": _NUM,
        "rows": int,
        "cols": int,
        "layout": str,
    },
    "kernel": {"phi": _NUM, "jitter": _NUM},
    "deviation": {"w1": _NUM, "w2": _NUM, "gamma": _NUM, "regularization": _NUM, "loading_pos": list},
    "planner": {"method": str, "objective": str, "expectation_samples": int, "reuse_samples": bool},
    "mission": {"n_max": int, "seed": int, "first_sensor": (str, int)},
    "sweep": {"w1_values": list, "w2_values": list, "runs": int, "checkpoints": list, "methods": list},
}

DEFAULT_LOADING = (-3.0, 2.5)


@dataclass(frozen=True)
class RunConfig:
    mission: MissionConfig = field(default_factory=MissionConfig)
    sweep: SweepSpec = field(default_factory=SweepSpec)


def _type_ok(value, want) -> bool:
    if isinstance(value, bool):
        return want is bool
    if want == _NUM:
        return isinstance(value, _NUM)
    return isinstance(value, want)


def _locate(text: str | None, section: str, key: str | None = None) -> str:
    """Best-effort ' (line N)' suffix for a section header or a key inside it."""
    if not text:
        return ""
    current = None
    for no, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if stripped.startswith("["):
            current = stripped.strip("[] ")
            if key is None and current == section:
                return f" (line {no})"
        elif key is not None and current == section and stripped.split("=")[0].strip() == key:
            return f" (line {no})"
    return ""


def _check(doc: dict, source: str, text: str | None = None) -> None:
    for section, body in doc.items():
        if section not in SCHEMA:
            raise ConfigError(f"{source}{_locate(text, section)}: unknown section [{section}]")
        if not isinstance(body, dict):
            raise ConfigError(f"{source}: [{section}] must be a table")
        for key, value in body.items():
            where = _locate(text, section, key)
            if key not in SCHEMA[section]:
                raise ConfigError(f"{source}{where}: unknown key '{section}.{key}'")
            if not _type_ok(value, SCHEMA[section][key]):
                raise ConfigError(f"{source}{where}: '{section}.{key}' has invalid type {type(value).__name__}")


def _pair(value, name: str) -> tuple[float, float]:
    if len(value) != 2 or not all(isinstance(v, _NUM) and not isinstance(v, bool) for v in value):
        raise ConfigError(f"'{name}' must be a pair of numbers")
    return float(value[0]), float(value[1])


def mission_from_dict(doc: dict, source: str = "<config>", text: str | None = None) -> MissionConfig:
    _check(doc, source, text)
    try:
        a = doc.get("area", {})
        area_kw = {k: v for k, v in a.items() if k != "origin"}
        if "origin" in a:
            area_kw["origin"] = _pair(a["origin"], "area.origin")
        area = AreaSpec(**area_kw)

        kernel = KernelModel(**{k: float(v) for k, v in doc.get("kernel", {}).items()})

        d = dict(doc.get("deviation", {}))
        rel = _pair(d.pop("loading_pos"), "deviation.loading_pos") if "loading_pos" in d else DEFAULT_LOADING
        loading = Position(area.origin[0] + rel[0], area.origin[1] + rel[1])
        deviation = DeviationModel(loading_pos=loading, **{k: float(v) for k, v in d.items()})

        planner = PlannerSpec(**doc.get("planner", {}))
        m = doc.get("mission", {})
        return MissionConfig(area=area, kernel=kernel, deviation=deviation, planner=planner, **m)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def mission_to_dict(cfg: MissionConfig) -> dict:
    """Inverse of :func:`mission_from_dict` (loading position relative to origin)."""
    a, k, d, p = cfg.area, cfg.kernel, cfg.deviation, cfg.planner
    return {
        "area": {
            "origin": list(a.origin),
            "width": a.width,
            "height": a.height,
            "rows": a.rows,
            "cols": a.cols,
            "layout": a.layout,
        },
        "kernel": {"phi": k.phi, "jitter": k.jitter},
        "deviation": {
            "w1": d.w1,
            "w2": d.w2,
            "gamma": d.gamma,
            "regularization": d.regularization,
            "loading_pos": [d.loading_pos.x - a.origin[0], d.loading_pos.y - a.origin[1]],
        },
        "planner": {
            "method": p.method,
            "objective": p.objective,
            "expectation_samples": p.expectation_samples,
            "reuse_samples": p.reuse_samples,
        },
        "mission": {"n_max": cfg.n_max, "seed": cfg.seed, "first_sensor": cfg.first_sensor},
    }


def config_from_dict(doc: dict, source: str = "<config>", text: str | None = None) -> RunConfig:
    mission = mission_from_dict({k: v for k, v in doc.items() if k != "sweep"}, source, text)
    _check({"sweep": doc.get("sweep", {})}, source, text)
    s = doc.get("sweep", {})
    default_checkpoints = [n for n in (3, 6, 9, 12) if n <= mission.n_max] or [mission.n_max]
    try:
        sweep = SweepSpec(
            w1_values=tuple(float(v) for v in s.get("w1_values", WEIGHT_GRID)),
            w2_values=tuple(float(v) for v in s.get("w2_values", WEIGHT_GRID)),
            runs=s.get("runs", 10),
            base=mission,
            methods=tuple(s.get("methods", ("sumoss", "baseline"))),
            checkpoints=tuple(int(n) for n in s.get("checkpoints", default_checkpoints)),
            master_seed=mission.seed,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: [sweep] {exc}") from exc
    return RunConfig(mission, sweep)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(doc, str(path), text)
