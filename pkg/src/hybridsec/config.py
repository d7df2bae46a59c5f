"""Scenario configuration: nested parameter blocks and a small text format.

A config file is UTF-8 text with one ``section.key = value`` per line and
``#`` comments.  Lists are comma separated.  Every key has a default, so an
empty file is a valid Table-1 scenario.

    run.trials = 300
    sweep.variable = d_d
    sweep.values = 3, 4, 5, 6, 7
"""
from __future__ import annotations

import dataclasses
import importlib.resources
from dataclasses import dataclass, field
from pathlib import Path

from .channels import Geometry, RfModel, VlcFrontEnd
from .errors import ConfigError
from .known_csi import KnownCsiConfig
from .link import EnergyHarvestParams, SystemParams
from .unknown_csi import UnknownCsiConfig

KNOWN_METHODS = ("sdr", "zf")
UNKNOWN_METHODS = ("mrt", "an-sdr", "an-mrt")
ALL_METHODS = KNOWN_METHODS + UNKNOWN_METHODS
SWEEP_VARIABLES = ("d_d", "d_e", "d_e_min", "r_th", "r_th_d", "eta")


@dataclass(frozen=True)
class QosBlock:
    r_th: float = 2.0
    r_th_d: float = 2.0
    eta: float = 0.8


@dataclass(frozen=True)
class RunBlock:
    trials: int = 300
    seed: int = 20240601
    methods: tuple[str, ...] = ("sdr", "zf")
    # reuse each trial's draws at every sweep point (paired comparisons)
    common_draws: bool = True


@dataclass(frozen=True)
class SweepBlock:
    variable: str = "d_d"
    values: tuple[float, ...] = (5.0,)
    # optional second variable drawn as separate curves
    series_variable: str = ""
    series_values: tuple[float, ...] = ()


@dataclass(frozen=True)
class KnownBlock:
    bisection_tol: float = 1e-4
    max_iters: int = 40
    randomization_samples: int = 200


@dataclass(frozen=True)
class UnknownBlock:
    expectation_samples: int = 500
    full_log_exponent: bool = True
    shared_jamming_gain: bool = False
    clamp_per_draw: bool = False
    randomization_samples: int = 200


@dataclass(frozen=True)
class ScenarioConfig:
    vlc: VlcFrontEnd = field(default_factory=VlcFrontEnd)
    rf: RfModel = field(default_factory=RfModel)
    harvest: EnergyHarvestParams = field(default_factory=EnergyHarvestParams)
    geometry: Geometry = field(default_factory=Geometry)
    qos: QosBlock = field(default_factory=QosBlock)
    run: RunBlock = field(default_factory=RunBlock)
    sweep: SweepBlock = field(default_factory=SweepBlock)
    known: KnownBlock = field(default_factory=KnownBlock)
    unknown: UnknownBlock = field(default_factory=UnknownBlock)

    def __post_init__(self):
        if self.run.trials < 1:
            raise ConfigError("run.trials must be >= 1")
        if not 0 <= self.run.seed < 2**64:
            raise ConfigError("run.seed must be a 64-bit unsigned integer")
        if not self.run.methods:
            raise ConfigError("run.methods is empty")
        for m in self.run.methods:
            if m not in ALL_METHODS:
                raise ConfigError(f"unknown method {m!r}; expected one of {', '.join(ALL_METHODS)}")
        for name, values, var in (("sweep", self.sweep.values, self.sweep.variable),
                                  ("series", self.sweep.series_values, self.sweep.series_variable)):
            if name == "series" and not var:
                if values:
                    raise ConfigError("sweep.series_values given without sweep.series_variable")
                continue
            if var not in SWEEP_VARIABLES:
                raise ConfigError(f"cannot sweep {var!r}; expected one of {', '.join(SWEEP_VARIABLES)}")
            if not values:
                raise ConfigError(f"{name} values are empty")
            if any(b <= a for a, b in zip(values, values[1:])):
                raise ConfigError(f"{name} values must be strictly increasing")
        if self.sweep.series_variable and self.sweep.series_variable == self.sweep.variable:
            raise ConfigError("series variable must differ from the sweep variable")
        # the per-module dataclasses validate themselves on construction
        self.system_params()
        self.known_config("sdr")
        self.unknown_config("an-sdr")

    def at(self, **values: float) -> "ScenarioConfig":
        """Copy with sweep variables (d_d, r_th, ...) set to the given values."""
        geo = {k: v for k, v in values.items() if k in ("d_d", "d_e", "d_e_min")}
        qos = {k: v for k, v in values.items() if k in ("r_th", "r_th_d", "eta")}
        try:
            return dataclasses.replace(self, geometry=dataclasses.replace(self.geometry, **geo),
                                       qos=dataclasses.replace(self.qos, **qos))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def system_params(self) -> SystemParams:
        try:
            sp = SystemParams(fe=self.vlc, rf=self.rf, eh=self.harvest, eta=self.qos.eta)
            sp.k
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return sp

    def known_config(self, method: str) -> KnownCsiConfig:
        try:
            return KnownCsiConfig(r_th=self.qos.r_th, method=method,
                                  bisection_tol=self.known.bisection_tol,
                                  max_iters=self.known.max_iters,
                                  randomization_samples=self.known.randomization_samples)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def unknown_config(self, method: str) -> UnknownCsiConfig:
        u = self.unknown
        try:
            return UnknownCsiConfig(r_th=self.qos.r_th, r_th_d=self.qos.r_th_d, method=method,
                                    eav_distance_min=self.geometry.d_e_min,
                                    expectation_samples=u.expectation_samples,
                                    full_log_exponent=u.full_log_exponent,
                                    shared_jamming_gain=u.shared_jamming_gain,
                                    clamp_per_draw=u.clamp_per_draw,
                                    randomization_samples=u.randomization_samples)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _coerce(raw: str, default, key: str):
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            low = raw.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw, 0)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            items = [s.strip() for s in raw.split(",") if s.strip()]
            if key.endswith("methods"):
                return tuple(items)
            return tuple(float(s) for s in items)
        return raw
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None


def apply_overrides(cfg: ScenarioConfig, overrides: dict[str, str]) -> ScenarioConfig:
    """Return ``cfg`` with dotted ``section.key`` string overrides applied."""
    blocks: dict[str, dict] = {}
    for dotted, raw in overrides.items():
        section, _, key = dotted.partition(".")
        if not key or section not in {f.name for f in dataclasses.fields(ScenarioConfig)}:
            raise ConfigError(f"unknown section in {dotted!r}")
        block = getattr(cfg, section)
        names = {f.name for f in dataclasses.fields(block)}
        if key not in names:
            raise ConfigError(f"unknown key {dotted!r}")
        blocks.setdefault(section, {})[key] = _coerce(raw, getattr(block, key), dotted)
    try:
        new_blocks = {s: dataclasses.replace(getattr(cfg, s), **kv) for s, kv in blocks.items()}
        return dataclasses.replace(cfg, **new_blocks)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config_text(text: str, origin: str = "<string>") -> ScenarioConfig:
    overrides: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{origin}:{lineno}: expected 'section.key = value'")
        key = key.strip()
        if key in overrides:
            raise ConfigError(f"{origin}:{lineno}: duplicate key {key!r}")
        overrides[key] = value
    try:
        return apply_overrides(ScenarioConfig(), overrides)
    except ConfigError as exc:
        raise ConfigError(f"{origin}: {exc}") from None


def shipped_configs() -> list[str]:
    root = importlib.resources.files("hybridsec") / "configs"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_config(ref: str | Path) -> ScenarioConfig:
    """Load a config file, or a shipped config by name (``fig2``)."""
    path = Path(ref)
    if path.is_file():
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        return parse_config_text(text, str(path))
    name = str(ref)
    if name in shipped_configs():
        res = importlib.resources.files("hybridsec") / "configs" / f"{name}.cfg"
        return parse_config_text(res.read_text(encoding="utf-8"), f"{name}.cfg")
    raise ConfigError(f"config file not found: {ref}")
