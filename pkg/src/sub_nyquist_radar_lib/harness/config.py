import copy
import dataclasses
import hashlib
import math
import pathlib

import yaml

from sub_nyquist_radar_lib.aic.measurement_matrix import MatrixKind
from sub_nyquist_radar_lib.delay_est.music import MusicConfig
from sub_nyquist_radar_lib.model.radar import RadarParams
from sub_nyquist_radar_lib.model.scene import SceneSpec, Scene
from sub_nyquist_radar_lib.model.signal import AtomMode
from sub_nyquist_radar_lib.pipeline.pipeline import PipelineConfig, PipelineMethod
from sub_nyquist_radar_lib.utils.exceptions import ConfigError
from sub_nyquist_radar_lib.utils.logger import LoggerFactory

logger = LoggerFactory.get_logger(__name__)

DESK_PROFILE = {
    "seed": 2024,
    "workers": 1,
    "atom_mode": "model_matched",
    "radar": {"B": 1.0e8, "T": 5.12e-6, "T_p": 1.28e-6, "L": 64, "M": 128},
    "scene": {
        "K_tau": 10,
        "dopplers_per_class": [1, 1],
        "delay_range": [0.0, 2.56e-6],
        "doppler_range": [-92773.4375, 92773.4375],  # 0.95 of the unambiguous band
        "amplitude_range": [0.1, 1.0],
        "min_delay_separation": 2.0,
        "min_doppler_separation": 2.0,
    },
    "matrix": {"kind": "gaussian", "seed": None},
    "noise": {"snr_db": 10.0},
    "clutter": {
        "n_scatterers": 400,
        "scr_db": math.inf,
        "delay_span": [0.0, 2.56e-6],
        "doppler_bin_width": None,
        "cutoff": 9200.0,  # about 3 Doppler cells
    },
    "pipeline": {
        "method": "gesedd1",
        "K_tau": None,
        "K_per_class": "truth",
        "auto_K_tau": False,
        "D": 5,
        "whiten": None,
        "cluster_tol": None,
        "polish": True,
        "clutter_filter": None,
        "invert_filter": False,
        "detection_K": None,
        "tls": False,
        "criterion": "mdl",
    },
    "sweep": {
        "trials": 200,
        "snr_db": [-5.0, 0.0, 5.0, 10.0, 20.0, 30.0, math.inf],
        "resolution_mode": "ntd",
        "separations": [0.25, 0.5, 1.0, 2.0, 5.0, 10.0],
        "resolution_snr_db": 30.0,
        "scr_db": [-10.0, 0.0, 10.0, 20.0, math.inf],
        "clutter_snr_db": 10.0,
        "clutter_filter": True,
        "theorem1_N": 256,
        "theorem1_M": [8, 16, 32, 64],
        "theorem1_K_tau": [1, 2, 4],
        "theorem2_K_tau": [2, 3, 4],
        "com_kinds": ["gaussian", "bernoulli"],
        "com_M": [16, 32, 64, 128],
        "com_N": 256,
        "com_epsilon": 0.5,
    },
    "output": {"record_runtime": False, "svg": True},
}

PAPER_PROFILE = {
    "radar": {"B": 1.0e8, "T": 1.0e-4, "T_p": 1.0e-5, "L": 100, "M": 2000},
    "scene": {"delay_range": [0.0, 1.0e-5], "doppler_range": [-4950.0, 4950.0]},
    "clutter": {"n_scatterers": 4000, "delay_span": [0.0, 1.0e-5], "cutoff": 600.0},
}

PROFILES = {"desk": DESK_PROFILE, "paper": PAPER_PROFILE}

SENTINELS = {"noiseless": math.inf, "none": math.inf, "inf": math.inf, ".inf": math.inf}


def to_decibel(value) -> float:
    if isinstance(value, str):
        try:
            return SENTINELS[value.strip().lower()]
        except KeyError:
            raise ConfigError(f"Unknown dB value {value!r}.")
    return float(value)


def deep_merge(base: dict, override: dict) -> dict:
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _section(cls, data: dict | None, name: str):
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError(f"Section {name!r} must be a mapping.")
    known = {field.name for field in dataclasses.fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"Unknown keys in section {name!r}: {sorted(unknown)}")
    return cls(**data)


@dataclasses.dataclass(frozen=True)
class RadarSection:
    B: float  # Hz
    T: float  # s
    T_p: float  # s
    L: int
    M: int

    def to_params(self) -> RadarParams:
        return RadarParams(self.B, self.T, self.T_p, self.L, self.M)


@dataclasses.dataclass(frozen=True)
class SceneSection:
    K_tau: int
    dopplers_per_class: tuple[int, int]
    delay_range: tuple[float, float]  # s
    doppler_range: tuple[float, float]  # Hz
    amplitude_range: tuple[float, float]
    min_delay_separation: float  # tau0
    min_doppler_separation: float  # nu0

    def to_spec(self, doppler_exclusion: float | None = None) -> SceneSpec:
        return SceneSpec(K_tau=self.K_tau,
                         delay_range=tuple(self.delay_range),
                         doppler_range=tuple(self.doppler_range),
                         dopplers_per_class=tuple(self.dopplers_per_class),
                         amplitude_range=tuple(self.amplitude_range),
                         min_delay_separation=self.min_delay_separation,
                         min_doppler_separation=self.min_doppler_separation,
                         doppler_exclusion=doppler_exclusion)


@dataclasses.dataclass(frozen=True)
class MatrixSection:
    kind: str
    seed: int | None  # None: fresh matrix per trial

    def __post_init__(self):
        try:
            MatrixKind(self.kind)
        except ValueError:
            raise ConfigError(f"Unknown measurement matrix kind {self.kind!r}.")


@dataclasses.dataclass(frozen=True)
class NoiseSection:
    snr_db: float

    def __post_init__(self):
        object.__setattr__(self, "snr_db", to_decibel(self.snr_db))


@dataclasses.dataclass(frozen=True)
class ClutterSection:
    n_scatterers: int
    scr_db: float
    delay_span: tuple[float, float]  # s
    doppler_bin_width: float | None  # Hz
    cutoff: float  # Hz, filter used by the clutter sweep

    def __post_init__(self):
        object.__setattr__(self, "scr_db", to_decibel(self.scr_db))


@dataclasses.dataclass(frozen=True)
class PipelineSection:
    method: str
    K_tau: int | None  # None: number of delay classes in the scene
    K_per_class: int | list[int] | str  # int, list, "truth" or "auto"
    auto_K_tau: bool
    D: int
    whiten: bool | None
    cluster_tol: float | None  # s
    polish: bool
    clutter_filter: float | None  # Hz
    invert_filter: bool
    detection_K: int | None  # None: number of targets in the scene
    tls: bool
    criterion: str

    def __post_init__(self):
        try:
            PipelineMethod(self.method)
        except ValueError:
            raise ConfigError(f"Unknown method {self.method!r}.")
        if isinstance(self.K_per_class, str) and self.K_per_class not in ("truth", "auto"):
            raise ConfigError(f"K_per_class must be an int, a list, 'truth' or 'auto', got {self.K_per_class!r}.")

    def build(self, truth: Scene, clutter_filter: float | None = None) -> PipelineConfig:
        """Pipeline settings for one trial; unset orders come from the true scene."""
        truth = truth.sorted()
        K_tau = self.K_tau or max(truth.K_tau, 1)
        match self.K_per_class:
            case "truth":
                K_per_class = tuple(c.K_tau_i for c in truth.classes) if truth.K_tau == K_tau else 1
            case "auto":
                K_per_class = None
            case int() as value:
                K_per_class = value
            case values:
                K_per_class = tuple(values)

        detection_K = self.detection_K or (truth.K if truth.K > 0 else None)
        music = MusicConfig(K_tau=K_tau, D=self.D, whiten=self.whiten,
                            cluster_tol=self.cluster_tol, polish=self.polish)
        return PipelineConfig(music=music,
                              method=PipelineMethod(self.method),
                              K_per_class=K_per_class,
                              auto_K_tau=self.auto_K_tau,
                              clutter_filter=self.clutter_filter if clutter_filter is None else clutter_filter,
                              invert_filter=self.invert_filter,
                              detection_K=detection_K,
                              tls=self.tls,
                              criterion=self.criterion)


@dataclasses.dataclass(frozen=True)
class SweepSection:
    trials: int
    snr_db: list
    resolution_mode: str  # "ntd" or "ndd"
    separations: list  # NTD / NDD values
    resolution_snr_db: float
    scr_db: list
    clutter_snr_db: float
    clutter_filter: bool
    theorem1_N: int
    theorem1_M: list
    theorem1_K_tau: list
    theorem2_K_tau: list
    com_kinds: list
    com_M: list
    com_N: int
    com_epsilon: float

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}.")
        if self.resolution_mode not in ("ntd", "ndd"):
            raise ConfigError(f"resolution_mode must be 'ntd' or 'ndd', got {self.resolution_mode!r}.")
        object.__setattr__(self, "snr_db", [to_decibel(v) for v in self.snr_db])
        object.__setattr__(self, "scr_db", [to_decibel(v) for v in self.scr_db])
        object.__setattr__(self, "resolution_snr_db", to_decibel(self.resolution_snr_db))
        object.__setattr__(self, "clutter_snr_db", to_decibel(self.clutter_snr_db))


@dataclasses.dataclass(frozen=True)
class OutputSection:
    record_runtime: bool
    svg: bool


@dataclasses.dataclass(frozen=True)
class RunConfig:
    radar: RadarSection
    scene: SceneSection
    matrix: MatrixSection
    noise: NoiseSection
    clutter: ClutterSection
    pipeline: PipelineSection
    sweep: SweepSection
    output: OutputSection
    seed: int
    workers: int
    atom_mode: str
    raw: dict = dataclasses.field(repr=False, compare=False, default_factory=dict)

    __SECTIONS = {
        "radar": RadarSection, "scene": SceneSection, "matrix": MatrixSection, "noise": NoiseSection,
        "clutter": ClutterSection, "pipeline": PipelineSection, "sweep": SweepSection, "output": OutputSection,
    }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        unknown = set(data) - set(cls.__SECTIONS) - {"seed", "workers", "atom_mode"}
        if unknown:
            raise ConfigError(f"Unknown config sections: {sorted(unknown)}")
        try:
            AtomMode(data["atom_mode"])
        except ValueError:
            raise ConfigError(f"Unknown atom mode {data['atom_mode']!r}.")
        sections = {name: _section(section, data.get(name), name) for name, section in cls.__SECTIONS.items()}
        return cls(**sections, seed=int(data["seed"]), workers=int(data["workers"]),
                   atom_mode=data["atom_mode"], raw=copy.deepcopy(data))

    @property
    def params(self) -> RadarParams:
        return self.radar.to_params()

    @property
    def mode(self) -> AtomMode:
        return AtomMode(self.atom_mode)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.raw, sort_keys=True)

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.to_yaml().encode()).hexdigest()[:16]

    def with_overrides(self, **overrides) -> "RunConfig":
        """Dotted keys, e.g. with_overrides(**{"sweep.trials": 5})."""
        data = copy.deepcopy(self.raw)
        for dotted, value in overrides.items():
            node = data
            *parents, key = dotted.split(".")
            for parent in parents:
                node = node.setdefault(parent, {})
            node[key] = value
        return RunConfig.from_dict(data)


def profile_dict(profile: str = "desk") -> dict:
    if profile not in PROFILES:
        raise ConfigError(f"Unknown profile {profile!r}; choose from {sorted(PROFILES)}.")
    if profile == "desk":
        return copy.deepcopy(DESK_PROFILE)
    return deep_merge(DESK_PROFILE, PROFILES[profile])


def load_config(path: str | pathlib.Path | None = None, profile: str = "desk") -> RunConfig:
    data = profile_dict(profile)
    if path is not None:
        with open(path, "r") as f:
            user = yaml.safe_load(f) or {}
        if not isinstance(user, dict):
            raise ConfigError(f"Config file {path} must hold a mapping.")
        data = deep_merge(data, user)
        logger.info(f"Loaded config {path} over profile {profile}")
    return RunConfig.from_dict(data)
