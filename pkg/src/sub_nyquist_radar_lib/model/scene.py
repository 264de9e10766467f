import dataclasses
import math

import numpy as np

from sub_nyquist_radar_lib.model.radar import RadarParams
from sub_nyquist_radar_lib.utils.constant import MAX_SCENE_REJECTIONS
from sub_nyquist_radar_lib.utils.exceptions import ConfigError, DomainError
from sub_nyquist_radar_lib.utils.logger import LoggerFactory
from sub_nyquist_radar_lib.utils.unit import Seconds, Hertz, Decibel

logger = LoggerFactory.get_logger(__name__)


@dataclasses.dataclass(frozen=True)
class Target:
    tau: Seconds  # s
    nu: Hertz  # Hz
    alpha: complex


@dataclasses.dataclass(frozen=True)
class DelayClass:
    tau: Seconds  # s
    members: tuple[tuple[float, complex], ...]  # (nu [Hz], alpha)

    def __post_init__(self):
        if len(self.members) == 0:
            raise DomainError("A delay class needs at least one Doppler member.")
        dopplers = [nu for nu, _ in self.members]
        if len(set(dopplers)) != len(dopplers):
            raise DomainError(f"Dopplers within the class at tau={self.tau} must be distinct.")

    @property
    def K_tau_i(self) -> int:
        return len(self.members)

    @property
    def dopplers(self) -> list[float]:
        return [nu for nu, _ in self.members]

    @property
    def amplitudes(self) -> list[complex]:
        return [alpha for _, alpha in self.members]

    def targets(self) -> list[Target]:
        return [Target(self.tau, nu, alpha) for nu, alpha in self.members]


@dataclasses.dataclass(frozen=True)
class Scene:
    classes: tuple[DelayClass, ...] = ()

    def __post_init__(self):
        delays = [c.tau for c in self.classes]
        if len(set(delays)) != len(delays):
            raise DomainError("Delays of different classes must be pairwise distinct.")

    @classmethod
    def from_targets(cls, targets: list[Target]) -> "Scene":
        grouped: dict[float, list[tuple[float, complex]]] = {}
        for target in targets:
            grouped.setdefault(target.tau, []).append((target.nu, complex(target.alpha)))
        return cls(tuple(DelayClass(tau, tuple(members)) for tau, members in grouped.items()))

    @property
    def K(self) -> int:
        return sum(c.K_tau_i for c in self.classes)

    @property
    def K_tau(self) -> int:
        return len(self.classes)

    @property
    def targets(self) -> list[Target]:
        return [t for c in self.classes for t in c.targets()]

    @property
    def delays(self) -> list[float]:
        return [c.tau for c in self.classes]

    def sorted(self) -> "Scene":
        return Scene(tuple(sorted(self.classes, key=lambda c: c.tau)))

    def scaled(self, factor: complex) -> "Scene":
        return Scene(tuple(
            DelayClass(c.tau, tuple((nu, alpha * factor) for nu, alpha in c.members))
            for c in self.classes))

    def merged(self, other: "Scene") -> "Scene":
        return Scene(self.classes + other.classes)

    def validate(self, params: RadarParams) -> None:
        for c in self.classes:
            if not 0 <= c.tau < params.tau_max:
                raise DomainError(f"Delay {c.tau} s outside [0, {params.tau_max}) s.")
            for nu, alpha in c.members:
                if not -params.nu_max < nu < params.nu_max:
                    raise DomainError(f"Doppler {nu} Hz outside (-{params.nu_max}, {params.nu_max}) Hz.")
                if abs(alpha) == 0:
                    raise DomainError("Reflectivities must be nonzero.")


@dataclasses.dataclass(frozen=True)
class NoiseParams:
    N0: float = 0.0  # W/Hz, derived from the target SNR
    seed: int = 0

    def __post_init__(self):
        if self.N0 < 0:
            raise DomainError("N0 must be non-negative.")


@dataclasses.dataclass(frozen=True)
class ClutterParams:
    n_scatterers: int
    scr_db: Decibel  # math.inf means clutter-free
    delay_span: tuple[float, float]  # s
    doppler_bin_width: Hertz | None = None  # Hz, None means one Doppler resolution cell
    seed: int = 0

    def __post_init__(self):
        if self.n_scatterers <= 0:
            raise ConfigError("Clutter needs at least one scatterer.")
        if self.delay_span[0] > self.delay_span[1]:
            raise ConfigError("Clutter delay span must be ordered.")

    @property
    def is_clutter_free(self) -> bool:
        return math.isinf(self.scr_db) and self.scr_db > 0

    def validate(self, params: RadarParams) -> None:
        low, high = self.delay_span
        if low < 0 or high >= params.tau_max:
            raise ConfigError(f"Clutter delay span {self.delay_span} outside [0, {params.tau_max}) s.")


@dataclasses.dataclass(frozen=True)
class SceneSpec:
    K_tau: int
    delay_range: tuple[float, float]  # s
    doppler_range: tuple[float, float]  # Hz
    dopplers_per_class: tuple[int, int] = (1, 1)
    amplitude_range: tuple[float, float] = (0.1, 1.0)
    min_delay_separation: float = 2.0  # tau0
    min_doppler_separation: float = 2.0  # nu0
    doppler_exclusion: Hertz | None = None  # Hz, |nu| <= exclusion is rejected


def _draw_separated(rng: np.random.Generator,
                    low: float,
                    high: float,
                    taken: list[float],
                    separation: float,
                    budget: list[int],
                    exclusion: float | None = None,
                    ) -> float:
    while True:
        value = rng.uniform(low, high)
        accepted = all(abs(value - other) >= separation for other in taken)
        if exclusion is not None and abs(value) <= exclusion:
            accepted = False
        if accepted:
            return value
        budget[0] += 1
        if budget[0] > MAX_SCENE_REJECTIONS:
            raise ConfigError(
                f"Scene sampling exceeded {MAX_SCENE_REJECTIONS} rejections; separation infeasible.")


def draw_scene(rng: np.random.Generator, params: RadarParams, spec: SceneSpec) -> Scene:
    """Random scene with separated delays (between classes) and Dopplers (between all targets)."""
    delay_low, delay_high = spec.delay_range
    doppler_low, doppler_high = spec.doppler_range
    if delay_low < 0 or delay_high > params.tau_max:
        raise ConfigError(f"Delay range {spec.delay_range} outside [0, {params.tau_max}) s.")
    if doppler_low <= -params.nu_max or doppler_high >= params.nu_max:
        raise ConfigError(f"Doppler range {spec.doppler_range} outside the unambiguous band.")
    if spec.doppler_exclusion is not None and spec.doppler_exclusion >= max(abs(doppler_low), abs(doppler_high)):
        raise ConfigError(f"Doppler exclusion {spec.doppler_exclusion} Hz leaves no passband.")

    budget = [0]
    delays: list[float] = []
    for _ in range(spec.K_tau):
        delays.append(_draw_separated(rng, delay_low, delay_high, delays,
                                      spec.min_delay_separation * params.tau0, budget))

    dopplers: list[float] = []
    classes = []
    for tau in delays:
        count = int(rng.integers(spec.dopplers_per_class[0], spec.dopplers_per_class[1] + 1))
        members = []
        for _ in range(count):
            nu = _draw_separated(rng, doppler_low, doppler_high, dopplers,
                                 spec.min_doppler_separation * params.nu0, budget,
                                 exclusion=spec.doppler_exclusion)
            dopplers.append(nu)
            amplitude = rng.uniform(*spec.amplitude_range)
            phase = rng.uniform(0, 2 * np.pi)
            members.append((nu, complex(amplitude * np.exp(1j * phase))))
        classes.append(DelayClass(tau, tuple(members)))

    if budget[0] > 0:
        logger.debug(f"Scene drawn after {budget[0]} rejections.")
    return Scene(tuple(classes))
