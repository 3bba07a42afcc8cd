"""
Discrete-time integrate-and-fire model of a spike camera.

Each pixel integrates ``alpha * I`` once per frame period into a hidden
accumulator and fires when the accumulator reaches ``theta``. After a spike
the accumulator is either cleared (hard reset) or reduced by ``theta`` (soft
reset). A frame holds at most one spike per pixel.
"""

import logging
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from dataclasses_json import DataClassJsonMixin
from numpy.typing import NDArray
from typing_extensions import TypeAlias

from .errors import ConfigError, EmptySceneError

__all__: List[str] = [
    "FIRE_TOLERANCE",
    "InitKind",
    "InitPolicy",
    "ResetMode",
    "SceneFrame",
    "SceneSequence",
    "SimulatorConfig",
    "SpikeStream",
    "expected_firing_rate",
    "expected_isi",
    "inject_spurious_spikes",
    "integrate_frames",
    "simulate",
    "simulate_trace",
    "step",
]

logger = logging.getLogger(__name__)

# Relative slack on the threshold test, so that accumulations which equal
# theta in exact arithmetic still fire after binary rounding.
FIRE_TOLERANCE: float = 1e-9

SceneFrame: TypeAlias = NDArray[np.float64]

################################################################################
# Configuration
################################################################################


class ResetMode(IntEnum):
    Hard = 0
    Soft = 1


class InitKind(IntEnum):
    Constant = 0
    UniformRandom = 1


@dataclass(frozen=True)
class InitPolicy(DataClassJsonMixin):
    """
    Initial accumulator state: a constant for every pixel, or uniform noise in
    ``[0, theta)`` drawn from a generator seeded with ``seed``.
    """

    kind: InitKind = InitKind.Constant
    value: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", InitKind(self.kind))

    @staticmethod
    def constant(value: float) -> "InitPolicy":
        return InitPolicy(kind=InitKind.Constant, value=value)

    @staticmethod
    def uniform_random(seed: int) -> "InitPolicy":
        return InitPolicy(kind=InitKind.UniformRandom, seed=seed)

    def initial_state(self, shape: Tuple[int, int], theta: float) -> NDArray[np.float64]:
        if self.kind is InitKind.Constant:
            return np.full(shape, self.value, dtype=np.float64)
        # Drawn in one row-major batch: the state of pixel (y, x) depends only
        # on the seed and the pixel's row-major index.
        rng = np.random.default_rng(np.random.SeedSequence(self.seed))
        return rng.random(shape, dtype=np.float64) * theta


@dataclass(frozen=True)
class SimulatorConfig(DataClassJsonMixin):
    alpha: float = 1.0
    theta: float = 2.0
    reset_mode: ResetMode = ResetMode.Soft
    init_policy: InitPolicy = field(default_factory=InitPolicy)

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be positive, found {self.alpha}")
        if not self.theta > 0:
            raise ConfigError(f"theta must be positive, found {self.theta}")
        if self.init_policy.kind is InitKind.Constant and not (
            0 <= self.init_policy.value < self.theta
        ):
            raise ConfigError(
                f"initial state must lie in [0, {self.theta}), "
                f"found {self.init_policy.value}"
            )
        # Normalise plain integers loaded from JSON or the command line.
        object.__setattr__(self, "reset_mode", ResetMode(self.reset_mode))

    @property
    def frame_period(self) -> float:
        return 1.0

    def with_init(self, init_policy: InitPolicy) -> "SimulatorConfig":
        return SimulatorConfig(
            alpha=self.alpha,
            theta=self.theta,
            reset_mode=self.reset_mode,
            init_policy=init_policy,
        )


################################################################################
# Scenes and spike streams
################################################################################


@dataclass(frozen=True, eq=False)
class SceneSequence:
    """
    Luminance frames in [0, 1], stored as an array of shape (frames, height,
    width). Read-only broadcast views are accepted, so a constant scene of any
    length costs a single frame of memory.
    """

    frames: NDArray[np.floating]

    def __post_init__(self) -> None:
        if self.frames.ndim != 3:
            raise ConfigError(
                f"scene frames must have shape (frames, height, width), "
                f"found {self.frames.shape}"
            )
        if self.frames.shape[1] == 0 or self.frames.shape[2] == 0:
            raise ConfigError(f"scene frames must be non-empty, found {self.frames.shape}")
        if self.frames.size and (self.frames.min() < 0 or self.frames.max() > 1):
            raise ConfigError("scene luminance must lie in [0, 1]")

    @staticmethod
    def from_frames(frames: Sequence[NDArray[np.floating]]) -> "SceneSequence":
        if not frames:
            raise EmptySceneError("scene has no frames")
        shapes = {frame.shape for frame in frames}
        if len(shapes) != 1:
            raise ConfigError(f"scene frames differ in shape: {sorted(shapes)}")
        return SceneSequence(np.stack([np.asarray(f, dtype=np.float64) for f in frames]))

    @staticmethod
    def constant(luminance: float, n_frames: int, height: int, width: int) -> "SceneSequence":
        frame = np.full((height, width), luminance, dtype=np.float64)
        return SceneSequence(np.broadcast_to(frame, (n_frames, height, width)))

    @property
    def n_frames(self) -> int:
        return int(self.frames.shape[0])

    @property
    def height(self) -> int:
        return int(self.frames.shape[1])

    @property
    def width(self) -> int:
        return int(self.frames.shape[2])


@dataclass(frozen=True)
class SpikeStream:
    """
    Binary spike planes of shape (frames, height, width).

    ``origin`` is the index of the first plane in the timeline of the stream
    this one was derived from; it is zero for simulated or recorded streams
    and positive for streams regenerated over a sub-range of the source.
    """

    planes: NDArray[np.bool_]
    origin: int = 0

    def __post_init__(self) -> None:
        planes = np.asarray(self.planes)
        if planes.ndim != 3:
            raise ConfigError(
                f"spike planes must have shape (frames, height, width), "
                f"found {planes.shape}"
            )
        if planes.dtype != np.bool_:
            if planes.size and not np.isin(planes, (0, 1)).all():
                raise ConfigError("spike planes must be binary")
            planes = planes.astype(np.bool_)
        object.__setattr__(self, "planes", planes)

    @staticmethod
    def zeros(n_frames: int, height: int, width: int) -> "SpikeStream":
        return SpikeStream(np.zeros((n_frames, height, width), dtype=np.bool_))

    @property
    def n_frames(self) -> int:
        return int(self.planes.shape[0])

    @property
    def height(self) -> int:
        return int(self.planes.shape[1])

    @property
    def width(self) -> int:
        return int(self.planes.shape[2])

    def spike_count(self) -> NDArray[np.int64]:
        """Total spikes per pixel."""
        return self.planes.sum(axis=0, dtype=np.int64)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpikeStream):
            return NotImplemented
        return (
            self.origin == other.origin
            and self.planes.shape == other.planes.shape
            and bool(np.array_equal(self.planes, other.planes))
        )


################################################################################
# Integrate, fire, reset
################################################################################


def _integrate_and_fire(
    tau: NDArray[np.float64],
    luminance: NDArray[np.floating],
    cfg: SimulatorConfig,
    fired: NDArray[np.bool_],
    increment: NDArray[np.float64],
) -> None:
    """
    Advance the accumulators ``tau`` by one frame, in place, and write the
    fired bits into ``fired``. ``increment`` is scratch space of tau's shape.
    """
    np.multiply(luminance, cfg.alpha, out=increment)
    tau += increment
    np.greater_equal(tau, cfg.theta * (1.0 - FIRE_TOLERANCE), out=fired)
    if cfg.reset_mode is ResetMode.Hard:
        np.copyto(tau, 0.0, where=fired)
        return
    if cfg.alpha > cfg.theta:
        # One frame can overshoot by several thresholds; subtract all of them
        # but keep the single spike the plane can express.
        np.floor(tau * (1.0 + FIRE_TOLERANCE) / cfg.theta, out=increment)
        np.maximum(increment, 1.0, out=increment)
        increment *= cfg.theta
        np.subtract(tau, increment, out=tau, where=fired)
    else:
        np.subtract(tau, cfg.theta, out=tau, where=fired)
    np.maximum(tau, 0.0, out=tau)


def step(tau: float, luminance: float, cfg: SimulatorConfig) -> Tuple[float, int]:
    """
    Advance a single accumulator by one frame.

    Returns the new accumulator state and the fired bit.
    """
    state = np.array([tau], dtype=np.float64)
    fired = np.zeros(1, dtype=np.bool_)
    _integrate_and_fire(
        state,
        np.array([luminance], dtype=np.float64),
        cfg,
        fired,
        np.empty(1, dtype=np.float64),
    )
    return (float(state[0]), int(fired[0]))


def integrate_frames(
    frames: Iterable[NDArray[np.floating]],
    n_frames: int,
    shape: Tuple[int, int],
    cfg: SimulatorConfig,
    *,
    origin: int = 0,
) -> SpikeStream:
    """
    Run the simulator over ``n_frames`` luminance frames produced lazily by
    ``frames``. Used by ``simulate`` and by the decoder, which synthesises its
    luminance frames on the fly.
    """
    if n_frames <= 0:
        raise EmptySceneError("scene has no frames")
    tau = cfg.init_policy.initial_state(shape, cfg.theta)
    increment = np.empty(shape, dtype=np.float64)
    planes = np.zeros((n_frames, *shape), dtype=np.bool_)
    count = 0
    for n, frame in enumerate(frames):
        if n >= n_frames:
            break
        _integrate_and_fire(tau, frame, cfg, planes[n], increment)
        count += 1
    if count != n_frames:
        raise EmptySceneError(f"expected {n_frames} frames, received {count}")
    logger.debug(
        "Simulated %d frames of %dx%d, %d spikes",
        n_frames,
        shape[1],
        shape[0],
        int(planes.sum()),
    )
    return SpikeStream(planes, origin=origin)


def simulate(scene: SceneSequence, cfg: SimulatorConfig) -> SpikeStream:
    if scene.n_frames == 0:
        raise EmptySceneError("scene has no frames")
    return integrate_frames(
        (scene.frames[n] for n in range(scene.n_frames)),
        scene.n_frames,
        (scene.height, scene.width),
        cfg,
    )


def simulate_trace(
    luminance: Sequence[float], cfg: SimulatorConfig, tau0: float
) -> Tuple[NDArray[np.float64], NDArray[np.bool_]]:
    """
    Simulate one pixel from the initial state ``tau0``, returning the hidden
    state after every frame alongside the fired bits.
    """
    hidden = np.zeros(len(luminance), dtype=np.float64)
    fired = np.zeros(len(luminance), dtype=np.bool_)
    tau = tau0
    for n, value in enumerate(luminance):
        tau, bit = step(tau, value, cfg)
        hidden[n] = tau
        fired[n] = bool(bit)
    return (hidden, fired)


################################################################################
# Expectations
################################################################################


def expected_isi(luminance: float, cfg: SimulatorConfig) -> float:
    """Expected inter-spike interval, in frames, under constant luminance."""
    if not 0 < luminance <= 1:
        raise ConfigError(
            f"expected interval is defined for luminance in (0, 1], found {luminance}"
        )
    return cfg.theta / (cfg.alpha * luminance)


def expected_firing_rate(luminance: float, cfg: SimulatorConfig) -> float:
    """
    Expected spikes per frame; linear in luminance with slope alpha/theta.
    Luminance outside [0, 1] is clamped to the nearest bound.
    """
    return (cfg.alpha / cfg.theta) * min(max(luminance, 0.0), 1.0)


################################################################################
# Noise
################################################################################


def inject_spurious_spikes(stream: SpikeStream, p: float, seed: int) -> SpikeStream:
    """
    Flip every silent bit to a spike independently with probability ``p``.
    Existing spikes are kept.
    """
    if not 0 <= p <= 1:
        raise ConfigError(f"spurious spike probability must lie in [0, 1], found {p}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    noise = rng.random(stream.planes.shape) < p
    return SpikeStream(stream.planes | noise, origin=stream.origin)
