"""
Conversions between spike, inter-spike interval, firing-rate and scene
representations, and the keyframe schedule used to divide a stream into
overlapping blocks.
"""

from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigError, CorruptStreamError
from .spike_model import SceneFrame, SimulatorConfig, SpikeStream

__all__: List[str] = [
    "TFI_FALLBACK_WINDOW",
    "FiringRateField",
    "IsiField",
    "IsiRepr",
    "KeyframeSchedule",
    "firing_rate",
    "isi_repr_to_spikes",
    "keyframe_schedule",
    "reconstruct_interval_mean",
    "reconstruct_tfi",
    "reconstruct_tfp",
    "spikes_to_isi",
    "spikes_to_isi_repr",
]

# Window used by texture-from-interval for pixels whose enclosing interval is
# undefined (before the first or after the last spike).
TFI_FALLBACK_WINDOW: int = 31

################################################################################
# Inter-spike intervals
################################################################################


@dataclass(frozen=True, eq=False)
class IsiField:
    """
    Per-frame, per-pixel enclosing inter-spike interval.

    ``values[n, y, x]`` is ``t_b - t_a`` for the consecutive spikes
    ``t_a <= n < t_b`` of pixel (y, x), or 0 where no such pair exists.
    ``origin`` is inherited from the spike stream.
    """

    values: NDArray[np.int64]
    origin: int = 0

    @property
    def n_frames(self) -> int:
        return int(self.values.shape[0])

    @property
    def height(self) -> int:
        return int(self.values.shape[1])

    @property
    def width(self) -> int:
        return int(self.values.shape[2])

    @property
    def defined(self) -> NDArray[np.bool_]:
        return self.values > 0


@dataclass(frozen=True, eq=False)
class FiringRateField:
    """Reciprocal of an ``IsiField``; 0 where the interval is undefined."""

    values: NDArray[np.float64]
    origin: int = 0

    @property
    def defined(self) -> NDArray[np.bool_]:
        return self.values > 0


def spikes_to_isi(stream: SpikeStream) -> IsiField:
    planes = stream.planes
    n_frames = planes.shape[0]
    index = np.arange(n_frames, dtype=np.int64).reshape(-1, 1, 1)

    # Most recent spike at or before n, -1 if none.
    previous = np.maximum.accumulate(np.where(planes, index, -1), axis=0)

    # First spike strictly after n, n_frames if none.
    at_or_after = np.where(planes, index, n_frames)
    at_or_after = np.minimum.accumulate(at_or_after[::-1], axis=0)[::-1]
    following = np.full_like(at_or_after, n_frames)
    following[:-1] = at_or_after[1:]

    defined = (previous >= 0) & (following < n_frames)
    values = np.where(defined, following - previous, 0).astype(np.int64)
    return IsiField(values, origin=stream.origin)


def firing_rate(field: IsiField) -> FiringRateField:
    values = np.zeros(field.values.shape, dtype=np.float64)
    np.divide(1.0, field.values, out=values, where=field.values > 0)
    return FiringRateField(values, origin=field.origin)


@dataclass(frozen=True, eq=False)
class IsiRepr:
    """
    Lossless interval encoding of a spike stream.

    Pixels are stored in row-major order. ``first_spike`` holds each pixel's
    first spike time (-1 when it never fires); ``intervals`` concatenates the
    gaps between consecutive spikes of every pixel, and ``interval_counts``
    says how many of them belong to each pixel.
    """

    width: int
    height: int
    n_frames: int
    first_spike: NDArray[np.int64]
    interval_counts: NDArray[np.int64]
    intervals: NDArray[np.int64]

    def pixel(self, y: int, x: int) -> Tuple[Optional[int], List[int]]:
        index = y * self.width + x
        start = int(self.interval_counts[:index].sum())
        stop = start + int(self.interval_counts[index])
        first = int(self.first_spike[index])
        return (
            None if first < 0 else first,
            [int(gap) for gap in self.intervals[start:stop]],
        )

    def pixels(self) -> Iterator[Tuple[Optional[int], List[int]]]:
        for y in range(self.height):
            for x in range(self.width):
                yield self.pixel(y, x)


def spikes_to_isi_repr(stream: SpikeStream) -> IsiRepr:
    n_frames, height, width = stream.planes.shape
    # Pixel-major order so that every pixel's spike times come out sorted.
    pixel, time = np.nonzero(stream.planes.reshape(n_frames, -1).T)
    counts = np.bincount(pixel, minlength=height * width).astype(np.int64)

    first_spike = np.full(height * width, -1, dtype=np.int64)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    firing = counts > 0
    first_spike[firing] = time[starts[firing]]

    gaps = np.diff(time)
    same_pixel = np.diff(pixel) == 0
    return IsiRepr(
        width=width,
        height=height,
        n_frames=n_frames,
        first_spike=first_spike,
        interval_counts=np.maximum(counts - 1, 0),
        intervals=gaps[same_pixel].astype(np.int64),
    )


def isi_repr_to_spikes(repr: IsiRepr) -> SpikeStream:
    n_pixels = repr.width * repr.height
    if repr.first_spike.shape != (n_pixels,) or repr.interval_counts.shape != (n_pixels,):
        raise CorruptStreamError("interval representation does not match its dimensions")
    if int(repr.interval_counts.sum()) != repr.intervals.size:
        raise CorruptStreamError("interval counts do not add up to the interval list")
    if repr.intervals.size and int(repr.intervals.min()) < 1:
        raise CorruptStreamError("intervals must be positive")
    silent = repr.first_spike < 0
    if np.any(silent & (repr.interval_counts > 0)):
        raise CorruptStreamError("a pixel without a first spike cannot have intervals")

    pixel = np.repeat(np.arange(n_pixels), repr.interval_counts)
    # Spike times: the first spike, then the running sum of each pixel's gaps.
    boundaries = np.concatenate(([0], np.cumsum(repr.interval_counts)))
    running = np.cumsum(repr.intervals)
    offsets = np.concatenate(([0], running))[boundaries[:-1]]
    later = repr.first_spike[pixel] + running - offsets[pixel]
    firing = np.flatnonzero(~silent)
    times = np.concatenate((repr.first_spike[firing], later))
    owners = np.concatenate((firing, pixel))

    if times.size and int(times.max()) >= repr.n_frames:
        raise CorruptStreamError(
            f"spike at frame {int(times.max())} exceeds the {repr.n_frames}-frame stream"
        )
    planes = np.zeros((repr.n_frames, n_pixels), dtype=np.bool_)
    planes[times, owners] = True
    return SpikeStream(planes.reshape(repr.n_frames, repr.height, repr.width))


################################################################################
# Scene reconstruction
################################################################################


def reconstruct_tfp(
    stream: SpikeStream, k: int, window: int, cfg: SimulatorConfig
) -> SceneFrame:
    """
    Texture from playback: luminance from the spike count in an odd window
    centred on frame ``k``, clipped to the stream.
    """
    if window <= 0 or window % 2 == 0:
        raise ConfigError(f"playback window must be a positive odd length, found {window}")
    if not 0 <= k < stream.n_frames:
        raise ConfigError(f"frame {k} is outside the {stream.n_frames}-frame stream")
    radius = (window - 1) // 2
    start = max(0, k - radius)
    stop = min(stream.n_frames, k + radius + 1)
    count = stream.planes[start:stop].sum(axis=0, dtype=np.int64)
    luminance = count * cfg.theta / (cfg.alpha * (stop - start))
    return np.clip(luminance, 0.0, 1.0)


def _enclosing_interval(planes: NDArray[np.bool_], k: int) -> NDArray[np.int64]:
    """The row ``k`` of ``spikes_to_isi`` without building the whole field."""
    head = planes[: k + 1]
    tail = planes[k + 1 :]
    if tail.shape[0] == 0:
        return np.zeros(planes.shape[1:], dtype=np.int64)
    previous = k - np.argmax(head[::-1], axis=0)
    following = k + 1 + np.argmax(tail, axis=0)
    defined = head.any(axis=0) & tail.any(axis=0)
    return np.where(defined, following - previous, 0).astype(np.int64)


def reconstruct_tfi(stream: SpikeStream, k: int, cfg: SimulatorConfig) -> SceneFrame:
    """
    Texture from interval: luminance from the enclosing inter-spike interval
    at frame ``k``, inverting ``E[ISI] = theta / (alpha * I)``.
    """
    if not 0 <= k < stream.n_frames:
        raise ConfigError(f"frame {k} is outside the {stream.n_frames}-frame stream")
    isi = _enclosing_interval(stream.planes, k)
    luminance = reconstruct_tfp(stream, k, TFI_FALLBACK_WINDOW, cfg)
    defined = isi > 0
    luminance[defined] = cfg.theta / (cfg.alpha * isi[defined])
    return np.clip(luminance, 0.0, 1.0)


def reconstruct_interval_mean(
    stream: SpikeStream,
    k: int,
    radius: Union[int, NDArray[np.int64]],
    cfg: SimulatorConfig,
    fallback: Optional[SceneFrame] = None,
) -> SceneFrame:
    """
    Luminance from the mean interval between the first and last spike within
    ``radius`` frames of ``k``. ``radius`` is a scalar or a per-pixel grid.
    Pixels with fewer than two spikes in their window take ``fallback``,
    texture from interval when it is not given.
    """
    if not 0 <= k < stream.n_frames:
        raise ConfigError(f"frame {k} is outside the {stream.n_frames}-frame stream")
    shape = stream.planes.shape[1:]
    radii = np.broadcast_to(np.asarray(radius, dtype=np.int64), shape)
    if radii.size and int(radii.min()) < 1:
        raise ConfigError(f"integration radius must be at least 1, found {int(radii.min())}")
    if fallback is None:
        fallback = reconstruct_tfi(stream, k, cfg)
    elif fallback.shape != shape:
        raise ConfigError(f"fallback shape {fallback.shape} does not match the stream {shape}")

    reach = int(radii.max()) if radii.size else 0
    offset = max(0, k - reach)
    planes = stream.planes[offset : min(stream.n_frames, k + reach + 1)]
    n = planes.shape[0]
    index = np.arange(n, dtype=np.int64).reshape(-1, 1, 1)
    low = (np.maximum(k - radii, 0) - offset)[None]
    high = (np.minimum(k + radii, stream.n_frames - 1) - offset)[None]

    previous = np.maximum.accumulate(np.where(planes, index, -1), axis=0)
    following = np.minimum.accumulate(np.where(planes, index, n)[::-1], axis=0)[::-1]
    first = np.take_along_axis(following, low, axis=0)[0]
    last = np.take_along_axis(previous, high, axis=0)[0]
    counts = np.concatenate(
        (np.zeros((1, *shape), dtype=np.int64), np.cumsum(planes, axis=0, dtype=np.int64))
    )
    count = (
        np.take_along_axis(counts, high + 1, axis=0) - np.take_along_axis(counts, low, axis=0)
    )[0]

    luminance = np.array(fallback, dtype=np.float64)
    enough = count >= 2
    mean_interval = (last - first)[enough] / (count[enough] - 1)
    luminance[enough] = cfg.theta / (cfg.alpha * mean_interval)
    return np.clip(luminance, 0.0, 1.0)


################################################################################
# Keyframe schedule
################################################################################


@dataclass(frozen=True)
class KeyframeSchedule:
    step: int
    block_radius: int
    branch_radius: int
    n_frames: int
    keyframes: Tuple[int, ...]

    @property
    def half_window(self) -> int:
        return self.branch_radius * self.step + self.block_radius

    def __len__(self) -> int:
        return len(self.keyframes)

    def __bool__(self) -> bool:
        return bool(self.keyframes)

    def window(self, k: int) -> Tuple[int, int]:
        """Inclusive-exclusive frame range drawn on by keyframe ``k``."""
        return (k - self.half_window, k + self.half_window + 1)

    def coverage(self) -> Tuple[int, int]:
        """Inclusive-exclusive frame range covered by all keyframe windows."""
        if not self.keyframes:
            return (0, 0)
        return (self.window(self.keyframes[0])[0], self.window(self.keyframes[-1])[1])


def keyframe_schedule(
    n_frames: int, step: int = 7, block_radius: int = 6, branch_radius: int = 2
) -> KeyframeSchedule:
    """
    Keyframes are the multiples of ``step`` whose window of radius
    ``branch_radius * step + block_radius`` fits inside the stream.
    """
    if step < 1:
        raise ConfigError(f"keyframe step must be at least 1, found {step}")
    if block_radius < 0 or branch_radius < 0:
        raise ConfigError("block and branch radius must be non-negative")
    half_window = branch_radius * step + block_radius
    first = -(-half_window // step) * step
    last = n_frames - 1 - half_window
    keyframes = tuple(range(first, last + 1, step)) if last >= first else ()
    return KeyframeSchedule(
        step=step,
        block_radius=block_radius,
        branch_radius=branch_radius,
        n_frames=n_frames,
        keyframes=keyframes,
    )
