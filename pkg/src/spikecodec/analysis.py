"""
Spatial predictability of the spike, interval and scene representations, and
the initial-state and interval-distribution experiments.
"""

import logging
from dataclasses import dataclass
from enum import IntEnum
from functools import singledispatch
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from dataclasses_json import DataClassJsonMixin
from numpy.typing import NDArray
from scipy import ndimage, stats

from .errors import ConfigError
from .representation import (
    TFI_FALLBACK_WINDOW,
    IsiField,
    reconstruct_tfp,
    spikes_to_isi,
)
from .spike_model import SceneSequence, SimulatorConfig, SpikeStream, simulate_trace

__all__: List[str] = [
    "ISI_ENTROPY_CAP",
    "ISI_ENTROPY_NORMALIZATION",
    "ISI_NORMALIZATION",
    "InitialStateTrace",
    "IsiStats",
    "Representation",
    "RepresentationGrid",
    "RepresentationMetrics",
    "compare_representations",
    "conditional_entropy",
    "default_bins",
    "entropy_bits",
    "initial_state_sweep",
    "interval_grid",
    "isi_distribution",
    "neighborhood_variance",
    "representation_grid",
    "spike_hamming_distance",
]

logger = logging.getLogger(__name__)

# Interval grids are compared as firing rates, 1 / ISI in (0, 1], for the
# variance and as intervals clipped to ISI_ENTROPY_CAP frames for the entropy.
ISI_NORMALIZATION: str = "firing_rate"
ISI_ENTROPY_CAP: int = 32
ISI_ENTROPY_NORMALIZATION: str = f"interval/{ISI_ENTROPY_CAP}"

################################################################################
# Representation grids
################################################################################


class Representation(IntEnum):
    Spike = 0
    Isi = 1
    Scene = 2


@dataclass(frozen=True, eq=False)
class RepresentationGrid:
    values: NDArray[np.float64]
    tag: Representation

    def __post_init__(self) -> None:
        if self.values.ndim != 2:
            raise ConfigError(f"grid must be two-dimensional, found {self.values.shape}")
        if self.values.size and (self.values.min() < 0 or self.values.max() > 1):
            raise ConfigError("grid values must be normalised to [0, 1]")

    def transpose(self) -> "RepresentationGrid":
        return RepresentationGrid(self.values.T, self.tag)


@singledispatch
def representation_grid(source: Any, k: int) -> RepresentationGrid:
    """
    Frame ``k`` of a spike stream, interval field or scene as a grid in
    [0, 1]. Intervals are normalised to firing rates.
    """
    raise TypeError(type(source))


@representation_grid.register
def _(source: SpikeStream, k: int) -> RepresentationGrid:
    return RepresentationGrid(source.planes[k].astype(np.float64), Representation.Spike)


@representation_grid.register
def _(source: IsiField, k: int) -> RepresentationGrid:
    isi = source.values[k]
    rate = np.zeros(isi.shape, dtype=np.float64)
    np.divide(1.0, isi, out=rate, where=isi > 0)
    return RepresentationGrid(rate, Representation.Isi)


@representation_grid.register
def _(source: SceneSequence, k: int) -> RepresentationGrid:
    return RepresentationGrid(np.asarray(source.frames[k], dtype=np.float64), Representation.Scene)


@representation_grid.register
def _(source: np.ndarray, k: int) -> RepresentationGrid:
    # A lone scene frame; there is only one frame to pick.
    return RepresentationGrid(np.asarray(source, dtype=np.float64), Representation.Scene)


def interval_grid(field: IsiField, k: int, cap: int = ISI_ENTROPY_CAP) -> RepresentationGrid:
    """
    Frame ``k`` of an interval field as ``min(ISI, cap) / cap``. With ``cap``
    value bins every whole interval below the cap gets a bin of its own.
    """
    if cap < 1:
        raise ConfigError(f"interval cap must be at least 1, found {cap}")
    values = np.minimum(field.values[k], cap).astype(np.float64) / cap
    return RepresentationGrid(values, Representation.Isi)


def default_bins(tag: Representation) -> Tuple[int, int]:
    """Value and condition bin counts used for each representation."""
    if tag is Representation.Spike:
        return (2, 32)
    return (32, 32)


################################################################################
# Neighbourhood statistics
################################################################################


def _interior(grid: RepresentationGrid, radius: int) -> NDArray[np.float64]:
    if radius < 1:
        raise ConfigError(f"neighbourhood radius must be at least 1, found {radius}")
    size = 2 * radius + 1
    height, width = grid.values.shape
    if height < size or width < size:
        raise ConfigError(
            f"a {height}x{width} grid is too small for neighbourhood radius {radius}"
        )
    return grid.values[radius:-radius, radius:-radius]


def _neighborhood_mean(
    grid: RepresentationGrid, radius: int, include_center: bool
) -> NDArray[np.float64]:
    size = 2 * radius + 1
    kernel = np.ones((size, size), dtype=np.float64)
    if not include_center:
        kernel[radius, radius] = 0.0
    kernel /= kernel.sum()
    mean = ndimage.correlate(grid.values, kernel, mode="constant", cval=0.0)
    return np.asarray(mean[radius:-radius, radius:-radius], dtype=np.float64)


def neighborhood_variance(
    grid: RepresentationGrid, radius: int, *, include_center: bool = False
) -> float:
    """
    Mean squared error of predicting each interior pixel by the mean of its
    ``(2r+1)^2 - 1`` neighbours.
    """
    target = _interior(grid, radius)
    prediction = _neighborhood_mean(grid, radius, include_center)
    return float(np.mean((prediction - target) ** 2))


def _quantize(values: NDArray[np.float64], bins: int) -> NDArray[np.int64]:
    return np.clip(np.floor(values * bins), 0, bins - 1).astype(np.int64)


def entropy_bits(grid: RepresentationGrid, radius: int, value_bins: int) -> float:
    """Entropy of the quantised interior pixels, in bits."""
    if value_bins < 2:
        raise ConfigError(f"at least two value bins are required, found {value_bins}")
    target = _quantize(_interior(grid, radius), value_bins)
    counts = np.bincount(target.ravel(), minlength=value_bins)
    return float(stats.entropy(counts, base=2))


def conditional_entropy(
    grid: RepresentationGrid,
    radius: int,
    value_bins: int,
    cond_bins: int,
    *,
    include_center: bool = False,
) -> float:
    """
    Entropy of the quantised pixel value given the quantised mean of its
    neighbourhood, ``H(X | C) = H(X, C) - H(C)``, in bits.
    """
    if value_bins < 2 or cond_bins < 2:
        raise ConfigError("at least two value and condition bins are required")
    target = _quantize(_interior(grid, radius), value_bins).ravel()
    condition = _quantize(_neighborhood_mean(grid, radius, include_center), cond_bins).ravel()
    joint = np.bincount(condition * value_bins + target, minlength=value_bins * cond_bins)
    marginal = joint.reshape(cond_bins, value_bins).sum(axis=1)
    h_joint = float(stats.entropy(joint, base=2))
    h_condition = float(stats.entropy(marginal, base=2))
    h_conditional = max(h_joint - h_condition, 0.0)

    # conditioning never increases entropy
    assert h_conditional <= entropy_bits(grid, radius, value_bins) + 1e-9
    return h_conditional


@dataclass(frozen=True)
class RepresentationMetrics(DataClassJsonMixin):
    representation: str
    frame: int
    radius: int
    variance: float
    conditional_entropy: float
    entropy: float
    value_bins: int
    cond_bins: int


def compare_representations(
    stream: SpikeStream,
    k: int,
    cfg: SimulatorConfig,
    *,
    radii: Sequence[int] = (1, 2),
    scene: Optional[SceneSequence] = None,
    representations: Sequence[Representation] = tuple(Representation),
) -> List[RepresentationMetrics]:
    """
    Variance and conditional entropy of frame ``k`` in each representation.
    Without ground-truth scenes the scene grid is the playback reconstruction.
    Interval variance is measured on firing rates and interval entropy on the
    clipped intervals themselves.
    """
    if not 0 <= k < stream.n_frames:
        raise ConfigError(f"frame {k} is outside the stream's {stream.n_frames} frames")
    if scene is not None and (
        k >= scene.n_frames or (scene.height, scene.width) != (stream.height, stream.width)
    ):
        raise ConfigError(
            f"ground-truth scenes of {scene.n_frames} frames of {scene.width}x{scene.height} "
            f"do not cover frame {k} of a {stream.width}x{stream.height} stream"
        )

    grids: Dict[Representation, RepresentationGrid] = {}
    entropy_grids: Dict[Representation, RepresentationGrid] = {}
    for tag in representations:
        if tag is Representation.Spike:
            grids[tag] = representation_grid(stream, k)
        elif tag is Representation.Isi:
            field = spikes_to_isi(stream)
            grids[tag] = representation_grid(field, k)
            entropy_grids[tag] = interval_grid(field, k)
        elif scene is not None:
            grids[tag] = representation_grid(scene, k)
        else:
            grids[tag] = representation_grid(
                reconstruct_tfp(stream, k, TFI_FALLBACK_WINDOW, cfg), k
            )

    rows: List[RepresentationMetrics] = []
    for radius in radii:
        for tag, grid in grids.items():
            value_bins, cond_bins = default_bins(tag)
            coded = entropy_grids.get(tag, grid)
            rows.append(
                RepresentationMetrics(
                    representation=tag.name.lower(),
                    frame=k,
                    radius=radius,
                    variance=neighborhood_variance(grid, radius),
                    conditional_entropy=conditional_entropy(
                        coded, radius, value_bins, cond_bins
                    ),
                    entropy=entropy_bits(coded, radius, value_bins),
                    value_bins=value_bins,
                    cond_bins=cond_bins,
                )
            )
            logger.debug("Measured %s", rows[-1])
    return rows


################################################################################
# Interval distribution
################################################################################


@dataclass(frozen=True)
class IsiStats:
    histogram: Dict[int, int]
    quartiles: Optional[Tuple[float, float, float]]
    count: int


def isi_distribution(field: IsiField) -> IsiStats:
    """
    Histogram and quartiles of the intervals in ``field``, counting each
    interval of each pixel once rather than once per frame it spans.
    """
    values, frames = np.unique(field.values[field.values > 0], return_counts=True)
    # An interval of length v is defined on exactly v frames.
    counts = frames // values
    histogram = {int(v): int(c) for v, c in zip(values, counts)}
    total = int(counts.sum())
    if total == 0:
        return IsiStats(histogram={}, quartiles=None, count=0)
    samples = np.repeat(values, counts)
    q1, median, q3 = np.percentile(samples, [25, 50, 75], method="linear")
    return IsiStats(
        histogram=histogram,
        quartiles=(float(q1), float(median), float(q3)),
        count=total,
    )


################################################################################
# Initial-state experiment
################################################################################


@dataclass(frozen=True, eq=False)
class InitialStateTrace:
    tau0: float
    hidden: NDArray[np.float64]
    fired: NDArray[np.bool_]
    isi: NDArray[np.int64]
    intervals: NDArray[np.int64]

    @property
    def first_spike(self) -> Optional[int]:
        spikes = np.flatnonzero(self.fired)
        return int(spikes[0]) if spikes.size else None


def initial_state_sweep(
    luminance: Sequence[float], cfg: SimulatorConfig, taus: Sequence[float]
) -> List[InitialStateTrace]:
    """
    Simulate one pixel under the same luminance trace from each initial state
    in ``taus``; the traces are aligned frame by frame.
    """
    for tau0 in taus:
        if not 0 <= tau0 < cfg.theta:
            raise ConfigError(f"initial state must lie in [0, {cfg.theta}), found {tau0}")
    traces: List[InitialStateTrace] = []
    for tau0 in taus:
        hidden, fired = simulate_trace(luminance, cfg, tau0)
        isi = spikes_to_isi(SpikeStream(fired.reshape(-1, 1, 1))).values[:, 0, 0]
        traces.append(
            InitialStateTrace(
                tau0=tau0,
                hidden=hidden,
                fired=fired,
                isi=isi,
                intervals=np.diff(np.flatnonzero(fired)).astype(np.int64),
            )
        )
    return traces


def spike_hamming_distance(a: SpikeStream, b: SpikeStream) -> int:
    """Number of (frame, pixel) positions where two streams disagree."""
    if a.planes.shape != b.planes.shape:
        raise ConfigError(f"stream shapes differ: {a.planes.shape} and {b.planes.shape}")
    return int(np.count_nonzero(a.planes ^ b.planes))
