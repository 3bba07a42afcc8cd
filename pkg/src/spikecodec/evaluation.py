"""
Fidelity and rate metrics in the scene, interval and firing-rate domains,
Bjontegaard deltas, and rate-distortion sweeps over codec quality.
"""

import logging
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from dataclasses_json import DataClassJsonMixin
from numpy.typing import ArrayLike, NDArray

from .codec import CodecConfig, CompressedContainer, compress, decompress, reconstruct_keyframe
from .errors import (
    ConfigError,
    EmptyIntersectionError,
    EmptyScheduleError,
    RdCurveError,
    SpikeCodecError,
)
from .representation import spikes_to_isi
from .spike_model import SceneSequence, SpikeStream

__all__: List[str] = [
    "BPP_DENOMINATOR",
    "ISI_CAP",
    "METRICS",
    "PSNR_CAP",
    "Domain",
    "RdCurve",
    "RdPoint",
    "RdSweep",
    "bd_psnr",
    "bd_rate",
    "bpp",
    "domain_psnr",
    "psnr",
    "rd_point",
    "rd_sweep",
]

logger = logging.getLogger(__name__)

PSNR_CAP: float = 99.0
ISI_CAP: int = 255

# Recorded alongside sweep results.
BPP_DENOMINATOR: str = "width*height*keyframes"


class Domain(IntEnum):
    Isi = 0
    FiringRate = 1


################################################################################
# Distortion
################################################################################


def psnr(a: ArrayLike, b: ArrayLike, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB, capped at ``PSNR_CAP``."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape:
        raise ConfigError(f"cannot compare shapes {x.shape} and {y.shape}")
    if x.size == 0:
        raise ConfigError("cannot compare empty inputs")
    mse = float(np.mean((x - y) ** 2))
    if mse == 0:
        return PSNR_CAP
    return min(10.0 * float(np.log10(peak**2 / mse)), PSNR_CAP)


def _overlap(
    raw: SpikeStream, raw_origin: int, recon: SpikeStream, recon_origin: int
) -> Tuple[int, int]:
    start = max(raw_origin, recon_origin)
    stop = min(raw_origin + raw.n_frames, recon_origin + recon.n_frames)
    return (start, stop)


def domain_psnr(
    raw: SpikeStream,
    recon: SpikeStream,
    domain: Domain,
    *,
    recon_origin: Optional[int] = None,
) -> float:
    """
    PSNR between two streams after conversion to intervals or firing rates.

    Frames are aligned on the streams' origins (``recon_origin`` overrides the
    reconstruction's) and only positions where both fields are defined are
    compared. Intervals are capped at ``ISI_CAP`` and compared against that
    peak; firing rates against a peak of 1.
    """
    if (raw.height, raw.width) != (recon.height, recon.width):
        raise ConfigError(
            f"stream dimensions differ: {raw.width}x{raw.height} and "
            f"{recon.width}x{recon.height}"
        )
    offset = recon.origin if recon_origin is None else recon_origin
    start, stop = _overlap(raw, raw.origin, recon, offset)
    if stop <= start:
        raise EmptyIntersectionError("streams share no frames")

    a = spikes_to_isi(raw).values[start - raw.origin : stop - raw.origin]
    b = spikes_to_isi(recon).values[start - offset : stop - offset]
    defined = (a > 0) & (b > 0)
    if not defined.any():
        raise EmptyIntersectionError("no position has a defined interval in both streams")

    if domain is Domain.Isi:
        return psnr(
            np.minimum(a[defined], ISI_CAP),
            np.minimum(b[defined], ISI_CAP),
            peak=float(ISI_CAP),
        )
    return psnr(1.0 / a[defined], 1.0 / b[defined], peak=1.0)


################################################################################
# Rate
################################################################################


def bpp(container: CompressedContainer) -> float:
    """Container bits per pixel of each coded keyframe."""
    keyframes = len(container.payloads)
    if keyframes == 0:
        schedule = container.schedule()
        raise EmptyScheduleError(container.n_frames, schedule.half_window, schedule.step)
    return container.total_bits / (container.width * container.height * keyframes)


################################################################################
# Rate-distortion curves
################################################################################


@dataclass(frozen=True)
class RdPoint(DataClassJsonMixin):
    bpp: float
    psnr_scene: Optional[float] = None
    psnr_isi: Optional[float] = None
    psnr_fr: Optional[float] = None
    quality: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.bpp > 0:
            raise RdCurveError(f"rate must be positive, found {self.bpp}")

    def metric(self, name: str) -> Optional[float]:
        if name not in METRICS:
            raise ConfigError(f"unknown metric {name!r}, expected one of {list(METRICS)}")
        value: Optional[float] = getattr(self, name)
        return value


METRICS: Tuple[str, ...] = ("psnr_scene", "psnr_isi", "psnr_fr")


@dataclass(frozen=True)
class RdCurve:
    points: Tuple[RdPoint, ...]

    def __post_init__(self) -> None:
        for lower, upper in zip(self.points, self.points[1:]):
            if not upper.bpp > lower.bpp:
                raise RdCurveError(
                    f"rates must increase strictly, found {lower.bpp} then {upper.bpp}"
                )

    def __len__(self) -> int:
        return len(self.points)

    def samples(self, metric: str) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Log10 rates and the chosen PSNR of every point."""
        values = [point.metric(metric) for point in self.points]
        if any(value is None for value in values):
            raise RdCurveError(f"curve has points without {metric}")
        rates = np.log10([point.bpp for point in self.points])
        return (rates, np.array(values, dtype=np.float64))


def _fit_inputs(
    curve: RdCurve, metric: str
) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    if len(curve) < 4:
        raise RdCurveError(f"a cubic fit needs at least 4 points, found {len(curve)}")
    return curve.samples(metric)


def _mean_difference(
    anchor_x: NDArray[np.float64],
    anchor_y: NDArray[np.float64],
    test_x: NDArray[np.float64],
    test_y: NDArray[np.float64],
) -> float:
    """Mean of test minus anchor cubic fits of y over the shared x range."""
    low = max(anchor_x.min(), test_x.min())
    high = min(anchor_x.max(), test_x.max())
    if not high > low:
        raise RdCurveError("curves do not overlap")
    anchor_integral = np.polyint(np.polyfit(anchor_x, anchor_y, 3))
    test_integral = np.polyint(np.polyfit(test_x, test_y, 3))
    area_anchor = np.polyval(anchor_integral, high) - np.polyval(anchor_integral, low)
    area_test = np.polyval(test_integral, high) - np.polyval(test_integral, low)
    return float((area_test - area_anchor) / (high - low))


def bd_rate(anchor: RdCurve, test: RdCurve, metric: str = "psnr_scene") -> float:
    """
    Average rate difference of ``test`` against ``anchor`` at equal quality,
    in percent. Negative values mean ``test`` needs fewer bits.
    """
    anchor_rate, anchor_psnr = _fit_inputs(anchor, metric)
    test_rate, test_psnr = _fit_inputs(test, metric)
    difference = _mean_difference(anchor_psnr, anchor_rate, test_psnr, test_rate)
    return (10.0**difference - 1.0) * 100.0


def bd_psnr(anchor: RdCurve, test: RdCurve, metric: str = "psnr_scene") -> float:
    """Average PSNR difference of ``test`` against ``anchor`` at equal rate, in dB."""
    anchor_rate, anchor_psnr = _fit_inputs(anchor, metric)
    test_rate, test_psnr = _fit_inputs(test, metric)
    return _mean_difference(anchor_rate, anchor_psnr, test_rate, test_psnr)


################################################################################
# Sweeps
################################################################################


@dataclass
class RdSweep:
    points: List[RdPoint] = field(default_factory=list)
    # Quality pairs whose rates do not increase.
    violations: List[Tuple[int, int]] = field(default_factory=list)
    # Metric and quality pairs whose PSNR falls as quality rises.
    fidelity_drops: List[Tuple[str, int, int]] = field(default_factory=list)
    failures: Dict[int, str] = field(default_factory=dict)

    def curve(self) -> RdCurve:
        return RdCurve(tuple(self.points))

    def add(self, point: RdPoint) -> None:
        """Append a point measured at a higher quality than the last one."""
        if self.points:
            previous = self.points[-1]
            assert previous.quality is not None and point.quality is not None
            pair = (previous.quality, point.quality)
            if not point.bpp > previous.bpp:
                self.violations.append(pair)
                logger.warning("Rate does not increase from quality %d to %d", *pair)
            for metric in METRICS:
                before, after = previous.metric(metric), point.metric(metric)
                if before is not None and after is not None and after < before:
                    self.fidelity_drops.append((metric, *pair))
                    logger.warning(
                        "%s falls from %.2f to %.2f dB between quality %d and %d",
                        metric,
                        before,
                        after,
                        *pair,
                    )
        self.points.append(point)


def _scene_references(
    stream: SpikeStream,
    keyframes: Sequence[int],
    cfg: CodecConfig,
    scenes: Optional[SceneSequence],
) -> NDArray[np.float64]:
    if scenes is not None:
        if scenes.n_frames != stream.n_frames or (scenes.height, scenes.width) != (
            stream.height,
            stream.width,
        ):
            raise ConfigError("reference scenes do not match the stream dimensions")
        return np.stack([np.asarray(scenes.frames[k], dtype=np.float64) for k in keyframes])
    return np.stack([reconstruct_keyframe(stream, k, cfg) for k in keyframes])


def _optional_domain_psnr(
    raw: SpikeStream, recon: SpikeStream, domain: Domain
) -> Optional[float]:
    try:
        return domain_psnr(raw, recon, domain)
    except EmptyIntersectionError as e:
        logger.info("No %s comparison: %s", domain.name, e)
        return None


def rd_point(
    stream: SpikeStream, cfg: CodecConfig, *, scenes: Optional[SceneSequence] = None
) -> RdPoint:
    container = compress(stream, cfg)
    decoded = decompress(container)
    references = _scene_references(stream, decoded.keyframes, cfg, scenes)
    return RdPoint(
        bpp=bpp(container),
        psnr_scene=psnr(references, decoded.scenes.frames),
        psnr_isi=_optional_domain_psnr(stream, decoded.regenerated, Domain.Isi),
        psnr_fr=_optional_domain_psnr(stream, decoded.regenerated, Domain.FiringRate),
        quality=cfg.quality,
    )


def rd_sweep(
    stream: SpikeStream,
    cfg: CodecConfig,
    qualities: Sequence[int],
    *,
    scenes: Optional[SceneSequence] = None,
) -> RdSweep:
    """
    Compress and decompress ``stream`` at each quality and measure rate and
    fidelity. Scene fidelity is measured against ``scenes`` when given and
    otherwise against the codec's own keyframe reconstructions of the source.
    A failing point is logged and skipped.
    """
    if not qualities:
        raise ConfigError("a sweep needs at least one quality")
    sweep = RdSweep()
    for quality in sorted(set(qualities)):
        try:
            point = rd_point(stream, cfg.with_quality(quality), scenes=scenes)
        except SpikeCodecError as e:
            logger.warning("Skipping quality %d: %s", quality, e)
            sweep.failures[quality] = str(e)
            continue
        logger.info("Quality %d: %.4f bpp, scene %.2f dB", quality, point.bpp, point.psnr_scene)
        sweep.add(point)
    return sweep
