"""
Scene-mediated spike stream compression.

A stream is reduced to scenes reconstructed at keyframes, the scenes are
transform coded, and the decoder regenerates spikes from the decoded scenes
with the integrate-and-fire model. A lossless context-coded baseline for spike
streams lives here as well.
"""

import logging
import struct
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from dataclasses_json import DataClassJsonMixin
from numpy.typing import NDArray
from scipy import fft
from typing_extensions import TypeAlias

from .errors import (
    BadMagicError,
    ConfigError,
    ContainerMismatchError,
    CorruptStreamError,
    EmptyScheduleError,
    LengthMismatchError,
    SpikeCodecError,
    TruncatedFileError,
)
from .rangecoder import BinaryModel, FrequencyModel, ModelSpec, RangeDecoder, RangeEncoder
from .representation import (
    KeyframeSchedule,
    keyframe_schedule,
    reconstruct_interval_mean,
    reconstruct_tfi,
    reconstruct_tfp,
)
from .spike_model import (
    InitPolicy,
    ResetMode,
    SceneFrame,
    SceneSequence,
    SimulatorConfig,
    SpikeStream,
    integrate_frames,
)

__all__: List[str] = [
    "BASE_STEP",
    "CONTAINER_MAGIC",
    "CodecConfig",
    "CompressedContainer",
    "Decompressed",
    "KeyframePayload",
    "ReconstructionMode",
    "RoiMode",
    "SaliencyMap",
    "activity_map",
    "compress",
    "decode_frame",
    "decode_spikes_lossless",
    "decompress",
    "encode_frame",
    "encode_spikes_lossless",
    "integration_radius",
    "quantizer_step",
    "reconstruct_keyframe",
    "roi_scale_index",
]

logger = logging.getLogger(__name__)

SaliencyMap: TypeAlias = NDArray[np.float64]

################################################################################
# Configuration
################################################################################


class ReconstructionMode(IntEnum):
    Tfi = 0
    Tfp = 1


class RoiMode(IntEnum):
    Off = 0
    # Compare spike activity before and after the keyframe.
    Bidirectional = 1
    # Use only the activity leading up to the keyframe.
    Forward = 2


@dataclass(frozen=True)
class CodecConfig(DataClassJsonMixin):
    step: int = 7
    block_radius: int = 6
    branch_radius: int = 2
    quality: int = 50
    roi: RoiMode = RoiMode.Off
    sim: SimulatorConfig = field(default_factory=SimulatorConfig)
    reconstruction: ReconstructionMode = ReconstructionMode.Tfi
    window: int = 31

    def __post_init__(self) -> None:
        if not 1 <= self.quality <= 100:
            raise ConfigError(f"quality must lie in [1, 100], found {self.quality}")
        for name in ("step", "block_radius", "branch_radius", "window"):
            value = getattr(self, name)
            if not 0 <= value <= 0xFFFF:
                raise ConfigError(f"{name} must fit in 16 bits, found {value}")
        if self.step < 1:
            raise ConfigError(f"keyframe step must be at least 1, found {self.step}")
        if self.window < 1 or self.window % 2 == 0:
            raise ConfigError(
                f"playback window must be a positive odd length, found {self.window}"
            )
        object.__setattr__(self, "roi", RoiMode(self.roi))
        object.__setattr__(self, "reconstruction", ReconstructionMode(self.reconstruction))

    @property
    def roi_enabled(self) -> bool:
        return self.roi is not RoiMode.Off

    @property
    def half_window(self) -> int:
        return self.branch_radius * self.step + self.block_radius

    def schedule(self, n_frames: int) -> KeyframeSchedule:
        return keyframe_schedule(n_frames, self.step, self.block_radius, self.branch_radius)

    def with_quality(self, quality: int) -> "CodecConfig":
        return CodecConfig(
            step=self.step,
            block_radius=self.block_radius,
            branch_radius=self.branch_radius,
            quality=quality,
            roi=self.roi,
            sim=self.sim,
            reconstruction=self.reconstruction,
            window=self.window,
        )


################################################################################
# Block transform
################################################################################

BLOCK: int = 8

# Quantiser step at quality 50; every 10 quality points halve or double it.
BASE_STEP: float = 2.0**-5


def _zigzag_order(size: int) -> NDArray[np.int64]:
    cells = sorted(
        ((y, x) for y in range(size) for x in range(size)),
        key=lambda cell: (
            cell[0] + cell[1],
            cell[1] if (cell[0] + cell[1]) % 2 == 0 else cell[0],
        ),
    )
    return np.array([y * size + x for y, x in cells], dtype=np.int64)


ZIGZAG: NDArray[np.int64] = _zigzag_order(BLOCK)
UNZIGZAG: NDArray[np.int64] = np.argsort(ZIGZAG)

# Context bands over zigzag positions: DC, then widening AC bands.
_BAND_EDGES = (1, 3, 6, 15, 28, 64)
_BANDS: Tuple[int, ...] = tuple(
    int(np.searchsorted(_BAND_EDGES, position, side="right")) for position in range(BLOCK * BLOCK)
)
_N_BANDS = len(_BAND_EDGES)
_UNARY_LIMIT = 14
_GREATER_CONTEXTS = 4

# ROI step multipliers: 0.5 + index / 8 for index 0..8.
_ROI_LEVELS = 9
_NEUTRAL_SCALE = (_ROI_LEVELS - 1) // 2

# Every block codes its end of block with this model.
_EOB_SPEC = ModelSpec(alphabet_size=BLOCK * BLOCK + 1)


def quantizer_step(quality: int) -> float:
    if not 1 <= quality <= 100:
        raise ConfigError(f"quality must lie in [1, 100], found {quality}")
    return float(BASE_STEP * 2.0 ** ((50 - quality) / 10))


def roi_scale_index(saliency_mean: NDArray[np.float64]) -> NDArray[np.int64]:
    """Per-block multiplier index; high saliency gets a finer step."""
    scale = np.clip(1.5 - saliency_mean, 0.5, 1.5)
    return np.rint((scale - 0.5) * (_ROI_LEVELS - 1)).astype(np.int64)


def _roi_scale(index: NDArray[np.int64]) -> NDArray[np.float64]:
    return 0.5 + index.astype(np.float64) / (_ROI_LEVELS - 1)


def _to_blocks(frame: NDArray[np.float64]) -> NDArray[np.float64]:
    height, width = frame.shape
    padded = np.pad(
        frame,
        ((0, -height % BLOCK), (0, -width % BLOCK)),
        mode="edge",
    )
    rows, cols = padded.shape[0] // BLOCK, padded.shape[1] // BLOCK
    return padded.reshape(rows, BLOCK, cols, BLOCK).transpose(0, 2, 1, 3)


def _from_blocks(blocks: NDArray[np.float64], height: int, width: int) -> NDArray[np.float64]:
    rows, cols = blocks.shape[:2]
    frame = blocks.transpose(0, 2, 1, 3).reshape(rows * BLOCK, cols * BLOCK)
    return np.asarray(frame[:height, :width])


class _CoefficientContexts:
    def __init__(self, roi: bool) -> None:
        self.eob = _EOB_SPEC.create()
        self.scale: Optional[FrequencyModel] = (
            ModelSpec(alphabet_size=_ROI_LEVELS).create() if roi else None
        )
        # Scale indices are coded as a repeat of the previous block's or a new symbol.
        self.same_scale = BinaryModel()
        self.previous_scale = _NEUTRAL_SCALE
        self.significant = [BinaryModel() for _ in range(_N_BANDS)]
        self.sign = [BinaryModel() for _ in range(_N_BANDS)]
        self.greater = [
            [BinaryModel() for _ in range(_GREATER_CONTEXTS)] for _ in range(_N_BANDS)
        ]


def _encode_scale(encoder: RangeEncoder, contexts: _CoefficientContexts, index: int) -> None:
    assert contexts.scale is not None
    same = index == contexts.previous_scale
    encoder.encode_bit(contexts.same_scale, int(same))
    if not same:
        encoder.encode_symbol(contexts.scale, index)
        contexts.previous_scale = index


def _decode_scale(decoder: RangeDecoder, contexts: _CoefficientContexts) -> int:
    assert contexts.scale is not None
    if not decoder.decode_bit(contexts.same_scale):
        contexts.previous_scale = decoder.decode_symbol(contexts.scale)
    return contexts.previous_scale


def _encode_coefficient(
    encoder: RangeEncoder, contexts: _CoefficientContexts, band: int, value: int, last: bool
) -> None:
    if not last:
        encoder.encode_bit(contexts.significant[band], int(value != 0))
        if value == 0:
            return
    encoder.encode_bit(contexts.sign[band], int(value < 0))
    magnitude = abs(value) - 1
    greater = contexts.greater[band]
    for j in range(_UNARY_LIMIT):
        bit = int(magnitude > j)
        encoder.encode_bit(greater[min(j, _GREATER_CONTEXTS - 1)], bit)
        if not bit:
            return
    # Exp-Golomb remainder, order 0, on equiprobable bits.
    remainder = magnitude - _UNARY_LIMIT + 1
    length = remainder.bit_length()
    for _ in range(length - 1):
        encoder.encode_bypass(0)
    for shift in range(length - 1, -1, -1):
        encoder.encode_bypass((remainder >> shift) & 1)


def _decode_coefficient(
    decoder: RangeDecoder, contexts: _CoefficientContexts, band: int, last: bool
) -> int:
    if not last and not decoder.decode_bit(contexts.significant[band]):
        return 0
    negative = decoder.decode_bit(contexts.sign[band])
    greater = contexts.greater[band]
    magnitude = 0
    for j in range(_UNARY_LIMIT):
        if not decoder.decode_bit(greater[min(j, _GREATER_CONTEXTS - 1)]):
            break
        magnitude += 1
    else:
        zeros = 0
        while not decoder.decode_bypass():
            zeros += 1
            if zeros > 62:
                raise CorruptStreamError("coefficient magnitude overflows")
        remainder = 1
        for _ in range(zeros):
            remainder = (remainder << 1) | decoder.decode_bypass()
        magnitude = remainder - 1 + _UNARY_LIMIT
    value = magnitude + 1
    return -value if negative else value


################################################################################
# Frame coding
################################################################################

FRAME_MAGIC: bytes = b"SPKF"
_FRAME_HEADER = struct.Struct("<4sIIBBd")


def encode_frame(
    frame: SceneFrame, quality: int, saliency: Optional[SaliencyMap] = None
) -> bytes:
    """
    Code a luminance frame: 8x8 orthonormal DCT, uniform quantisation (with
    per-block steps scaled by saliency when given), zigzag scan and adaptive
    range coding. The payload carries its own dimensions and step.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 2 or frame.size == 0:
        raise ConfigError(f"frame must be a non-empty grid, found shape {frame.shape}")
    if frame.min() < 0 or frame.max() > 1:
        raise ConfigError("frame luminance must lie in [0, 1]")
    base = quantizer_step(quality)
    height, width = frame.shape

    blocks = _to_blocks(frame)
    rows, cols = blocks.shape[:2]
    coefficients = fft.dctn(blocks, type=2, axes=(-2, -1), norm="ortho")
    scanned = coefficients.reshape(rows * cols, BLOCK * BLOCK)[:, ZIGZAG]

    roi = saliency is not None
    if saliency is not None:
        if saliency.shape != frame.shape:
            raise ConfigError(
                f"saliency shape {saliency.shape} does not match frame shape {frame.shape}"
            )
        block_mean = _to_blocks(np.asarray(saliency, dtype=np.float64)).mean(axis=(2, 3))
        scale_index = roi_scale_index(block_mean.ravel())
    else:
        scale_index = np.full(rows * cols, _NEUTRAL_SCALE, dtype=np.int64)
    steps = base * _roi_scale(scale_index)
    quantized = np.rint(scanned / steps[:, None]).astype(np.int64)

    residual = quantized.copy()
    residual[:, 0] = np.diff(quantized[:, 0], prepend=0)
    nonzero = residual != 0
    end_of_block = np.where(
        nonzero.any(axis=1), BLOCK * BLOCK - np.argmax(nonzero[:, ::-1], axis=1), 0
    )

    encoder = RangeEncoder()
    contexts = _CoefficientContexts(roi)
    for index, (row, eob) in enumerate(zip(residual.tolist(), end_of_block.tolist())):
        if contexts.scale is not None:
            _encode_scale(encoder, contexts, int(scale_index[index]))
        encoder.encode_symbol(contexts.eob, eob)
        for position in range(eob):
            _encode_coefficient(
                encoder, contexts, _BANDS[position], row[position], position == eob - 1
            )
    header = _FRAME_HEADER.pack(FRAME_MAGIC, width, height, quality, int(roi), base)
    return header + encoder.finish()


def decode_frame(data: bytes, shape: Optional[Tuple[int, int]] = None) -> SceneFrame:
    """
    Invert ``encode_frame``. When ``shape`` is given as (height, width) the
    payload must declare it.
    """
    if len(data) < _FRAME_HEADER.size:
        raise CorruptStreamError(f"frame payload of {len(data)} bytes has no header")
    magic, width, height, quality, roi, base = _FRAME_HEADER.unpack_from(data)
    if magic != FRAME_MAGIC:
        raise BadMagicError(FRAME_MAGIC, magic)
    if width == 0 or height == 0:
        raise CorruptStreamError(f"frame header has empty dimensions {width}x{height}")
    if shape is not None and (height, width) != tuple(shape):
        raise ContainerMismatchError(
            f"frame header declares {width}x{height}, expected {shape[1]}x{shape[0]}"
        )
    if not 1 <= quality <= 100 or roi not in (0, 1) or base != quantizer_step(quality):
        raise CorruptStreamError("frame header is corrupt")

    rows, cols = -(-height // BLOCK), -(-width // BLOCK)
    n_blocks = rows * cols
    body = data[_FRAME_HEADER.size :]
    if n_blocks > _EOB_SPEC.capacity(len(body)):
        raise CorruptStreamError(
            f"{len(body)} payload bytes cannot hold the {n_blocks} blocks of a "
            f"{width}x{height} frame"
        )

    decoder = RangeDecoder(body)
    contexts = _CoefficientContexts(bool(roi))
    scales: List[int] = []
    coded: List[List[int]] = []
    for _ in range(n_blocks):
        if contexts.scale is not None:
            scales.append(_decode_scale(decoder, contexts))
        eob = decoder.decode_symbol(contexts.eob)
        coded.append(
            [
                _decode_coefficient(decoder, contexts, _BANDS[position], position == eob - 1)
                for position in range(eob)
            ]
        )
    decoder.finish()

    residual = np.zeros((n_blocks, BLOCK * BLOCK), dtype=np.int64)
    for index, row in enumerate(coded):
        residual[index, : len(row)] = row
    scale_index = (
        np.array(scales, dtype=np.int64)
        if scales
        else np.full(n_blocks, _NEUTRAL_SCALE, dtype=np.int64)
    )

    quantized = residual.copy()
    quantized[:, 0] = np.cumsum(residual[:, 0])
    steps = base * _roi_scale(scale_index)
    scanned = quantized.astype(np.float64) * steps[:, None]
    coefficients = scanned[:, UNZIGZAG].reshape(rows, cols, BLOCK, BLOCK)
    blocks = fft.idctn(coefficients, type=2, axes=(-2, -1), norm="ortho")
    return np.clip(_from_blocks(blocks, height, width), 0.0, 1.0)


################################################################################
# Scene reconstruction and activity
################################################################################

# Firing-rate difference, as a fraction of the largest rate alpha/theta, that
# saturates the activity map.
ACTIVITY_CAP: float = 0.25


def integration_radius(saliency: SaliencyMap, cfg: CodecConfig) -> NDArray[np.int64]:
    """
    Frames integrated on each side of a keyframe: the full half window where
    nothing moves, down to the block radius where saliency is 1.
    """
    longest = cfg.half_window
    shortest = min(cfg.block_radius, longest)
    radius = np.rint(longest - np.clip(saliency, 0.0, 1.0) * (longest - shortest))
    return np.maximum(radius, 1).astype(np.int64)


def reconstruct_keyframe(
    stream: SpikeStream, k: int, cfg: CodecConfig, saliency: Optional[SaliencyMap] = None
) -> SceneFrame:
    """
    The scene coded at keyframe ``k``. With ROI enabled, each pixel averages
    its intervals over ``integration_radius`` frames around ``k`` and falls
    back to the configured reconstruction where too few spikes fall inside.
    """
    if cfg.reconstruction is ReconstructionMode.Tfp:
        scene = reconstruct_tfp(stream, k, cfg.window, cfg.sim)
    else:
        scene = reconstruct_tfi(stream, k, cfg.sim)
    if not cfg.roi_enabled:
        return scene
    if saliency is None:
        saliency = activity_map(stream, k, cfg)
    radius = integration_radius(saliency, cfg)
    return reconstruct_interval_mean(stream, k, radius, cfg.sim, fallback=scene)


def _window_rate(planes: NDArray[np.bool_], start: int, stop: int) -> NDArray[np.float64]:
    return planes[start:stop].sum(axis=0, dtype=np.int64) / float(stop - start)


def activity_map(stream: SpikeStream, k: int, cfg: CodecConfig) -> SaliencyMap:
    """
    Temporal activity around keyframe ``k``: the change in firing rate
    between two windows, less the one-spike jitter a static pixel can show,
    scaled to [0, 1]. Bidirectional mode compares the windows before and
    after ``k``; forward mode compares the two halves of the window before.
    """
    span = cfg.half_window
    planes = stream.planes
    shape = planes.shape[1:]
    if cfg.roi is RoiMode.Forward:
        start = max(0, k - span)
        middle = (start + k) // 2
        windows = ((start, middle), (middle, k))
    else:
        windows = ((max(0, k - span), k), (k, min(stream.n_frames, k + span)))
    (a_start, a_stop), (b_start, b_stop) = windows
    if a_stop <= a_start or b_stop <= b_start:
        return np.zeros(shape, dtype=np.float64)

    change = np.abs(
        _window_rate(planes, b_start, b_stop) - _window_rate(planes, a_start, a_stop)
    )
    jitter = 1.0 / (a_stop - a_start) + 1.0 / (b_stop - b_start)
    cap = ACTIVITY_CAP * cfg.sim.alpha / cfg.sim.theta
    return np.clip((change - jitter) / cap, 0.0, 1.0)


################################################################################
# Container
################################################################################

CONTAINER_MAGIC: bytes = b"SPKC"
CONTAINER_VERSION: int = 1
_CONTAINER_HEADER = struct.Struct("<4sHIIIHHHddBBHBBI")
_PAYLOAD_HEADER = struct.Struct("<II")


@dataclass(frozen=True)
class KeyframePayload:
    keyframe: int
    data: bytes


@dataclass(frozen=True)
class CompressedContainer:
    width: int
    height: int
    n_frames: int
    config: CodecConfig
    payloads: Tuple[KeyframePayload, ...]

    def schedule(self) -> KeyframeSchedule:
        return self.config.schedule(self.n_frames)

    def header_bytes(self) -> bytes:
        cfg = self.config
        return _CONTAINER_HEADER.pack(
            CONTAINER_MAGIC,
            CONTAINER_VERSION,
            self.width,
            self.height,
            self.n_frames,
            cfg.step,
            cfg.block_radius,
            cfg.branch_radius,
            cfg.sim.alpha,
            cfg.sim.theta,
            int(cfg.sim.reset_mode),
            int(cfg.reconstruction),
            cfg.window,
            cfg.quality,
            int(cfg.roi),
            len(self.payloads),
        )

    def to_bytes(self) -> bytes:
        parts = [self.header_bytes()]
        for payload in self.payloads:
            parts.append(_PAYLOAD_HEADER.pack(payload.keyframe, len(payload.data)))
            parts.append(payload.data)
        return b"".join(parts)

    @property
    def total_bytes(self) -> int:
        return _CONTAINER_HEADER.size + sum(
            _PAYLOAD_HEADER.size + len(payload.data) for payload in self.payloads
        )

    @property
    def total_bits(self) -> int:
        return 8 * self.total_bytes

    @staticmethod
    def from_bytes(data: bytes) -> "CompressedContainer":
        if len(data) < 4:
            raise TruncatedFileError(f"container of {len(data)} bytes has no magic")
        if data[:4] != CONTAINER_MAGIC:
            raise BadMagicError(CONTAINER_MAGIC, bytes(data[:4]))
        if len(data) < _CONTAINER_HEADER.size:
            raise TruncatedFileError(f"container header truncated at {len(data)} bytes")
        (
            _,
            version,
            width,
            height,
            n_frames,
            step,
            block_radius,
            branch_radius,
            alpha,
            theta,
            reset_mode,
            reconstruction,
            window,
            quality,
            roi,
            count,
        ) = _CONTAINER_HEADER.unpack_from(data)
        if version != CONTAINER_VERSION:
            raise CorruptStreamError(f"unsupported container version {version}")
        try:
            config = CodecConfig(
                step=step,
                block_radius=block_radius,
                branch_radius=branch_radius,
                quality=quality,
                roi=RoiMode(roi),
                sim=SimulatorConfig(alpha=alpha, theta=theta, reset_mode=ResetMode(reset_mode)),
                reconstruction=ReconstructionMode(reconstruction),
                window=window,
            )
        except (ValueError, SpikeCodecError) as e:
            raise CorruptStreamError(f"container header is corrupt: {e}") from e

        payloads: List[KeyframePayload] = []
        offset = _CONTAINER_HEADER.size
        for _ in range(count):
            if offset + _PAYLOAD_HEADER.size > len(data):
                raise TruncatedFileError("container truncated inside a payload header")
            keyframe, length = _PAYLOAD_HEADER.unpack_from(data, offset)
            offset += _PAYLOAD_HEADER.size
            if offset + length > len(data):
                raise TruncatedFileError(f"payload for keyframe {keyframe} is truncated")
            payloads.append(KeyframePayload(keyframe, bytes(data[offset : offset + length])))
            offset += length
        if offset != len(data):
            raise LengthMismatchError(
                f"container holds {len(data) - offset} bytes after its last payload"
            )
        return CompressedContainer(width, height, n_frames, config, tuple(payloads))


################################################################################
# Pipeline
################################################################################


def compress(stream: SpikeStream, cfg: CodecConfig) -> CompressedContainer:
    """
    Reconstruct a scene at every keyframe of the schedule, code it, and pack
    the payloads behind a header that echoes ``cfg``.
    """
    schedule = cfg.schedule(stream.n_frames)
    if not schedule:
        raise EmptyScheduleError(stream.n_frames, schedule.half_window, schedule.step)
    payloads: List[KeyframePayload] = []
    for k in schedule.keyframes:
        saliency = activity_map(stream, k, cfg) if cfg.roi_enabled else None
        scene = reconstruct_keyframe(stream, k, cfg, saliency)
        payloads.append(KeyframePayload(k, encode_frame(scene, cfg.quality, saliency)))
        logger.debug("Keyframe %d coded in %d bytes", k, len(payloads[-1].data))
    container = CompressedContainer(
        width=stream.width,
        height=stream.height,
        n_frames=stream.n_frames,
        config=cfg,
        payloads=tuple(payloads),
    )
    logger.info(
        "Compressed %d frames into %d keyframes, %d bytes",
        stream.n_frames,
        len(payloads),
        container.total_bytes,
    )
    return container


@dataclass(frozen=True, eq=False)
class Decompressed:
    keyframes: Tuple[int, ...]
    scenes: SceneSequence
    regenerated: SpikeStream


def _interpolate(
    keyframes: Sequence[int], scenes: NDArray[np.float64], start: int, stop: int
) -> Iterator[NDArray[np.float64]]:
    """Linear interpolation between keyframe scenes, held at both ends."""
    segment = 0
    for t in range(start, stop):
        if t <= keyframes[0]:
            yield scenes[0]
        elif t >= keyframes[-1]:
            yield scenes[-1]
        else:
            while keyframes[segment + 1] <= t:
                segment += 1
            left, right = keyframes[segment], keyframes[segment + 1]
            weight = (t - left) / (right - left)
            yield (1.0 - weight) * scenes[segment] + weight * scenes[segment + 1]


def decompress(container: CompressedContainer) -> Decompressed:
    """
    Decode every keyframe scene and regenerate spikes over the frames the
    keyframe windows cover. The simulator starts from a zero state at frame 0,
    as a source camera does, and runs on the first scene up to the covered
    range so that static pixels keep the source's firing phase.
    """
    schedule = container.schedule()
    keyframes = tuple(payload.keyframe for payload in container.payloads)
    if keyframes != schedule.keyframes:
        raise ContainerMismatchError(
            f"payload keyframes {list(keyframes)} do not match the schedule "
            f"{list(schedule.keyframes)}"
        )
    if not keyframes:
        raise EmptyScheduleError(container.n_frames, schedule.half_window, schedule.step)
    shape = (container.height, container.width)
    frames = [decode_frame(payload.data, shape) for payload in container.payloads]
    scenes = np.stack(frames)
    start, stop = schedule.coverage()
    sim = container.config.sim.with_init(InitPolicy.constant(0.0))
    warmed = integrate_frames(_interpolate(keyframes, scenes, 0, stop), stop, shape, sim)
    regenerated = SpikeStream(warmed.planes[start:], origin=start)
    return Decompressed(keyframes=keyframes, scenes=SceneSequence(scenes), regenerated=regenerated)


################################################################################
# Lossless baseline
################################################################################

LOSSLESS_MAGIC: bytes = b"SPKL"
_LOSSLESS_HEADER = struct.Struct("<4sIII")


def encode_spikes_lossless(stream: SpikeStream) -> bytes:
    """
    Code every spike bit with an adaptive binary model selected by the
    previous plane's bit at the same pixel and the left and top neighbours.
    """
    planes = stream.planes.astype(np.uint8)
    previous = np.zeros_like(planes)
    previous[1:] = planes[:-1]
    left = np.zeros_like(planes)
    left[:, :, 1:] = planes[:, :, :-1]
    top = np.zeros_like(planes)
    top[:, 1:, :] = planes[:, :-1, :]
    context = (previous << 2) | (left << 1) | top

    encoder = RangeEncoder()
    models = [BinaryModel() for _ in range(8)]
    for bit, ctx in zip(planes.ravel().tolist(), context.ravel().tolist()):
        encoder.encode_bit(models[ctx], bit)
    header = _LOSSLESS_HEADER.pack(LOSSLESS_MAGIC, stream.width, stream.height, stream.n_frames)
    return header + encoder.finish()


def decode_spikes_lossless(data: bytes) -> SpikeStream:
    if len(data) < 4:
        raise TruncatedFileError(f"lossless payload of {len(data)} bytes has no magic")
    if data[:4] != LOSSLESS_MAGIC:
        raise BadMagicError(LOSSLESS_MAGIC, bytes(data[:4]))
    if len(data) < _LOSSLESS_HEADER.size:
        raise TruncatedFileError(f"lossless header truncated at {len(data)} bytes")
    _, width, height, n_frames = _LOSSLESS_HEADER.unpack_from(data)

    body = data[_LOSSLESS_HEADER.size :]
    models = [BinaryModel() for _ in range(8)]
    if width * height * n_frames > models[0].capacity(len(body)):
        raise CorruptStreamError(
            f"{len(body)} payload bytes cannot hold {n_frames} frames of {width}x{height}"
        )
    decoder = RangeDecoder(body)
    planes = np.zeros((n_frames, height, width), dtype=np.bool_)
    previous = [0] * (width * height)
    for n in range(n_frames):
        current = [0] * (width * height)
        for y in range(height):
            row = y * width
            for x in range(width):
                ctx = previous[row + x] << 2
                if x:
                    ctx |= current[row + x - 1] << 1
                if y:
                    ctx |= current[row - width + x]
                current[row + x] = decoder.decode_bit(models[ctx])
        planes[n] = np.array(current, dtype=np.bool_).reshape(height, width)
        previous = current
    decoder.finish()
    return SpikeStream(planes)
