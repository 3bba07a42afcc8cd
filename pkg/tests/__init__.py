from pathlib import Path
from typing import Iterable, Optional, Sequence

import pytest

pytest.register_assert_rewrite("spikecodec")
pytest.register_assert_rewrite("spikecodec.codec")
pytest.register_assert_rewrite("spikecodec.analysis")

import numpy as np
from pytest_golden.plugin import GoldenTestFixture
from scipy import ndimage

from spikecodec.spike_model import SceneSequence, SimulatorConfig, SpikeStream, simulate


def golden_path(golden: GoldenTestFixture) -> str:
    return str(golden.path.relative_to(Path(__file__).parent))


def stream_from_spikes(
    n_frames: int, height: int, width: int, spikes: Iterable[Sequence[int]]
) -> SpikeStream:
    """A stream with a spike at every (frame, y, x) in ``spikes``."""
    planes = np.zeros((n_frames, height, width), dtype=np.bool_)
    for t, y, x in spikes:
        planes[t, y, x] = True
    return SpikeStream(planes)


def pixel_stream(n_frames: int, times: Iterable[int]) -> SpikeStream:
    return stream_from_spikes(n_frames, 1, 1, ((t, 0, 0) for t in times))


def constant_stream(
    luminance: float,
    n_frames: int,
    height: int,
    width: int,
    cfg: Optional[SimulatorConfig] = None,
) -> SpikeStream:
    scene = SceneSequence.constant(luminance, n_frames, height, width)
    return simulate(scene, cfg or SimulatorConfig())


def textured_frame(seed: int, height: int, width: int, sigma: float = 4.0) -> np.ndarray:
    """Smooth random texture spanning [0.1, 0.9]."""
    rng = np.random.default_rng(seed)
    noise = ndimage.gaussian_filter(rng.random((height, width)), sigma, mode="wrap")
    low, high = noise.min(), noise.max()
    return 0.1 + 0.8 * (noise - low) / (high - low)


def natural_frame(seed: int, height: int, width: int, n_shapes: int = 12) -> np.ndarray:
    """
    Flat-shaded discs and rectangles over a slowly varying background, with
    softened edges, spanning [0.1, 0.9].
    """
    rng = np.random.default_rng(seed)
    background = ndimage.gaussian_filter(
        rng.standard_normal((height, width)), max(height, width) / 12, mode="reflect"
    )
    frame = 0.5 + 0.15 * background / background.std()
    y, x = np.indices((height, width))
    for _ in range(n_shapes):
        cy, cx = rng.uniform(0, height), rng.uniform(0, width)
        size = rng.uniform(0.05, 0.2) * min(height, width)
        if rng.random() < 0.5:
            inside = (y - cy) ** 2 + (x - cx) ** 2 < size**2
        else:
            inside = (abs(y - cy) < size) & (abs(x - cx) < 0.6 * size)
        frame[inside] = rng.uniform(0.1, 0.9)
    return np.clip(ndimage.gaussian_filter(frame, 1.5), 0.1, 0.9)


def static_scene(frame: np.ndarray, n_frames: int) -> SceneSequence:
    return SceneSequence(np.broadcast_to(frame, (n_frames, *frame.shape)))


def textured_scene(seed: int, n_frames: int, height: int, width: int) -> SceneSequence:
    return static_scene(textured_frame(seed, height, width), n_frames)


def block_scene(n_frames: int, height: int, width: int) -> SceneSequence:
    """8x8 blocks cycling through luminances whose intervals are whole frames."""
    levels = np.array([0.25, 0.5, 1.0])
    rows = np.arange(height) // 8
    cols = np.arange(width) // 8
    frame = levels[(rows[:, None] + cols[None, :]) % len(levels)]
    return static_scene(frame, n_frames)


def moving_bar_scene(
    n_frames: int,
    height: int,
    width: int,
    *,
    start: int = 4,
    bar_width: int = 4,
    frames_per_pixel: int = 10,
    bright: float = 0.9,
    dark: float = 0.1,
    background: Optional[np.ndarray] = None,
) -> SceneSequence:
    """
    A vertical bar moving one pixel to the right every ``frames_per_pixel``
    frames, over a uniform ``dark`` field or a static ``background``.
    """
    frames = np.full((n_frames, height, width), dark, dtype=np.float64)
    if background is not None:
        frames[:] = background
    for t in range(n_frames):
        left = start + t // frames_per_pixel
        frames[t, :, left : left + bar_width] = bright
    return SceneSequence(frames)
