from typing import List

import numpy as np
import pytest
from pytest import mark
from pytest_golden.plugin import GoldenTestFixture

from spikecodec.codec import (
    CodecConfig,
    CompressedContainer,
    KeyframePayload,
    ReconstructionMode,
    RoiMode,
    compress,
)
from spikecodec.errors import (
    ConfigError,
    EmptyIntersectionError,
    EmptyScheduleError,
    RdCurveError,
)
from spikecodec.evaluation import (
    Domain,
    RdCurve,
    RdPoint,
    RdSweep,
    bd_psnr,
    bd_rate,
    bpp,
    domain_psnr,
    psnr,
    rd_point,
    rd_sweep,
)
from spikecodec.spike_model import SceneSequence, SimulatorConfig, SpikeStream, simulate

from . import (
    constant_stream,
    moving_bar_scene,
    pixel_stream,
    textured_frame,
    textured_scene,
)

CFG = CodecConfig()


def _curve(pairs: List[List[float]]) -> RdCurve:
    return RdCurve(tuple(RdPoint(bpp=rate, psnr_scene=value) for rate, value in pairs))


################################################################################
# Distortion
################################################################################


@mark.golden_test("data/golden/psnr/*.yml")
def test_psnr(golden: GoldenTestFixture) -> None:
    value = psnr(golden["input"]["a"], golden["input"]["b"], peak=golden["input"]["peak"])
    assert round(value, 4) == golden.out["output"]


def test_psnr_input_validation() -> None:
    with pytest.raises(ConfigError):
        psnr([0.0, 1.0], [0.0])
    with pytest.raises(ConfigError):
        psnr([], [])


def test_identical_streams_hit_the_cap() -> None:
    stream = constant_stream(0.5, 60, 4, 4)
    assert domain_psnr(stream, stream, Domain.Isi) == 99.0
    assert domain_psnr(stream, stream, Domain.FiringRate) == 99.0


def test_interval_psnr_of_one_frame_error() -> None:
    raw = pixel_stream(41, range(0, 41, 4))
    recon = pixel_stream(41, range(0, 41, 5))
    assert domain_psnr(raw, recon, Domain.Isi) == pytest.approx(48.1308, abs=1e-4)
    # Rates 1/4 against 1/5.
    assert domain_psnr(raw, recon, Domain.FiringRate) == pytest.approx(26.0206, abs=1e-4)
    assert domain_psnr(recon, raw, Domain.Isi) == domain_psnr(raw, recon, Domain.Isi)


def test_streams_are_aligned_on_their_origins() -> None:
    raw = constant_stream(0.5, 60, 4, 4)
    tail = SpikeStream(raw.planes[10:], origin=10)
    assert domain_psnr(raw, tail, Domain.Isi) == 99.0
    assert domain_psnr(raw, SpikeStream(raw.planes[10:]), Domain.Isi, recon_origin=10) == 99.0


def test_streams_without_common_intervals() -> None:
    raw = pixel_stream(41, range(0, 41, 4))
    with pytest.raises(EmptyIntersectionError):
        domain_psnr(raw, SpikeStream(raw.planes, origin=100), Domain.Isi)
    with pytest.raises(EmptyIntersectionError):
        domain_psnr(raw, pixel_stream(41, [3]), Domain.FiringRate)
    with pytest.raises(ConfigError):
        domain_psnr(raw, SpikeStream.zeros(41, 2, 2), Domain.Isi)


################################################################################
# Rate
################################################################################


def test_bits_per_pixel_counts_the_whole_container() -> None:
    container = CompressedContainer(64, 64, 42, CFG, (KeyframePayload(21, bytes(966)),))
    assert container.total_bytes == 1_024
    assert bpp(container) == 2.0


def test_bits_per_pixel_of_constant_stream() -> None:
    assert bpp(compress(constant_stream(0.5, 42, 128, 128), CFG)) < 0.1


def test_bits_per_pixel_without_keyframes() -> None:
    with pytest.raises(EmptyScheduleError):
        bpp(CompressedContainer(4, 4, 41, CFG, ()))


################################################################################
# Bjontegaard deltas
################################################################################


@mark.golden_test("data/golden/bd_rate/*.yml")
def test_bd_metrics(golden: GoldenTestFixture) -> None:
    anchor = _curve(golden["input"]["anchor"])
    test = _curve(golden["input"]["test"])
    actual = {
        "bd_psnr": round(bd_psnr(anchor, test), 2),
        "bd_rate": round(bd_rate(anchor, test), 2),
    }
    assert actual == golden.out["output"]


def test_bd_psnr_is_antisymmetric() -> None:
    anchor = _curve([[0.1, 30.0], [0.2, 32.5], [0.4, 36.2], [0.8, 38.0], [1.6, 41.0]])
    test = _curve([[0.12, 31.0], [0.25, 34.0], [0.5, 36.5], [1.1, 40.0]])
    assert bd_psnr(anchor, test) == pytest.approx(-bd_psnr(test, anchor))


def test_bd_needs_four_points() -> None:
    short = _curve([[0.1, 30.0], [0.2, 33.0], [0.4, 36.0]])
    with pytest.raises(RdCurveError):
        bd_rate(short, short)


def test_bd_needs_overlapping_curves() -> None:
    low = _curve([[0.1, 20.0], [0.2, 21.0], [0.4, 22.0], [0.8, 23.0]])
    high = _curve([[1.0, 30.0], [2.0, 31.0], [4.0, 32.0], [8.0, 33.0]])
    with pytest.raises(RdCurveError):
        bd_rate(low, high)
    with pytest.raises(RdCurveError):
        bd_psnr(low, high)


def test_curve_validation() -> None:
    with pytest.raises(RdCurveError):
        _curve([[0.2, 30.0], [0.2, 31.0]])
    with pytest.raises(RdCurveError):
        RdPoint(bpp=0.0)
    with pytest.raises(ConfigError):
        RdPoint(bpp=1.0).metric("psnr")
    with pytest.raises(RdCurveError):
        RdCurve((RdPoint(bpp=1.0), RdPoint(bpp=2.0))).samples("psnr_isi")


################################################################################
# Sweeps
################################################################################


def test_sweep_of_constant_stream() -> None:
    stream = constant_stream(0.5, 42, 16, 16)
    scenes = SceneSequence.constant(0.5, 42, 16, 16)
    sweep = rd_sweep(stream, CFG, [80, 20, 50, 50], scenes=scenes)
    assert [point.quality for point in sweep.points] == [20, 50, 80]
    assert sweep.fidelity_drops == []
    rates = [point.bpp for point in sweep.points]
    assert rates == sorted(rates)
    for point in sweep.points:
        assert point.psnr_scene is not None and point.psnr_scene >= 90


def test_sweep_of_textured_streams() -> None:
    cfg = CodecConfig(reconstruction=ReconstructionMode.Tfp)
    for seed in range(3):
        stream = simulate(textured_scene(seed, 42, 32, 32), SimulatorConfig())
        sweep = rd_sweep(stream, cfg, [20, 40, 60, 80])
        assert sweep.violations == []
        assert sweep.failures == {}
        curve = sweep.curve()
        scores = [point.psnr_scene for point in curve.points]
        assert scores == sorted(scores)
        assert bd_rate(curve, curve) == pytest.approx(0.0, abs=1e-6)


def test_default_sweep_without_scenes() -> None:
    for scene in (moving_bar_scene(60, 16, 32), textured_scene(4, 60, 32, 32)):
        sweep = rd_sweep(simulate(scene, SimulatorConfig()), CFG, [20, 40, 60, 80, 100])
        assert sweep.violations == []
        scores = [point.psnr_scene for point in sweep.curve().points]
        assert scores == sorted(scores)
        assert not [drop for drop in sweep.fidelity_drops if drop[0] == "psnr_scene"]


def test_roi_lowers_the_rate_of_moving_content() -> None:
    scenes = moving_bar_scene(120, 64, 64, background=textured_frame(12, 64, 64))
    stream = simulate(scenes, SimulatorConfig())
    qualities = [1, 10, 20, 30]
    off = rd_sweep(stream, CFG, qualities, scenes=scenes).curve()
    on = rd_sweep(
        stream, CodecConfig(roi=RoiMode.Bidirectional), qualities, scenes=scenes
    ).curve()
    assert bd_rate(off, on) <= 0


def test_sweep_flags_falling_fidelity() -> None:
    sweep = RdSweep()
    sweep.add(RdPoint(bpp=0.1, psnr_scene=30.0, psnr_isi=41.0, quality=60))
    sweep.add(RdPoint(bpp=0.2, psnr_scene=32.0, psnr_isi=40.5, quality=80))
    sweep.add(RdPoint(bpp=0.2, psnr_scene=33.0, psnr_isi=40.5, quality=100))
    assert sweep.fidelity_drops == [("psnr_isi", 60, 80)]
    assert sweep.violations == [(80, 100)]
    assert len(sweep.points) == 3


def test_regenerated_firing_rates_match_at_high_quality() -> None:
    for luminance in (0.25, 0.5, 1.0):
        point = rd_point(constant_stream(luminance, 100, 16, 16), CFG.with_quality(100))
        assert point.psnr_fr is not None and point.psnr_fr >= 35
        assert point.psnr_isi is not None and point.psnr_isi >= 35
        assert point.quality == 100


def test_sweep_records_failures() -> None:
    sweep = rd_sweep(constant_stream(0.5, 41, 4, 4), CFG, [30, 60])
    assert sweep.points == []
    assert sorted(sweep.failures) == [30, 60]
    assert all("schedule empty" in message for message in sweep.failures.values())
    with pytest.raises(ConfigError):
        rd_sweep(constant_stream(0.5, 41, 4, 4), CFG, [])


def test_rd_point_serialisation() -> None:
    point = RdPoint(bpp=0.25, psnr_scene=31.5, quality=40)
    assert RdPoint.from_dict(point.to_dict()) == point
    assert point.metric("psnr_scene") == 31.5
    assert point.metric("psnr_fr") is None
    rates, _ = _curve([[0.1, 30.0], [1.0, 40.0]]).samples("psnr_scene")
    assert np.allclose(rates, [-1.0, 0.0])
