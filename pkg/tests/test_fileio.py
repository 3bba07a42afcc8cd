from pathlib import Path

import numpy as np
import pytest
from pytest import mark
from pytest_golden.plugin import GoldenTestFixture

from spikecodec.errors import (
    AmbiguousOrderingError,
    BadMagicError,
    ConfigError,
    EmptySceneError,
    LengthMismatchError,
    PgmFormatError,
    TruncatedFileError,
    UnsupportedMaxvalError,
)
from spikecodec.evaluation import RdPoint
from spikecodec.fileio import (
    csv_text,
    parse_pgm,
    parse_rd_csv,
    parse_spike_file,
    pgm_bytes,
    rd_csv_text,
    read_scene_directory,
    read_spike_file,
    scene_directory_bytes,
    scene_directory_files,
    spike_file_bytes,
    write_outputs,
    write_spike_file,
)
from spikecodec.spike_model import SpikeStream

from . import constant_stream, stream_from_spikes

################################################################################
# Spike files
################################################################################


@mark.golden_test("data/golden/spike_file/*.yml")
def test_spike_file(golden: GoldenTestFixture) -> None:
    stream = stream_from_spikes(
        golden["input"]["n_frames"],
        golden["input"]["height"],
        golden["input"]["width"],
        golden["input"]["spikes"],
    )
    data = spike_file_bytes(stream)
    assert data.hex() == golden.out["output"]
    assert parse_spike_file(data) == stream


def test_spike_files_round_trip() -> None:
    rng = np.random.default_rng(17)
    for _ in range(1_000):
        shape = tuple(rng.integers(1, 20, size=3))
        stream = SpikeStream(rng.random(shape) < rng.random())
        assert parse_spike_file(spike_file_bytes(stream)) == stream


def test_spike_file_on_disk(tmp_path: Path) -> None:
    stream = constant_stream(0.5, 20, 5, 11)
    path = tmp_path / "stream.spk"
    write_spike_file(stream, path)
    assert read_spike_file(path) == stream


def test_malformed_spike_files() -> None:
    data = spike_file_bytes(constant_stream(0.5, 8, 3, 3))
    with pytest.raises(BadMagicError) as e:
        parse_spike_file(b"SPKC" + data[4:])
    assert e.value.exit_code == 5
    with pytest.raises(TruncatedFileError):
        parse_spike_file(data[:2])
    with pytest.raises(TruncatedFileError):
        parse_spike_file(data[:12])
    with pytest.raises(TruncatedFileError):
        parse_spike_file(data[:-1])
    with pytest.raises(LengthMismatchError):
        parse_spike_file(data + b"\x00")


################################################################################
# Graymaps
################################################################################


def test_pgm_layout() -> None:
    assert pgm_bytes(np.zeros((2, 3))) == b"P5\n3 2\n255\n" + bytes(6)


def test_pgm_values() -> None:
    frame = parse_pgm(b"P5\n2 1\n255\n" + bytes([128, 255]))
    assert frame.shape == (1, 2)
    assert frame[0, 0] == 128 / 255
    assert frame[0, 1] == 1.0


def test_pgm_round_trip() -> None:
    rng = np.random.default_rng(2)
    frame = rng.integers(0, 256, (7, 13)) / 255
    assert np.array_equal(parse_pgm(pgm_bytes(frame)), frame)


def test_pgm_header_comments() -> None:
    frame = parse_pgm(b"P5\n# written by hand\n2 1\n# depth\n255\n" + bytes([0, 51]))
    assert frame[0, 1] == pytest.approx(0.2)


def test_malformed_pgm() -> None:
    with pytest.raises(UnsupportedMaxvalError):
        parse_pgm(b"P5\n1 1\n65535\n" + bytes(2))
    with pytest.raises(PgmFormatError):
        parse_pgm(b"P2\n1 1\n255\n0")
    with pytest.raises(PgmFormatError):
        parse_pgm(b"P5\n2 2\n255\n" + bytes(3))
    with pytest.raises(PgmFormatError):
        parse_pgm(b"P5\n2 2")
    with pytest.raises(PgmFormatError):
        parse_pgm(b"P5\n0 2\n255\n")


################################################################################
# Scene directories
################################################################################


def test_scene_directory_round_trip(tmp_path: Path) -> None:
    frames = [np.full((3, 4), level / 255) for level in (0, 100, 255)]
    contents = scene_directory_bytes(frames, [0, 1, 12])
    assert sorted(contents) == ["0000.pgm", "0001.pgm", "0012.pgm"]
    write_outputs({tmp_path / "scenes" / name: data for name, data in contents.items()})

    scenes = read_scene_directory(tmp_path / "scenes")
    assert scenes.n_frames == 3
    assert all(np.array_equal(a, b) for a, b in zip(scenes.frames, frames))


def test_scene_directory_order(tmp_path: Path) -> None:
    for name in ("0010", "0002", "0001"):
        (tmp_path / f"{name}.pgm").write_bytes(pgm_bytes(np.zeros((1, 1))))
    (tmp_path / "notes.txt").write_text("ignored")
    assert [path.stem for path in scene_directory_files(tmp_path)] == ["0001", "0002", "0010"]


def test_scene_directory_ambiguity(tmp_path: Path) -> None:
    with pytest.raises(EmptySceneError):
        scene_directory_files(tmp_path)
    for name in ("1", "10"):
        (tmp_path / f"{name}.pgm").write_bytes(pgm_bytes(np.zeros((1, 1))))
    with pytest.raises(AmbiguousOrderingError):
        scene_directory_files(tmp_path)


def test_scene_directory_names_must_be_numbers(tmp_path: Path) -> None:
    (tmp_path / "first.pgm").write_bytes(pgm_bytes(np.zeros((1, 1))))
    with pytest.raises(AmbiguousOrderingError):
        scene_directory_files(tmp_path)


################################################################################
# CSV tables
################################################################################


def test_rd_csv_text() -> None:
    text = rd_csv_text([RdPoint(bpp=0.5, psnr_scene=30.0, quality=50)])
    assert text == "quality,bpp,psnr_scene,psnr_isi,psnr_fr\n50,0.500000,30.000000,,\n"


def test_rd_csv_round_trip() -> None:
    points = [
        RdPoint(bpp=0.125, psnr_scene=31.25, psnr_isi=40.5, psnr_fr=35.0, quality=30),
        RdPoint(bpp=0.25, psnr_scene=34.0, quality=60),
    ]
    assert parse_rd_csv(rd_csv_text(points)) == points


def test_malformed_rd_csv() -> None:
    with pytest.raises(ConfigError):
        parse_rd_csv("bpp,quality\n0.5,50\n")
    with pytest.raises(ConfigError):
        parse_rd_csv("quality,bpp,psnr_scene,psnr_isi,psnr_fr\n50,fast,,,\n")
    with pytest.raises(ConfigError):
        parse_rd_csv("quality,bpp,psnr_scene,psnr_isi,psnr_fr\n50,0,,,\n")


def test_csv_rows_must_match_header() -> None:
    assert csv_text(["a", "b"], [[1, None]]) == "a,b\n1,\n"
    with pytest.raises(ConfigError):
        csv_text(["a", "b"], [[1]])


def test_write_outputs(tmp_path: Path) -> None:
    text = tmp_path / "deep" / "table.csv"
    blob = tmp_path / "other" / "data.bin"
    write_outputs({text: "a,b\n", blob: b"\x01\x02"})
    assert text.read_text() == "a,b\n"
    assert blob.read_bytes() == b"\x01\x02"
