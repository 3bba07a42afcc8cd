import json
from dataclasses import replace
from pathlib import Path

from click.testing import CliRunner, Result

from spikecodec.cli import cli
from spikecodec.codec import CompressedContainer, KeyframePayload, encode_frame
from spikecodec.fileio import read_spike_file, scene_directory_bytes, write_outputs

from . import textured_frame


def _scenes(directory: Path, n_frames: int) -> Path:
    frame = textured_frame(0, 16, 16)
    contents = scene_directory_bytes([frame] * n_frames, list(range(n_frames)))
    write_outputs({directory / name: data for name, data in contents.items()})
    return directory


def _run(*args: str) -> Result:
    return CliRunner().invoke(cli, ["--quiet", *args])


def _simulate(tmp_path: Path, n_frames: int = 60) -> Path:
    scenes = _scenes(tmp_path / "scenes", n_frames)
    spikes = tmp_path / "raw.spk"
    result = _run("simulate", "--scenes", str(scenes), "--out", str(spikes))
    assert result.exit_code == 0, result.output
    assert f"{n_frames} frames of 16x16" in result.output
    return spikes


def test_encode_decode_eval(tmp_path: Path) -> None:
    raw = _simulate(tmp_path)
    container = tmp_path / "raw.spkc"
    result = _run("encode", "--in", str(raw), "--out", str(container))
    assert result.exit_code == 0, result.output

    regenerated = tmp_path / "regen.spk"
    scenes = tmp_path / "decoded"
    result = _run(
        "decode",
        "--in",
        str(container),
        "--out-spikes",
        str(regenerated),
        "--out-scenes",
        str(scenes),
    )
    assert result.exit_code == 0, result.output
    assert "55 frames from origin 1, 3 keyframes" in result.output
    assert sorted(path.name for path in scenes.iterdir()) == ["0021.pgm", "0028.pgm", "0035.pgm"]
    assert read_spike_file(regenerated).n_frames == 55

    table = tmp_path / "eval.csv"
    result = _run(
        "eval",
        "--raw",
        str(raw),
        "--recon",
        str(regenerated),
        "--recon-offset",
        "1",
        "--csv",
        str(table),
    )
    assert result.exit_code == 0, result.output
    assert "Isi PSNR:" in result.output
    assert "FiringRate PSNR:" in result.output
    assert table.read_text().startswith("domain,psnr\nisi,")
    assert json.loads((tmp_path / "eval.csv.json").read_text())["recon_offset"] == 1

    assert json.loads((tmp_path / "regen.spk.json").read_text())["origin"] == 1
    result = _run("eval", "--raw", str(raw), "--recon", str(regenerated), "--csv", str(table))
    assert result.exit_code == 0, result.output
    assert json.loads((tmp_path / "eval.csv.json").read_text())["recon_offset"] == 1


def test_eval_rejects_bad_origin_record(tmp_path: Path) -> None:
    raw = _simulate(tmp_path)
    (tmp_path / "raw.spk.json").write_text('{"origin": -3}')
    result = _run("eval", "--raw", str(raw), "--recon", str(raw))
    assert result.exit_code == 3
    assert result.output.startswith("Error:")


def test_short_stream_has_no_schedule(tmp_path: Path) -> None:
    raw = _simulate(tmp_path, 41)
    container = tmp_path / "raw.spkc"
    result = _run("encode", "--in", str(raw), "--out", str(container))
    assert result.exit_code == 4
    assert "schedule empty" in result.output
    assert not container.exists()


def test_bad_magic(tmp_path: Path) -> None:
    raw = _simulate(tmp_path)
    result = _run("decode", "--in", str(raw), "--out-spikes", str(tmp_path / "out.spk"))
    assert result.exit_code == 5
    assert "bad magic" in result.output


def test_decode_rejects_resized_keyframe(tmp_path: Path) -> None:
    raw = _simulate(tmp_path)
    path = tmp_path / "raw.spkc"
    assert _run("encode", "--in", str(raw), "--out", str(path)).exit_code == 0
    container = CompressedContainer.from_bytes(path.read_bytes())
    first = container.payloads[0]
    resized = KeyframePayload(first.keyframe, encode_frame(textured_frame(1, 8, 16), 50))
    path.write_bytes(replace(container, payloads=(resized, *container.payloads[1:])).to_bytes())
    out = tmp_path / "out.spk"
    result = _run("decode", "--in", str(path), "--out-spikes", str(out))
    assert result.exit_code == 13
    assert result.output.startswith("Error:")
    assert not out.exists()


def test_unknown_flag(tmp_path: Path) -> None:
    result = _run("encode", "--frobnicate")
    assert result.exit_code == 2


def test_bad_reconstruction_option(tmp_path: Path) -> None:
    raw = _simulate(tmp_path)
    result = _run("encode", "--in", str(raw), "--out", str(tmp_path / "x"), "--recon", "tfq")
    assert result.exit_code == 2


def test_analyze(tmp_path: Path) -> None:
    raw = _simulate(tmp_path)
    table = tmp_path / "analysis.csv"
    result = _run("analyze", "--in", str(raw), "--csv", str(table))
    assert result.exit_code == 0, result.output
    lines = table.read_text().splitlines()
    assert lines[0].startswith("representation,frame,radius,variance")
    assert len(lines) == 1 + 3 * 2
    metadata = json.loads((tmp_path / "analysis.csv.json").read_text())
    assert metadata["isi_normalization"] == "firing_rate"
    assert metadata["isi_entropy_normalization"] == "interval/32"
    assert metadata["scene_reference"] == "playback"
    assert metadata["frame"] == 30


def test_analyze_frame_out_of_range(tmp_path: Path) -> None:
    raw = _simulate(tmp_path)
    table = tmp_path / "analysis.csv"
    result = _run("analyze", "--in", str(raw), "--frame", "999", "--csv", str(table))
    assert result.exit_code == 3
    assert result.output.startswith("Error:")
    assert len(result.output.splitlines()) == 1
    assert not table.exists()


def test_sweep_against_itself(tmp_path: Path) -> None:
    raw = _simulate(tmp_path)
    anchor = tmp_path / "anchor.csv"
    result = _run("sweep", "--in", str(raw), "--recon", "tfp", "--csv", str(anchor))
    assert result.exit_code == 0, result.output
    assert anchor.read_text().startswith("quality,bpp,psnr_scene,psnr_isi,psnr_fr\n20,")
    metadata = json.loads((tmp_path / "anchor.csv.json").read_text())
    assert metadata["bpp_denominator"] == "width*height*keyframes"

    result = _run(
        "sweep",
        "--in",
        str(raw),
        "--recon",
        "tfp",
        "--csv",
        str(tmp_path / "test.csv"),
        "--bd-against",
        str(anchor),
    )
    assert result.exit_code == 0, result.output
    assert "BD-rate: 0.0%" in result.output
    assert "BD-PSNR: 0.00 dB" in result.output


def test_isi_stats(tmp_path: Path) -> None:
    raw = _simulate(tmp_path)
    table = tmp_path / "isi.csv"
    result = _run("isi-stats", "--in", str(raw), "--csv", str(table))
    assert result.exit_code == 0, result.output
    assert "quartiles" in result.output
    assert table.read_text().startswith("isi,count\n")


def test_init_sweep(tmp_path: Path) -> None:
    table = tmp_path / "init.csv"
    result = _run("init-sweep", "--luminance", "0.3", "--csv", str(table))
    assert result.exit_code == 0, result.output
    assert "tau0=0.2: first spike 5" in result.output
    assert "tau0=1.8: first spike 0" in result.output
    assert len(table.read_text().splitlines()) == 1 + 3 * 100


def test_lossless(tmp_path: Path) -> None:
    raw = _simulate(tmp_path)
    out = tmp_path / "raw.spkl"
    result = _run("lossless", "--in", str(raw), "--out", str(out))
    assert result.exit_code == 0, result.output
    assert out.read_bytes()[:4] == b"SPKL"
    assert "bits per spike bit" in result.output


def test_editorconfig_sets_quality(tmp_path: Path) -> None:
    (tmp_path / ".editorconfig").write_text("root = true\n\n[*.spk]\nspike_quality = 90\n")
    raw = _simulate(tmp_path)
    container = tmp_path / "raw.spkc"
    result = _run("encode", "--in", str(raw), "--out", str(container))
    assert result.exit_code == 0, result.output
    assert CompressedContainer.from_bytes(container.read_bytes()).config.quality == 90

    result = _run("encode", "--in", str(raw), "--out", str(container), "--quality", "30")
    assert result.exit_code == 0, result.output
    assert CompressedContainer.from_bytes(container.read_bytes()).config.quality == 30
