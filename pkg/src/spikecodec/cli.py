import functools
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, TypeVar, Union, cast

import click

from . import __version__, codec_config, encode_stream, simulator_config
from .analysis import (
    ISI_ENTROPY_NORMALIZATION,
    ISI_NORMALIZATION,
    Representation,
    compare_representations,
    initial_state_sweep,
    isi_distribution,
    spike_hamming_distance,
)
from .codec import (
    CompressedContainer,
    ReconstructionMode,
    RoiMode,
    decode_spikes_lossless,
    decompress,
    encode_spikes_lossless,
)
from .errors import ConfigError, SpikeCodecError
from .evaluation import (
    BPP_DENOMINATOR,
    ISI_CAP,
    METRICS,
    PSNR_CAP,
    Domain,
    RdCurve,
    bd_psnr,
    bd_rate,
    domain_psnr,
    rd_sweep,
)
from .fileio import (
    csv_text,
    parse_rd_csv,
    rd_csv_text,
    read_scene_directory,
    read_spike_file,
    scene_directory_bytes,
    spike_file_bytes,
    write_outputs,
)
from .representation import spikes_to_isi
from .spike_model import InitPolicy, SpikeStream, inject_spurious_spikes, simulate

F = TypeVar("F", bound=Callable[..., Any])

logger = logging.getLogger(__name__)

################################################################################
# Shared options
################################################################################


def _handle_errors(command: F) -> F:
    """Report library errors as one line and exit with the error's code."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return command(*args, **kwargs)
        except SpikeCodecError as e:
            click.echo(f"Error: {e}", err=True)
            exit(e.exit_code)

    return cast(F, wrapper)


def _simulator_options(command: F) -> F:
    command = click.option(
        "--reset",
        type=click.Choice(["hard", "soft"], case_sensitive=False),
        help="Reset after a spike  [default: soft]",
    )(command)
    command = click.option(
        "--theta",
        type=float,  # Optional[float]
        help="Firing threshold  [default: 2.0]",
    )(command)
    command = click.option(
        "--alpha",
        type=float,  # Optional[float]
        help="Photoelectric conversion rate  [default: 1.0]",
    )(command)
    return command


def _codec_options(command: F) -> F:
    command = click.option(
        "--recon",
        default="tfi",
        show_default=True,
        help="Keyframe scene reconstruction: tfi, tfp or tfp:WINDOW",
    )(command)
    command = click.option(
        "--roi-mode",
        type=click.Choice(["bidirectional", "forward"], case_sensitive=False),
        default="bidirectional",
        show_default=True,
    )(command)
    command = click.option(
        "--roi/--no-roi",
        default=False,
        show_default=True,
        help="Spend more bits where spike activity changes",
    )(command)
    command = click.option("--r", "branch_radius", type=int, help="Branch radius  [default: 2]")(
        command
    )
    command = click.option("--s", "block_radius", type=int, help="Block radius  [default: 6]")(
        command
    )
    command = click.option("--d", "step", type=int, help="Keyframe step  [default: 7]")(command)
    return command


def _parse_recon(value: str) -> Tuple[ReconstructionMode, int]:
    name, _, window = value.lower().partition(":")
    if name == "tfi" and not window:
        return (ReconstructionMode.Tfi, 31)
    if name == "tfp":
        try:
            return (ReconstructionMode.Tfp, int(window) if window else 31)
        except ValueError:
            pass
    raise click.BadParameter(
        f"expected tfi, tfp or tfp:WINDOW, found {value!r}", param_hint="--recon"
    )


def _parse_qualities(value: str) -> List[int]:
    try:
        return [int(quality) for quality in value.split(",") if quality.strip()]
    except ValueError:
        raise click.BadParameter(
            f"expected comma-separated integers, found {value!r}", param_hint="--qualities"
        ) from None


def _sidecar(csv_path: Path, metadata: Dict[str, Any]) -> Tuple[Path, str]:
    return (
        csv_path.with_name(csv_path.name + ".json"),
        json.dumps(metadata, indent=2, sort_keys=True) + "\n",
    )


def _recorded_origin(spikes_path: Path) -> int:
    """The origin that decode recorded next to a regenerated spike file."""
    path = spikes_path.with_name(spikes_path.name + ".json")
    if not path.exists():
        logger.warning("No %s; assuming the stream starts at source frame 0", path.name)
        return 0
    try:
        origin = json.loads(path.read_text(encoding="utf-8"))["origin"]
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"{path} does not record a stream origin: {e}") from None
    if not isinstance(origin, int) or origin < 0:
        raise ConfigError(f"{path} records an invalid stream origin {origin!r}")
    return origin


def _format_percent(value: float) -> str:
    return f"{round(value, 1) + 0.0:.1f}%"


################################################################################
# Commands
################################################################################


@click.group(name="spikecodec")
@click.option(
    "--verbose/--quiet",
    default=True,
    show_default=True,
)
@click.version_option(
    version=__version__,
    prog_name="spikecodec",
    message=f"%(prog)s, version %(version)s",
)
def cli(*, verbose: bool) -> None:
    """Spike camera simulation, analysis and compression."""
    package_logger = logging.getLogger("spikecodec")
    for handler in list(package_logger.handlers):
        package_logger.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))
    package_logger.addHandler(handler)
    package_logger.setLevel(logging.INFO if verbose else logging.WARNING)


@cli.command(name="simulate")
@click.option(
    "--scenes",
    required=True,
    type=click.Path(exists=True, file_okay=False, dir_okay=True, readable=True),
    help="Directory of zero-padded numbered .pgm frames",
)
@_simulator_options
@click.option(
    "--init",
    "init",
    default="0",
    show_default=True,
    help="Initial accumulator state: a value in [0, theta) or 'rand'",
)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--noise",
    type=float,
    default=0.0,
    show_default=True,
    help="Probability of a spurious spike at each silent position",
)
@click.option("--out", required=True, type=click.Path(dir_okay=False, writable=True))
@_handle_errors
def simulate_cmd(
    *,
    scenes: str,
    alpha: Optional[float],
    theta: Optional[float],
    reset: Optional[str],
    init: str,
    seed: int,
    noise: float,
    out: str,
) -> None:
    """Simulate a spike stream from a directory of scene frames."""
    if init.lower() in ("rand", "random"):
        init_policy = InitPolicy.uniform_random(seed)
    else:
        try:
            init_policy = InitPolicy.constant(float(init))
        except ValueError:
            raise click.BadParameter(
                f"expected a number or 'rand', found {init!r}", param_hint="--init"
            ) from None
    cfg = simulator_config(
        filename=out, alpha=alpha, theta=theta, reset_mode=reset, init_policy=init_policy
    )
    stream = simulate(read_scene_directory(scenes), cfg)
    if noise > 0:
        stream = inject_spurious_spikes(stream, noise, seed)
    write_outputs({Path(out): spike_file_bytes(stream)})
    click.echo(
        f"{stream.n_frames} frames of {stream.width}x{stream.height}, "
        f"{int(stream.planes.sum())} spikes"
    )


@cli.command()
@click.option("--in", "input", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--quality", type=int, help="Scene quality, 1 to 100  [default: 50]")
@_codec_options
@_simulator_options
@click.option("--out", required=True, type=click.Path(dir_okay=False, writable=True))
@click.option(
    "--safe/--unsafe",
    default=True,
    show_default=True,
)
@_handle_errors
def encode(
    *,
    input: str,
    quality: Optional[int],
    step: Optional[int],
    block_radius: Optional[int],
    branch_radius: Optional[int],
    roi: bool,
    roi_mode: str,
    recon: str,
    alpha: Optional[float],
    theta: Optional[float],
    reset: Optional[str],
    out: str,
    safe: bool,
) -> None:
    """Compress a spike file into a scene container."""
    reconstruction, window = _parse_recon(recon)
    cfg = codec_config(
        filename=input,
        sim=simulator_config(filename=input, alpha=alpha, theta=theta, reset_mode=reset),
        quality=quality,
        step=step,
        block_radius=block_radius,
        branch_radius=branch_radius,
        roi=RoiMode[roi_mode.capitalize()] if roi else RoiMode.Off,
        reconstruction=reconstruction,
        window=window,
    )
    stream = read_spike_file(input)
    data = encode_stream(stream, cfg, safe=safe)
    write_outputs({Path(out): data})
    click.echo(f"{len(data)} bytes")


@cli.command()
@click.option("--in", "input", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-spikes", required=True, type=click.Path(dir_okay=False, writable=True))
@click.option("--out-scenes", type=click.Path(file_okay=False, writable=True))
@_handle_errors
def decode(*, input: str, out_spikes: str, out_scenes: Optional[str]) -> None:
    """Regenerate a spike stream from a scene container."""
    container = CompressedContainer.from_bytes(Path(input).read_bytes())
    decoded = decompress(container)
    regenerated = decoded.regenerated
    outputs: Dict[Path, Union[bytes, str]] = dict(
        [
            (Path(out_spikes), spike_file_bytes(regenerated)),
            _sidecar(
                Path(out_spikes),
                {
                    "container": input,
                    "origin": int(regenerated.origin),
                    "keyframes": [int(k) for k in decoded.keyframes],
                },
            ),
        ]
    )
    if out_scenes is not None:
        frames = scene_directory_bytes(
            (decoded.scenes.frames[i] for i in range(decoded.scenes.n_frames)),
            decoded.keyframes,
        )
        outputs.update({Path(out_scenes) / name: data for name, data in frames.items()})
    write_outputs(outputs)
    logger.info("Regenerated stream starts at source frame %d", regenerated.origin)
    click.echo(
        f"{regenerated.n_frames} frames from origin {regenerated.origin}, "
        f"{len(decoded.keyframes)} keyframes"
    )


@cli.command()
@click.option("--in", "input", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--repr",
    "representations",
    type=click.Choice(["spike", "isi", "scene"], case_sensitive=False),
    multiple=True,
    default=("spike", "isi", "scene"),
    show_default=True,
)
@click.option("--radius", "radii", type=int, multiple=True, default=(1, 2), show_default=True)
@click.option("--frame", type=int, help="Frame to analyse  [default: middle frame]")
@click.option(
    "--scenes",
    type=click.Path(exists=True, file_okay=False, dir_okay=True, readable=True),
    help="Ground-truth scene frames for the scene representation",
)
@_simulator_options
@click.option("--csv", "csv_path", required=True, type=click.Path(dir_okay=False, writable=True))
@_handle_errors
def analyze(
    *,
    input: str,
    representations: Tuple[str, ...],
    radii: Tuple[int, ...],
    frame: Optional[int],
    scenes: Optional[str],
    alpha: Optional[float],
    theta: Optional[float],
    reset: Optional[str],
    csv_path: str,
) -> None:
    """Measure the spatial predictability of each representation."""
    cfg = simulator_config(filename=input, alpha=alpha, theta=theta, reset_mode=reset)
    stream = read_spike_file(input)
    k = stream.n_frames // 2 if frame is None else frame
    rows = compare_representations(
        stream,
        k,
        cfg,
        radii=radii,
        scene=read_scene_directory(scenes) if scenes is not None else None,
        representations=[Representation[name.capitalize()] for name in representations],
    )
    text = csv_text(
        (
            "representation",
            "frame",
            "radius",
            "variance",
            "conditional_entropy",
            "entropy",
            "value_bins",
            "cond_bins",
        ),
        (
            (
                row.representation,
                row.frame,
                row.radius,
                row.variance,
                row.conditional_entropy,
                row.entropy,
                row.value_bins,
                row.cond_bins,
            )
            for row in rows
        ),
    )
    metadata = {
        "input": input,
        "frame": k,
        "isi_normalization": ISI_NORMALIZATION,
        "isi_entropy_normalization": ISI_ENTROPY_NORMALIZATION,
        "scene_reference": "ground truth" if scenes is not None else "playback",
        "simulator": cfg.to_dict(encode_json=True),
    }
    write_outputs(dict([(Path(csv_path), text), _sidecar(Path(csv_path), metadata)]))
    for row in rows:
        click.echo(
            f"{row.representation:<6} r={row.radius} variance={row.variance:.6f} "
            f"conditional_entropy={row.conditional_entropy:.6f}"
        )


@cli.command(name="eval")
@click.option("--raw", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--recon", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--recon-offset",
    type=int,
    help="Source frame of the first reconstructed frame  [default: recorded by decode]",
)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False, writable=True))
@_handle_errors
def eval_cmd(
    *, raw: str, recon: str, recon_offset: Optional[int], csv_path: Optional[str]
) -> None:
    """Compare two spike files in the interval and firing-rate domains."""
    if recon_offset is None:
        recon_offset = _recorded_origin(Path(recon))
    raw_stream = read_spike_file(raw)
    recon_stream = read_spike_file(recon)
    results = [
        (domain, domain_psnr(raw_stream, recon_stream, domain, recon_origin=recon_offset))
        for domain in Domain
    ]
    if csv_path is not None:
        text = csv_text(("domain", "psnr"), ((d.name.lower(), v) for d, v in results))
        metadata = {
            "raw": raw,
            "recon": recon,
            "recon_offset": recon_offset,
            "isi_cap": ISI_CAP,
            "psnr_cap": PSNR_CAP,
        }
        write_outputs(dict([(Path(csv_path), text), _sidecar(Path(csv_path), metadata)]))
    for domain, value in results:
        click.echo(f"{domain.name} PSNR: {value:.2f} dB")


@cli.command()
@click.option("--in", "input", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--qualities", default="20,40,60,80", show_default=True)
@_codec_options
@_simulator_options
@click.option(
    "--scenes",
    type=click.Path(exists=True, file_okay=False, dir_okay=True, readable=True),
    help="Ground-truth scene frames for scene-domain PSNR",
)
@click.option("--csv", "csv_path", required=True, type=click.Path(dir_okay=False, writable=True))
@click.option(
    "--bd-against",
    type=click.Path(exists=True, dir_okay=False),
    help="Anchor rate-distortion table to compare the sweep against",
)
@click.option(
    "--metric",
    type=click.Choice(list(METRICS)),
    default="psnr_scene",
    show_default=True,
)
@_handle_errors
def sweep(
    *,
    input: str,
    qualities: str,
    step: Optional[int],
    block_radius: Optional[int],
    branch_radius: Optional[int],
    roi: bool,
    roi_mode: str,
    recon: str,
    alpha: Optional[float],
    theta: Optional[float],
    reset: Optional[str],
    scenes: Optional[str],
    csv_path: str,
    bd_against: Optional[str],
    metric: str,
) -> None:
    """Rate-distortion sweep over scene quality."""
    reconstruction, window = _parse_recon(recon)
    quality_list = _parse_qualities(qualities)
    if not quality_list:
        raise click.BadParameter("no qualities given", param_hint="--qualities")
    cfg = codec_config(
        filename=input,
        sim=simulator_config(filename=input, alpha=alpha, theta=theta, reset_mode=reset),
        step=step,
        block_radius=block_radius,
        branch_radius=branch_radius,
        roi=RoiMode[roi_mode.capitalize()] if roi else RoiMode.Off,
        reconstruction=reconstruction,
        window=window,
    )
    stream = read_spike_file(input)
    result = rd_sweep(
        stream,
        cfg,
        quality_list,
        scenes=read_scene_directory(scenes) if scenes is not None else None,
    )
    text = rd_csv_text(result.points)

    comparison: Optional[Tuple[float, float]] = None
    if bd_against is not None:
        anchor = RdCurve(tuple(parse_rd_csv(Path(bd_against).read_text(encoding="utf-8"))))
        test = RdCurve(tuple(parse_rd_csv(text)))
        comparison = (bd_rate(anchor, test, metric), bd_psnr(anchor, test, metric))

    metadata = {
        "input": input,
        "config": cfg.to_dict(encode_json=True),
        "bpp_denominator": BPP_DENOMINATOR,
        "isi_cap": ISI_CAP,
        "psnr_cap": PSNR_CAP,
        "scene_reference": "ground truth" if scenes is not None else "keyframe reconstruction",
        "violations": [list(pair) for pair in result.violations],
        "fidelity_drops": [list(drop) for drop in result.fidelity_drops],
        "failures": {str(quality): message for quality, message in result.failures.items()},
    }
    write_outputs(dict([(Path(csv_path), text), _sidecar(Path(csv_path), metadata)]))
    for point in result.points:
        click.echo(f"quality {point.quality}: {point.bpp:.4f} bpp")
    if comparison is not None:
        click.echo(f"BD-rate: {_format_percent(comparison[0])}")
        click.echo(f"BD-PSNR: {round(comparison[1], 2) + 0.0:.2f} dB")


@cli.command(name="isi-stats")
@click.option("--in", "input", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--csv", "csv_path", required=True, type=click.Path(dir_okay=False, writable=True))
@_handle_errors
def isi_stats(*, input: str, csv_path: str) -> None:
    """Histogram and quartiles of the inter-spike intervals of a spike file."""
    stats = isi_distribution(spikes_to_isi(read_spike_file(input)))
    text = csv_text(("isi", "count"), sorted(stats.histogram.items()))
    metadata = {"input": input, "count": stats.count, "quartiles": stats.quartiles}
    write_outputs(dict([(Path(csv_path), text), _sidecar(Path(csv_path), metadata)]))
    if stats.quartiles is None:
        click.echo("no complete intervals")
    else:
        q1, median, q3 = stats.quartiles
        click.echo(f"{stats.count} intervals, quartiles {q1:g} / {median:g} / {q3:g}")


@cli.command(name="init-sweep")
@click.option("--luminance", type=float, required=True, help="Constant luminance in [0, 1]")
@click.option("--frames", type=int, default=100, show_default=True)
@click.option(
    "--fraction",
    "fractions",
    type=float,
    multiple=True,
    default=(0.1, 0.5, 0.9),
    show_default=True,
    help="Initial states as fractions of theta",
)
@_simulator_options
@click.option("--csv", "csv_path", required=True, type=click.Path(dir_okay=False, writable=True))
@_handle_errors
def init_sweep(
    *,
    luminance: float,
    frames: int,
    fractions: Tuple[float, ...],
    alpha: Optional[float],
    theta: Optional[float],
    reset: Optional[str],
    csv_path: str,
) -> None:
    """Trace one pixel from several initial states."""
    cfg = simulator_config(filename=csv_path, alpha=alpha, theta=theta, reset_mode=reset)
    if not 0 <= luminance <= 1:
        raise click.BadParameter("luminance must lie in [0, 1]", param_hint="--luminance")
    traces = initial_state_sweep(
        [luminance] * frames, cfg, [fraction * cfg.theta for fraction in fractions]
    )
    text = csv_text(
        ("tau0", "frame", "hidden", "fired", "isi"),
        (
            (trace.tau0, n, float(trace.hidden[n]), int(trace.fired[n]), int(trace.isi[n]))
            for trace in traces
            for n in range(frames)
        ),
    )
    metadata = {
        "luminance": luminance,
        "frames": frames,
        "simulator": cfg.to_dict(encode_json=True),
    }
    write_outputs(dict([(Path(csv_path), text), _sidecar(Path(csv_path), metadata)]))
    for trace in traces:
        click.echo(
            f"tau0={trace.tau0:g}: first spike {trace.first_spike}, "
            f"intervals {sorted(set(trace.intervals.tolist()))}"
        )
    if len(traces) > 1:
        planes = [SpikeStream(trace.fired.reshape(-1, 1, 1)) for trace in traces]
        distances = [spike_hamming_distance(planes[0], other) for other in planes[1:]]
        click.echo(f"spike disagreement with tau0={traces[0].tau0:g}: {distances}")


@cli.command()
@click.option("--in", "input", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False, writable=True))
@click.option(
    "--safe/--unsafe",
    default=True,
    show_default=True,
)
@_handle_errors
def lossless(*, input: str, out: Optional[str], safe: bool) -> None:
    """Code a spike file with the lossless context coder and report its size."""
    stream = read_spike_file(input)
    data = encode_spikes_lossless(stream)
    if safe:
        # assert: the lossless coder round-trips
        assert decode_spikes_lossless(data) == stream, "Lossless coding is not exact."
    if out is not None:
        write_outputs({Path(out): data})
    bits_per_spike_bit = 8 * len(data) / max(stream.planes.size, 1)
    click.echo(f"{len(data)} bytes, {bits_per_spike_bit:.4f} bits per spike bit")


def main() -> None:
    cli(prog_name="spikecodec")


if __name__ == "__main__":
    main()
