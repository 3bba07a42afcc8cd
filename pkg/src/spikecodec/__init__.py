from typing import List, Optional, Union

from .analysis import (
    InitialStateTrace,
    IsiStats,
    Representation,
    RepresentationGrid,
    RepresentationMetrics,
    compare_representations,
    conditional_entropy,
    entropy_bits,
    initial_state_sweep,
    isi_distribution,
    neighborhood_variance,
    representation_grid,
    spike_hamming_distance,
)
from .codec import (
    CodecConfig,
    CompressedContainer,
    Decompressed,
    ReconstructionMode,
    RoiMode,
    activity_map,
    compress,
    decode_frame,
    decode_spikes_lossless,
    decompress,
    encode_frame,
    encode_spikes_lossless,
)
from .editorconfig import (
    get_block_radius,
    get_branch_radius,
    get_keyframe_step,
    get_spike_alpha,
    get_spike_quality,
    get_spike_reset,
    get_spike_theta,
)
from .errors import SpikeCodecError
from .evaluation import (
    Domain,
    RdCurve,
    RdPoint,
    bd_psnr,
    bd_rate,
    bpp,
    domain_psnr,
    psnr,
    rd_sweep,
)
from .rangecoder import ModelSpec, rc_decode, rc_encode
from .representation import (
    IsiField,
    IsiRepr,
    KeyframeSchedule,
    firing_rate,
    isi_repr_to_spikes,
    keyframe_schedule,
    reconstruct_tfi,
    reconstruct_tfp,
    spikes_to_isi,
    spikes_to_isi_repr,
)
from .spike_model import (
    InitPolicy,
    ResetMode,
    SceneSequence,
    SimulatorConfig,
    SpikeStream,
    expected_firing_rate,
    expected_isi,
    inject_spurious_spikes,
    simulate,
    step,
)

__version__: str = "0.4.0"

__all__: List[str] = [
    "CodecConfig",
    "CompressedContainer",
    "Decompressed",
    "Domain",
    "InitPolicy",
    "InitialStateTrace",
    "IsiField",
    "IsiRepr",
    "IsiStats",
    "KeyframeSchedule",
    "ModelSpec",
    "RdCurve",
    "RdPoint",
    "ReconstructionMode",
    "Representation",
    "RepresentationGrid",
    "RepresentationMetrics",
    "ResetMode",
    "RoiMode",
    "SceneSequence",
    "SimulatorConfig",
    "SpikeCodecError",
    "SpikeStream",
    "activity_map",
    "bd_psnr",
    "bd_rate",
    "bpp",
    "codec_config",
    "compare_representations",
    "compress",
    "conditional_entropy",
    "decode_frame",
    "decode_spikes_lossless",
    "decompress",
    "domain_psnr",
    "encode_frame",
    "encode_spikes_lossless",
    "encode_stream",
    "entropy_bits",
    "expected_firing_rate",
    "expected_isi",
    "firing_rate",
    "initial_state_sweep",
    "inject_spurious_spikes",
    "isi_distribution",
    "isi_repr_to_spikes",
    "keyframe_schedule",
    "neighborhood_variance",
    "psnr",
    "rc_decode",
    "rc_encode",
    "rd_sweep",
    "reconstruct_tfi",
    "reconstruct_tfp",
    "representation_grid",
    "simulate",
    "simulator_config",
    "spike_hamming_distance",
    "spikes_to_isi",
    "spikes_to_isi_repr",
    "step",
]


def simulator_config(
    *,
    filename: Optional[str] = None,
    alpha: Optional[float] = None,
    theta: Optional[float] = None,
    reset_mode: Union[None, str, ResetMode] = None,
    init_policy: Optional[InitPolicy] = None,
) -> SimulatorConfig:
    """
    Simulator parameters, falling back to the .editorconfig properties that
    apply to ``filename`` and then to the built-in defaults.
    """
    defaults = SimulatorConfig()

    # Get alpha, theta and reset from .editorconfig
    if filename is not None:
        if alpha is None:
            alpha = get_spike_alpha(filename)
        if theta is None:
            theta = get_spike_theta(filename)
        if reset_mode is None:
            reset_mode = get_spike_reset(filename)

    # Interpret the reset setting
    reset_mode_options = {"hard": ResetMode.Hard, "soft": ResetMode.Soft}
    if isinstance(reset_mode, str):
        reset_mode = reset_mode_options[reset_mode.lower()]

    return SimulatorConfig(
        alpha=defaults.alpha if alpha is None else alpha,
        theta=defaults.theta if theta is None else theta,
        reset_mode=defaults.reset_mode if reset_mode is None else reset_mode,
        init_policy=defaults.init_policy if init_policy is None else init_policy,
    )


def codec_config(
    *,
    filename: Optional[str] = None,
    sim: Optional[SimulatorConfig] = None,
    quality: Optional[int] = None,
    step: Optional[int] = None,
    block_radius: Optional[int] = None,
    branch_radius: Optional[int] = None,
    roi: RoiMode = RoiMode.Off,
    reconstruction: ReconstructionMode = ReconstructionMode.Tfi,
    window: int = 31,
) -> CodecConfig:
    """Codec parameters, resolved like ``simulator_config``."""
    defaults = CodecConfig()

    # Get quality and the keyframe schedule from .editorconfig
    if filename is not None:
        if quality is None:
            quality = get_spike_quality(filename)
        if step is None:
            step = get_keyframe_step(filename)
        if block_radius is None:
            block_radius = get_block_radius(filename)
        if branch_radius is None:
            branch_radius = get_branch_radius(filename)

    return CodecConfig(
        step=defaults.step if step is None else step,
        block_radius=defaults.block_radius if block_radius is None else block_radius,
        branch_radius=defaults.branch_radius if branch_radius is None else branch_radius,
        quality=defaults.quality if quality is None else quality,
        roi=roi,
        sim=simulator_config(filename=filename) if sim is None else sim,
        reconstruction=reconstruction,
        window=window,
    )


def encode_stream(
    stream: SpikeStream, cfg: CodecConfig, *, safe: Optional[bool] = None
) -> bytes:
    """
    Compress ``stream`` into container bytes. In safe mode, which is on by
    default in debug builds, the container is parsed back and decompressed
    before it is returned.
    """
    container = compress(stream, cfg)
    data = container.to_bytes()

    # safety tests:
    if safe or (safe is None and __debug__):
        parsed = CompressedContainer.from_bytes(data)
        # assert: the container parses back to the same bytes
        assert parsed.to_bytes() == data, "Container does not survive a round trip."

        # assert: the container decodes to a stream of the source dimensions
        regenerated = decompress(parsed).regenerated
        assert (regenerated.height, regenerated.width) == (stream.height, stream.width)

    return data
