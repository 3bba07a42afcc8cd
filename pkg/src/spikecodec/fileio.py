"""
Spike files, binary graymaps, scene directories and CSV tables.

Every writer has a pure ``*_bytes`` or ``*_text`` counterpart so that the
command-line interface can assemble all of its outputs before touching disk.
"""

import csv
import io
import logging
import struct
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    AmbiguousOrderingError,
    BadMagicError,
    ConfigError,
    EmptySceneError,
    LengthMismatchError,
    PgmFormatError,
    TruncatedFileError,
    UnsupportedMaxvalError,
)
from .evaluation import RdPoint
from .spike_model import SceneFrame, SceneSequence, SpikeStream

__all__: List[str] = [
    "RD_CSV_COLUMNS",
    "SPIKE_MAGIC",
    "csv_text",
    "parse_pgm",
    "parse_rd_csv",
    "parse_spike_file",
    "pgm_bytes",
    "rd_csv_text",
    "scene_directory_bytes",
    "read_pgm",
    "read_scene_directory",
    "read_spike_file",
    "scene_directory_files",
    "spike_file_bytes",
    "write_outputs",
    "write_pgm",
    "write_spike_file",
]

logger = logging.getLogger(__name__)

################################################################################
# Spike files
################################################################################

SPIKE_MAGIC: bytes = b"SPK1"
_SPIKE_HEADER = struct.Struct("<4sIII")


def spike_file_bytes(stream: SpikeStream) -> bytes:
    """
    Header (magic, width, height, frame count) followed by every plane with
    rows packed eight pixels to a byte, leftmost pixel in the lowest bit.
    """
    header = _SPIKE_HEADER.pack(SPIKE_MAGIC, stream.width, stream.height, stream.n_frames)
    packed = np.packbits(stream.planes, axis=2, bitorder="little")
    return header + packed.tobytes()


def parse_spike_file(data: bytes) -> SpikeStream:
    if len(data) < len(SPIKE_MAGIC):
        raise TruncatedFileError(f"spike file of {len(data)} bytes has no magic")
    if data[: len(SPIKE_MAGIC)] != SPIKE_MAGIC:
        raise BadMagicError(SPIKE_MAGIC, bytes(data[: len(SPIKE_MAGIC)]))
    if len(data) < _SPIKE_HEADER.size:
        raise TruncatedFileError(f"spike file header truncated at {len(data)} bytes")
    _, width, height, n_frames = _SPIKE_HEADER.unpack_from(data)
    row_bytes = -(-width // 8)
    expected = _SPIKE_HEADER.size + n_frames * height * row_bytes
    if len(data) < expected:
        raise TruncatedFileError(
            f"spike file holds {len(data)} bytes, its header promises {expected}"
        )
    if len(data) > expected:
        raise LengthMismatchError(
            f"spike file holds {len(data)} bytes, its header promises {expected}"
        )
    packed = np.frombuffer(data, dtype=np.uint8, offset=_SPIKE_HEADER.size)
    planes = np.unpackbits(
        packed.reshape(n_frames, height, row_bytes), axis=2, count=width, bitorder="little"
    )
    return SpikeStream(planes.astype(np.bool_))


def read_spike_file(path: Union[str, Path]) -> SpikeStream:
    stream = parse_spike_file(Path(path).read_bytes())
    logger.debug(
        "Read %d frames of %dx%d from %s", stream.n_frames, stream.width, stream.height, path
    )
    return stream


def write_spike_file(stream: SpikeStream, path: Union[str, Path]) -> None:
    Path(path).write_bytes(spike_file_bytes(stream))


################################################################################
# Binary graymaps
################################################################################

PGM_MAGIC: bytes = b"P5"
PGM_MAXVAL: int = 255


def _pgm_header_fields(data: bytes) -> Tuple[List[int], int]:
    """The three numeric header fields and the offset of the raster."""
    fields: List[int] = []
    position = len(PGM_MAGIC)
    while len(fields) < 3:
        if position >= len(data):
            raise PgmFormatError("graymap header is truncated")
        char = data[position : position + 1]
        if char.isspace():
            position += 1
        elif char == b"#":
            end = data.find(b"\n", position)
            if end < 0:
                raise PgmFormatError("graymap header is truncated")
            position = end + 1
        elif char.isdigit():
            start = position
            while position < len(data) and data[position : position + 1].isdigit():
                position += 1
            fields.append(int(data[start:position]))
        else:
            raise PgmFormatError(f"unexpected byte {char!r} in graymap header")
    # Exactly one whitespace byte separates the header from the raster.
    if position >= len(data) or not data[position : position + 1].isspace():
        raise PgmFormatError("graymap header is not terminated by whitespace")
    return (fields, position + 1)


def parse_pgm(data: bytes) -> SceneFrame:
    if data[: len(PGM_MAGIC)] != PGM_MAGIC:
        raise PgmFormatError(f"not a binary graymap: starts with {bytes(data[:2])!r}")
    (width, height, maxval), offset = _pgm_header_fields(data)
    if maxval != PGM_MAXVAL:
        raise UnsupportedMaxvalError(f"graymap maxval {maxval} is unsupported, expected 255")
    if width == 0 or height == 0:
        raise PgmFormatError(f"graymap has empty dimensions {width}x{height}")
    raster = data[offset:]
    if len(raster) != width * height:
        raise PgmFormatError(
            f"graymap raster holds {len(raster)} bytes, expected {width * height}"
        )
    values = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return values.astype(np.float64) / PGM_MAXVAL


def pgm_bytes(frame: SceneFrame) -> bytes:
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 2 or frame.size == 0:
        raise ConfigError(f"frame must be a non-empty grid, found shape {frame.shape}")
    height, width = frame.shape
    raster = np.clip(np.rint(frame * PGM_MAXVAL), 0, PGM_MAXVAL).astype(np.uint8)
    return f"P5\n{width} {height}\n{PGM_MAXVAL}\n".encode("ascii") + raster.tobytes()


def read_pgm(path: Union[str, Path]) -> SceneFrame:
    return parse_pgm(Path(path).read_bytes())


def write_pgm(frame: SceneFrame, path: Union[str, Path]) -> None:
    Path(path).write_bytes(pgm_bytes(frame))


################################################################################
# Scene directories
################################################################################


def scene_directory_files(directory: Union[str, Path]) -> List[Path]:
    """
    The graymaps of a scene directory in frame order. Names must be numbers
    of equal width, so that their lexicographic and numeric orders agree.
    """
    files = [
        path
        for path in Path(directory).iterdir()
        if path.is_file() and path.suffix.lower() == ".pgm"
    ]
    if not files:
        raise EmptySceneError(f"no .pgm files in {directory}")
    stems = [path.stem for path in files]
    for stem in stems:
        if not (stem.isascii() and stem.isdigit()):
            raise AmbiguousOrderingError(f"scene file name {stem!r} is not a frame number")
    if len({len(stem) for stem in stems}) != 1:
        raise AmbiguousOrderingError("scene file names are not zero-padded to one width")
    if len(set(stems)) != len(stems):
        raise AmbiguousOrderingError("scene directory holds duplicate frame numbers")
    return sorted(files, key=lambda path: path.stem)


def read_scene_directory(directory: Union[str, Path]) -> SceneSequence:
    files = scene_directory_files(directory)
    logger.info("Reading %d scene frames from %s", len(files), directory)
    return SceneSequence.from_frames([read_pgm(path) for path in files])


def scene_directory_bytes(
    scenes: Iterable[SceneFrame], names: Sequence[int]
) -> Dict[str, bytes]:
    """Zero-padded file names mapped to graymap contents."""
    width = max(4, len(str(max(names, default=0))))
    return {f"{name:0{width}d}.pgm": pgm_bytes(frame) for name, frame in zip(names, scenes)}


################################################################################
# CSV tables
################################################################################

RD_CSV_COLUMNS = ("quality", "bpp", "psnr_scene", "psnr_isi", "psnr_fr")

Cell = Union[None, int, float, str]


def _format_cell(value: Cell) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Cell]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ConfigError(f"row {list(row)} does not match header {list(header)}")
        writer.writerow([_format_cell(value) for value in row])
    return buffer.getvalue()


def rd_csv_text(points: Iterable[RdPoint]) -> str:
    return csv_text(
        RD_CSV_COLUMNS,
        (
            (point.quality, point.bpp, point.psnr_scene, point.psnr_isi, point.psnr_fr)
            for point in points
        ),
    )


def _optional_float(row: Mapping[str, Optional[str]], key: str) -> Optional[float]:
    value = row.get(key)
    return float(value) if value else None


def parse_rd_csv(text: str) -> List[RdPoint]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or tuple(reader.fieldnames) != RD_CSV_COLUMNS:
        raise ConfigError(
            f"rate-distortion table must have columns {','.join(RD_CSV_COLUMNS)}"
        )
    points: List[RdPoint] = []
    try:
        for row in reader:
            quality = row.get("quality")
            points.append(
                RdPoint(
                    bpp=float(row["bpp"]),
                    psnr_scene=_optional_float(row, "psnr_scene"),
                    psnr_isi=_optional_float(row, "psnr_isi"),
                    psnr_fr=_optional_float(row, "psnr_fr"),
                    quality=int(quality) if quality else None,
                )
            )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"malformed rate-distortion table: {e}") from e
    return points


################################################################################
# Output
################################################################################


def write_outputs(outputs: Mapping[Path, Union[bytes, str]]) -> None:
    """Write prepared file contents, creating parent directories as needed."""
    for path, contents in outputs.items():
        path.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(contents, str):
            path.write_text(contents, encoding="utf-8")
        else:
            path.write_bytes(contents)
        logger.info("Wrote %s", path)
