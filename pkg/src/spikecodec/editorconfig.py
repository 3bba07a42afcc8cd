from pathlib import Path
from typing import Callable, Dict, Optional, TypeVar, cast

from .errors import ConfigError

T = TypeVar("T")

try:
    from editorconfig import EditorConfigError, get_properties

    def get_editorconfig(file: str) -> Dict[str, str]:
        try:
            return cast(Dict[str, str], get_properties(str(Path(file).absolute())) or {})
        except EditorConfigError:
            return {}

except ModuleNotFoundError as e:
    if e.name != "editorconfig":
        raise e

    def get_editorconfig(file: str) -> Dict[str, str]:
        return {}


def _get_property(file: str, key: str, parse: Callable[[str], T]) -> Optional[T]:
    value = get_editorconfig(file).get(key, None)
    if value is None:
        return None
    try:
        return parse(value)
    except ValueError as e:
        raise ConfigError(f"invalid {key} = {value!r} in .editorconfig for {file}") from e


def _parse_reset(value: str) -> str:
    if value.lower() not in ("hard", "soft"):
        raise ValueError(value)
    return value.lower()


def get_spike_alpha(file: str) -> Optional[float]:
    return _get_property(file, "spike_alpha", float)


def get_spike_theta(file: str) -> Optional[float]:
    return _get_property(file, "spike_theta", float)


def get_spike_reset(file: str) -> Optional[str]:
    return _get_property(file, "spike_reset", _parse_reset)


def get_spike_quality(file: str) -> Optional[int]:
    return _get_property(file, "spike_quality", int)


def get_keyframe_step(file: str) -> Optional[int]:
    return _get_property(file, "keyframe_step", int)


def get_block_radius(file: str) -> Optional[int]:
    return _get_property(file, "block_radius", int)


def get_branch_radius(file: str) -> Optional[int]:
    return _get_property(file, "branch_radius", int)
