"""
Carry-less range coder with adaptive frequency and binary models.

The coder keeps a 64-bit ``low`` and ``range`` and renormalises a byte at a
time. Encoder and decoder shift on exactly the same steps, so a decoder that
has read every byte after decoding its last symbol has consumed the stream
exactly; anything else is reported as corruption.

Examples
--------
>>> spec = ModelSpec(alphabet_size=4)
>>> data = rc_encode([0, 3, 3, 1], spec)
>>> rc_decode(data, 4, spec)
[0, 3, 3, 1]
"""

import math
from dataclasses import dataclass
from typing import Iterable, List

from dataclasses_json import DataClassJsonMixin

from .errors import ConfigError, CorruptStreamError, SymbolCountError

__all__: List[str] = [
    "BinaryModel",
    "FrequencyModel",
    "ModelSpec",
    "RangeDecoder",
    "RangeEncoder",
    "rc_decode",
    "rc_encode",
]

_STATE_BITS = 64
_MASK = (1 << _STATE_BITS) - 1
_TOP = 1 << (_STATE_BITS - 8)
_BOTTOM = 1 << (_STATE_BITS - 16)
_SHIFT = _STATE_BITS - 8

# Binary models code against a fixed total of 2^16.
_PROBABILITY_BITS = 16
_PROBABILITY_ONE = 1 << _PROBABILITY_BITS

################################################################################
# Models
################################################################################


@dataclass(frozen=True)
class ModelSpec(DataClassJsonMixin):
    """
    Adaptive frequency model: every symbol starts with count 1; a coded symbol
    gains ``increment``; counts are halved when the total exceeds ``limit``.
    """

    alphabet_size: int
    increment: int = 32
    limit: int = 1 << 16

    def __post_init__(self) -> None:
        if self.alphabet_size < 1:
            raise ConfigError(f"alphabet must be non-empty, found {self.alphabet_size}")
        if not 0 < self.limit <= 1 << 16:
            raise ConfigError(f"model total limit must lie in (0, 2^16], found {self.limit}")
        if self.alphabet_size * 2 > self.limit:
            raise ConfigError(
                f"alphabet of {self.alphabet_size} symbols does not fit a total of {self.limit}"
            )
        if self.increment < 1:
            raise ConfigError(f"increment must be positive, found {self.increment}")

    def create(self) -> "FrequencyModel":
        return FrequencyModel(self)

    def capacity(self, payload_bytes: int) -> int:
        """Most symbols a model of this shape can decode from ``payload_bytes``."""
        # Counts never drop below 1, so the likeliest symbol leaves n - 1 to the rest.
        return _capacity(payload_bytes, (self.alphabet_size - 1) / self.limit)


class FrequencyModel:
    """Symbol counts kept in a Fenwick tree for logarithmic updates."""

    def __init__(self, spec: ModelSpec) -> None:
        self.spec = spec
        self._counts = [1] * spec.alphabet_size
        self._rebuild()

    def _rebuild(self) -> None:
        size = len(self._counts)
        tree = [0] * (size + 1)
        for index, count in enumerate(self._counts, start=1):
            tree[index] += count
            parent = index + (index & -index)
            if parent <= size:
                tree[parent] += tree[index]
        self._tree = tree
        self.total = sum(self._counts)
        self._top_bit = 1 << (size.bit_length() - 1) if size else 0

    def frequency(self, symbol: int) -> int:
        return self._counts[symbol]

    def cumulative(self, symbol: int) -> int:
        """Sum of the counts of every symbol below ``symbol``."""
        total = 0
        tree = self._tree
        index = symbol
        while index > 0:
            total += tree[index]
            index &= index - 1
        return total

    def find(self, target: int) -> int:
        """The symbol whose cumulative interval contains ``target``."""
        tree = self._tree
        size = len(self._counts)
        position = 0
        bit = self._top_bit
        while bit:
            probe = position + bit
            if probe <= size and tree[probe] <= target:
                position = probe
                target -= tree[probe]
            bit >>= 1
        return position

    def update(self, symbol: int) -> None:
        increment = self.spec.increment
        self._counts[symbol] += increment
        self.total += increment
        tree = self._tree
        size = len(self._counts)
        index = symbol + 1
        while index <= size:
            tree[index] += increment
            index += index & -index
        if self.total > self.spec.limit:
            self._counts = [max(1, count >> 1) for count in self._counts]
            self._rebuild()


class BinaryModel:
    """Adaptive probability of a one bit, in 16-bit fixed point."""

    __slots__ = ("p1", "shift")

    def __init__(self, shift: int = 5) -> None:
        self.p1 = _PROBABILITY_ONE >> 1
        self.shift = shift

    def update(self, bit: int) -> None:
        if bit:
            self.p1 += (_PROBABILITY_ONE - self.p1) >> self.shift
        else:
            self.p1 -= self.p1 >> self.shift

    def capacity(self, payload_bytes: int) -> int:
        """Most bits models with this adaptation rate can decode from ``payload_bytes``."""
        # Adaptation stalls within 2^shift - 1 of either end of the scale.
        return _capacity(payload_bytes, ((1 << self.shift) - 1) / _PROBABILITY_ONE)


def _capacity(payload_bytes: int, least_likely: float) -> int:
    # Every decoded symbol costs at least the information of the likeliest outcome.
    least_bits = -math.log2(1.0 - least_likely)
    return int(8 * (payload_bytes + 8) / least_bits) + 1


################################################################################
# Encoder
################################################################################


class RangeEncoder:
    def __init__(self) -> None:
        self._low = 0
        self._range = _MASK
        self._output = bytearray()

    def encode(self, cumulative: int, frequency: int, total: int) -> None:
        step = self._range // total
        self._low += cumulative * step
        self._range = step * frequency
        self._normalize()

    def _normalize(self) -> None:
        low = self._low
        range_ = self._range
        output = self._output
        while True:
            if (low ^ ((low + range_) & _MASK)) >= _TOP:
                if range_ >= _BOTTOM:
                    break
                range_ = -low & (_BOTTOM - 1)
            output.append(low >> _SHIFT)
            low = (low << 8) & _MASK
            range_ = (range_ << 8) & _MASK
        self._low = low
        self._range = range_

    def encode_symbol(self, model: FrequencyModel, symbol: int) -> None:
        self.encode(model.cumulative(symbol), model.frequency(symbol), model.total)
        model.update(symbol)

    def encode_bit(self, model: BinaryModel, bit: int) -> None:
        zero = _PROBABILITY_ONE - model.p1
        step = self._range >> _PROBABILITY_BITS
        if bit:
            self._low += zero * step
            self._range = step * model.p1
        else:
            self._range = step * zero
        if self._range < _TOP:
            self._normalize()
        model.update(bit)

    def encode_bypass(self, bit: int) -> None:
        self.encode(bit & 1, 1, 2)

    def finish(self) -> bytes:
        low = self._low
        for _ in range(_STATE_BITS // 8):
            self._output.append(low >> _SHIFT)
            low = (low << 8) & _MASK
        return bytes(self._output)


################################################################################
# Decoder
################################################################################


class RangeDecoder:
    def __init__(self, data: bytes) -> None:
        self._data = data
        self._position = 0
        self._low = 0
        self._range = _MASK
        self._code = 0
        for _ in range(_STATE_BITS // 8):
            self._code = (self._code << 8) | self._read_byte()

    def _read_byte(self) -> int:
        if self._position >= len(self._data):
            raise CorruptStreamError(
                f"range-coded stream truncated after {len(self._data)} bytes"
            )
        byte = self._data[self._position]
        self._position += 1
        return byte

    def _target(self, total: int) -> int:
        self._range //= total
        value = ((self._code - self._low) & _MASK) // self._range
        if value >= total:
            raise CorruptStreamError("range-coded stream is corrupt")
        return value

    def _consume(self, cumulative: int, frequency: int) -> None:
        self._low += cumulative * self._range
        self._range *= frequency
        self._normalize()

    def _normalize(self) -> None:
        low = self._low
        range_ = self._range
        code = self._code
        while True:
            if (low ^ ((low + range_) & _MASK)) >= _TOP:
                if range_ >= _BOTTOM:
                    break
                range_ = -low & (_BOTTOM - 1)
            code = ((code << 8) | self._read_byte()) & _MASK
            low = (low << 8) & _MASK
            range_ = (range_ << 8) & _MASK
        self._low = low
        self._range = range_
        self._code = code

    def decode(self, total: int) -> int:
        """
        The cumulative target for a symbol out of ``total``; the caller must
        follow up with ``consume`` for the symbol it maps to.
        """
        return self._target(total)

    def consume(self, cumulative: int, frequency: int) -> None:
        self._consume(cumulative, frequency)

    def decode_symbol(self, model: FrequencyModel) -> int:
        symbol = model.find(self._target(model.total))
        self._consume(model.cumulative(symbol), model.frequency(symbol))
        model.update(symbol)
        return symbol

    def decode_bit(self, model: BinaryModel) -> int:
        zero = _PROBABILITY_ONE - model.p1
        step = self._range >> _PROBABILITY_BITS
        value = ((self._code - self._low) & _MASK) // step
        if value >= _PROBABILITY_ONE:
            raise CorruptStreamError("range-coded stream is corrupt")
        if value >= zero:
            bit = 1
            self._low += zero * step
            self._range = step * model.p1
        else:
            bit = 0
            self._range = step * zero
        if self._range < _TOP:
            self._normalize()
        model.update(bit)
        return bit

    def decode_bypass(self) -> int:
        bit = self._target(2)
        self._consume(bit, 1)
        return bit

    def finish(self) -> None:
        """Check that the stream held exactly the decoded symbols."""
        if self._position != len(self._data):
            raise SymbolCountError(
                f"decoded symbols account for {self._position} of {len(self._data)} bytes"
            )


################################################################################
# Symbol sequences
################################################################################


def rc_encode(symbols: Iterable[int], spec: ModelSpec) -> bytes:
    model = spec.create()
    encoder = RangeEncoder()
    for symbol in symbols:
        if not 0 <= symbol < spec.alphabet_size:
            raise ConfigError(
                f"symbol {symbol} is outside the alphabet [0, {spec.alphabet_size})"
            )
        encoder.encode_symbol(model, symbol)
    return encoder.finish()


def rc_decode(data: bytes, n: int, spec: ModelSpec) -> List[int]:
    model = spec.create()
    decoder = RangeDecoder(data)
    symbols = [decoder.decode_symbol(model) for _ in range(n)]
    decoder.finish()
    return symbols
