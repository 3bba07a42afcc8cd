import numpy as np
import pytest
from pytest_benchmark.fixture import BenchmarkFixture

from spikecodec.errors import ConfigError, CorruptStreamError, SymbolCountError
from spikecodec.rangecoder import (
    BinaryModel,
    ModelSpec,
    RangeDecoder,
    RangeEncoder,
    rc_decode,
    rc_encode,
)

BYTES = ModelSpec(alphabet_size=256)


def test_empty_sequence() -> None:
    data = rc_encode([], BYTES)
    assert rc_decode(data, 0, BYTES) == []


def test_repeated_symbol_is_nearly_free() -> None:
    symbols = [7] * 100_000
    data = rc_encode(symbols, BYTES)
    assert 8 * len(data) < 0.02 * len(symbols) + 64
    assert rc_decode(data, len(symbols), BYTES) == symbols


def test_random_sequences_round_trip() -> None:
    rng = np.random.default_rng(11)
    for _ in range(1_000):
        size = int(rng.integers(1, 300))
        spec = ModelSpec(alphabet_size=size)
        length = int(rng.integers(0, 200))
        symbols = rng.integers(0, size, length).tolist()
        assert rc_decode(rc_encode(symbols, spec), length, spec) == symbols


def test_skewed_sequence_beats_fixed_length() -> None:
    rng = np.random.default_rng(3)
    symbols = rng.choice(256, 20_000, p=np.r_[0.9, np.full(255, 0.1 / 255)]).tolist()
    data = rc_encode(symbols, BYTES)
    assert len(data) < len(symbols) // 2
    assert rc_decode(data, len(symbols), BYTES) == symbols


def test_truncated_stream() -> None:
    data = rc_encode([1, 2, 3, 4] * 50, BYTES)
    with pytest.raises(CorruptStreamError):
        rc_decode(data[:-1], 200, BYTES)


def test_trailing_bytes() -> None:
    data = rc_encode([1, 2, 3, 4] * 50, BYTES)
    with pytest.raises(SymbolCountError):
        rc_decode(data + b"\x00", 200, BYTES)


def test_symbol_outside_alphabet() -> None:
    with pytest.raises(ConfigError):
        rc_encode([4], ModelSpec(alphabet_size=4))


def test_model_spec_validation() -> None:
    with pytest.raises(ConfigError):
        ModelSpec(alphabet_size=0)
    with pytest.raises(ConfigError):
        ModelSpec(alphabet_size=4, limit=1 << 17)
    with pytest.raises(ConfigError):
        ModelSpec(alphabet_size=100, limit=64)
    with pytest.raises(ConfigError):
        ModelSpec(alphabet_size=4, increment=0)
    assert ModelSpec.from_dict({"alphabet_size": 9}) == ModelSpec(alphabet_size=9)


def test_frequency_model_lookup_is_consistent() -> None:
    model = ModelSpec(alphabet_size=37, increment=5, limit=512).create()
    rng = np.random.default_rng(0)
    for symbol in rng.integers(0, 37, 500).tolist():
        model.update(symbol)
        assert model.total == sum(model.frequency(s) for s in range(37))
        assert model.total <= 512
        for s in range(37):
            low = model.cumulative(s)
            assert model.find(low) == s
            assert model.find(low + model.frequency(s) - 1) == s


def test_binary_models_and_bypass_bits() -> None:
    rng = np.random.default_rng(8)
    bits = (rng.random(5_000) < 0.05).astype(int).tolist()
    raw = rng.integers(0, 2, 500).tolist()

    encoder = RangeEncoder()
    model = BinaryModel()
    for bit in bits:
        encoder.encode_bit(model, bit)
    for bit in raw:
        encoder.encode_bypass(bit)
    data = encoder.finish()
    # Roughly H(0.05) = 0.29 bits per modelled bit plus one per bypass bit.
    assert 8 * len(data) < 0.4 * len(bits) + len(raw) + 64

    decoder = RangeDecoder(data)
    model = BinaryModel()
    assert [decoder.decode_bit(model) for _ in bits] == bits
    assert [decoder.decode_bypass() for _ in raw] == raw
    decoder.finish()


def test_binary_model_stays_inside_the_unit_interval() -> None:
    model = BinaryModel()
    for _ in range(1_000):
        model.update(1)
    assert 0 < model.p1 < 1 << 16
    for _ in range(1_000):
        model.update(0)
    assert 0 < model.p1 < 1 << 16


def test_encode_random_symbols(benchmark: BenchmarkFixture) -> None:
    symbols = np.random.default_rng(1).integers(0, 256, 20_000).tolist()
    data = benchmark(rc_encode, symbols, BYTES)
    assert rc_decode(data, len(symbols), BYTES) == symbols
