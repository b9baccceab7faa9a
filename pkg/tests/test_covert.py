import inspect

import numpy as np
import pytest

from covertdomain import covert
from covertdomain.covert import (
    Case,
    ContainerError,
    CovertResult,
    Semantics,
    covert_add,
    covert_inner,
    covert_outer,
    recover_add,
    recover_inner,
    recover_outer,
)
from covertdomain.gf2 import PERMUTATION, BitMatrix, DimensionError, HidingKey
from covertdomain.image import GrayImage, synth_cover
from covertdomain.stego import Payload, embed

KEY = HidingKey(b"covert-tests")


def _pair(k, w, h, seed, mode="general"):
    rng = np.random.default_rng(seed)
    m1, m2 = Payload.random(rng, k), Payload.random(rng, k)
    Y1 = embed(synth_cover(seed, w, h), m1, KEY, mode=mode)
    Y2 = embed(synth_cover(seed + 1, w, h), m2, KEY, mode=mode)
    return m1, m2, Y1, Y2


def test_add_lsb_example():
    Y1 = GrayImage([[4, 7], [9, 10]])
    Y2 = GrayImage([[5, 7], [8, 10]])
    res = covert_add(Y1, Y2)
    assert (res.carrier.pixels & 1).tolist() == [[1, 0], [1, 0]]
    # upper bits follow the first operand
    assert np.array_equal(res.carrier.pixels >> 1, Y1.pixels >> 1)


@pytest.mark.parametrize("seed", range(5))
def test_add_recovers_xor(seed):
    m1, m2, Y1, Y2 = _pair(200, 32, 24, seed)
    assert recover_add(covert_add(Y1, Y2), KEY, 200) == m1 ^ m2


@pytest.mark.parametrize("seed", range(5))
def test_outer_recovers_product(seed):
    m1, m2, Y1, Y2 = _pair(8, 12, 10, seed)
    res = covert_outer(Y1, Y2)
    assert res.carrier.shape == (120, 120)
    got = recover_outer(res, KEY, 8).to_bits()
    assert np.array_equal(got, np.outer(m1.bits, m2.bits))


def test_outer_carrier_is_product_of_lsbs():
    Y1 = GrayImage([[1, 2], [3, 4]])
    Y2 = GrayImage([[1, 1], [0, 0]])
    c = covert_outer(Y1, Y2).carrier.to_bits()
    assert np.array_equal(c, np.outer([1, 0, 1, 0], [1, 1, 0, 0]))


def test_outer_cap():
    Y = synth_cover(0, 100, 100)
    with pytest.raises(ValueError, match="cap"):
        covert_outer(Y, Y)


@pytest.mark.parametrize("seed", range(5))
def test_inner_recovers_dot(seed):
    m1, m2, Y1, Y2 = _pair(256, 16, 16, seed, mode=PERMUTATION)
    dot = int(np.dot(m1.bits.astype(int), m2.bits))
    assert recover_inner(covert_inner(Y1, Y2, Semantics.GF2)) == dot % 2
    assert recover_inner(covert_inner(Y1, Y2, Semantics.INTEGER)) == dot


def test_inner_example():
    Y1, Y2 = GrayImage([[1, 1, 1]]), GrayImage([[1, 1, 0]])
    assert covert_inner(Y1, Y2, Semantics.INTEGER).carrier == 2
    assert covert_inner(Y1, Y2).carrier == 0


def test_shape_mismatch():
    with pytest.raises(DimensionError):
        covert_add(GrayImage([[1, 2]]), GrayImage([[1], [2]]))


def test_wrong_case_rejected():
    res = covert_inner(GrayImage([[1]]), GrayImage([[1]]))
    with pytest.raises(ValueError):
        recover_add(res, KEY, 1)


def test_server_functions_take_no_key():
    for fn in (covert_add, covert_outer, covert_inner):
        params = inspect.signature(fn).parameters
        assert not any("key" in name for name in params)
        assert not any(p.annotation in (HidingKey, "HidingKey") for p in params.values())
    # nor does the module reach for key material
    assert "generate_matrix" not in inspect.getsource(covert_add)


class TestContainer:
    @pytest.mark.parametrize(
        "res",
        [
            CovertResult(Case.ADD, synth_cover(0, 5, 3)),
            CovertResult(Case.OUTER, BitMatrix.from_bits(np.eye(9, dtype=np.uint8))),
            CovertResult(Case.INNER, 12345, Semantics.INTEGER),
            CovertResult(Case.INNER, 1, Semantics.GF2),
        ],
    )
    def test_round_trip(self, res):
        back = CovertResult.from_bytes(res.to_bytes())
        assert back.case is res.case and back.semantics is res.semantics
        assert back.carrier == res.carrier

    def test_header_layout(self):
        data = CovertResult(Case.INNER, 7, Semantics.INTEGER).to_bytes()
        assert data == b"DCCD\x01\x03\x01" + b"\x00\x00\x00\x01" * 2 + (7).to_bytes(8, "big")

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda d: d[:5],
            lambda d: b"XXXX" + d[4:],
            lambda d: d[:4] + b"\x09" + d[5:],
            lambda d: d[:5] + b"\x07" + d[6:],
            lambda d: d[:-1],
        ],
    )
    def test_corrupt(self, mutate):
        data = CovertResult(Case.INNER, 7).to_bytes()
        with pytest.raises(ContainerError):
            CovertResult.from_bytes(mutate(data))

    def test_add_dims_must_match(self):
        data = bytearray(CovertResult(Case.ADD, synth_cover(0, 5, 3)).to_bytes())
        data[10] = 9
        with pytest.raises(ContainerError):
            CovertResult.from_bytes(bytes(data))

    def test_outer_truncated(self):
        data = CovertResult(Case.OUTER, BitMatrix.identity(9)).to_bytes()
        with pytest.raises(ContainerError):
            CovertResult.from_bytes(data[:-1])


def test_module_has_no_key_imports_in_server_path():
    src = inspect.getsource(covert.covert_outer) + inspect.getsource(covert.covert_inner)
    assert "key" not in src.lower()
