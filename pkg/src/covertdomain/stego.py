"""Sender and receiver endpoints: LSB-plane matrix embedding and extraction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from covertdomain.gf2 import (
    GENERAL,
    BitMatrix,
    DimensionError,
    HidingKey,
    generate_matrix,
    mul_vector,
    mul_vectors,
    solve_syndrome,
)
from covertdomain.image import GrayImage


class CapacityError(ValueError):
    """Payload longer than the number of cover pixels."""


@dataclass(frozen=True, eq=False)
class Payload:
    """Secret bit vector of length k."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits).reshape(-1)
        if bits.size < 1:
            raise ValueError("payload must hold at least one bit")
        if not np.all((bits == 0) | (bits == 1)):
            raise ValueError("payload bits must be 0 or 1")
        bits = bits.astype(np.uint8)
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def k(self) -> int:
        return self.bits.size

    def __len__(self) -> int:
        return self.k

    def __eq__(self, other) -> bool:
        if not isinstance(other, Payload):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash(self.bits.tobytes())

    def __xor__(self, other: Payload) -> Payload:
        if self.k != other.k:
            raise DimensionError(f"payload lengths differ: {self.k} vs {other.k}")
        return Payload(self.bits ^ other.bits)

    @classmethod
    def random(cls, rng: np.random.Generator, k: int) -> Payload:
        return cls(rng.integers(0, 2, size=k, dtype=np.uint8))

    @classmethod
    def from_bytes(cls, data: bytes, k: int) -> Payload:
        """Unpack the first ``k`` bits of ``data`` (MSB first)."""
        if k < 1 or len(data) * 8 < k:
            raise ValueError(f"{len(data)} bytes cannot hold {k} bits")
        return cls(np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="big")[:k])

    def to_bytes(self) -> bytes:
        return np.packbits(self.bits, bitorder="big").tobytes()

    def __repr__(self) -> str:
        if self.k <= 32:
            return f"Payload({''.join(map(str, self.bits.tolist()))})"
        return f"Payload(<{self.k} bits>)"


def extract_lsb_plane(img: GrayImage) -> BitMatrix:
    """LSB plane with the raster's shape: entry (row, col) = pixel mod 2."""
    return BitMatrix.from_bits(img.pixels & 1)


def replace_lsb_plane(img: GrayImage, plane: BitMatrix) -> GrayImage:
    if plane.shape != img.shape:
        raise DimensionError(f"plane {plane.shape} does not match image {img.shape}")
    return GrayImage((img.pixels & 0xFE) | plane.to_bits())


def flatten(plane: BitMatrix) -> np.ndarray:
    """Cascade the rows of ``plane`` into one vector (row-major)."""
    return plane.to_bits().reshape(-1)


def unflatten(bits, rows: int, cols: int) -> BitMatrix:
    bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
    if bits.size != rows * cols:
        raise DimensionError(f"{bits.size} bits cannot fill a {rows}x{cols} plane")
    return BitMatrix.from_bits(bits.reshape(rows, cols))


def _lsb_vector(img: GrayImage) -> np.ndarray:
    # same as flatten(extract_lsb_plane(img)) without the pack/unpack round trip
    return (img.pixels & 1).reshape(-1)


def _check_capacity(k: int, img: GrayImage) -> None:
    if k > img.size:
        raise CapacityError(f"payload of {k} bits exceeds cover capacity {img.size}")


def embed(
    cover: GrayImage,
    m: Payload,
    key: HidingKey,
    minimize: bool = False,
    mode: str = GENERAL,
) -> GrayImage:
    """Hide ``m`` so that H · lsb(stego) = m, flipping as few LSBs as the solver finds."""
    return embed_many([cover], [m], key, minimize=minimize, mode=mode)[0]


def embed_many(
    covers: Sequence[GrayImage],
    payloads: Sequence[Payload],
    key: HidingKey,
    minimize: bool = False,
    mode: str = GENERAL,
) -> list[GrayImage]:
    """Embed several equal-length payloads into equal-size covers under one H.

    The cover syndromes are computed in a single pass over H, which
    dominates the cost for large covers.
    """
    if len(covers) != len(payloads) or not covers:
        raise ValueError("need the same, non-zero number of covers and payloads")
    shape, k = covers[0].shape, payloads[0].k
    if any(c.shape != shape for c in covers) or any(m.k != k for m in payloads):
        raise DimensionError("covers must share dimensions and payloads must share length")
    _check_capacity(k, covers[0])
    H = generate_matrix(key, k, covers[0].size, mode)
    syndromes = mul_vectors(H, np.stack([_lsb_vector(c) for c in covers]))
    stegos = []
    for cover, m, current in zip(covers, payloads, syndromes):
        flips = solve_syndrome(H, m.bits ^ current, minimize=minimize)
        stegos.append(GrayImage(cover.pixels ^ flips.reshape(shape)))
    return stegos


def extract(stego: GrayImage, key: HidingKey, k: int, mode: str = GENERAL) -> Payload:
    _check_capacity(k, stego)
    H = generate_matrix(key, k, stego.size, mode)
    return Payload(mul_vector(H, _lsb_vector(stego)))


def extract_with_matrix(stego: GrayImage, H: BitMatrix) -> Payload:
    """Syndrome of the stego's LSBs under an arbitrary matrix (e.g. a guessed one)."""
    if H.cols != stego.size:
        raise DimensionError(f"matrix has {H.cols} columns, image has {stego.size} pixels")
    return Payload(mul_vector(H, _lsb_vector(stego)))
