"""Server-side computation on stego images and receiver-side recovery.

None of the ``covert_*`` functions take a key: the server only ever sees
stego images.  The receiver holds the key and turns the server's output
into the plaintext result.

Case INNER needs H^T H = I, which holds for the permutation matrices produced
by ``generate_matrix(..., mode="permutation")``.  With such an H the inner
product of the LSB vectors *is* the plaintext result, so the server learns
it; payload blinding is not provided.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from typing import Union

import numpy as np

from covertdomain.gf2 import (
    BitMatrix,
    DimensionError,
    HidingKey,
    generate_matrix,
    matmul,
    mul_vector,
)
from covertdomain.image import GrayImage, PGMFormatError, read_pgm, write_pgm
from covertdomain.stego import Payload, _lsb_vector, extract_lsb_plane, replace_lsb_plane

MAGIC = b"DCCD"
VERSION = 1
DEFAULT_OUTER_CAP = 8192

_HEADER = struct.Struct(">4sBBBII")


class Case(enum.IntEnum):
    ADD = 1
    OUTER = 2
    INNER = 3


class Semantics(enum.IntEnum):
    GF2 = 0
    INTEGER = 1


class ContainerError(ValueError):
    pass


@dataclass(frozen=True)
class CovertResult:
    """What the server returns: an image (ADD), a packed matrix (OUTER) or a scalar (INNER)."""

    case: Case
    carrier: Union[GrayImage, BitMatrix, int]
    semantics: Semantics = Semantics.GF2

    @property
    def dims(self) -> tuple[int, int]:
        if self.case is Case.ADD:
            return self.carrier.height, self.carrier.width
        if self.case is Case.OUTER:
            return self.carrier.shape
        return 1, 1

    def to_bytes(self) -> bytes:
        rows, cols = self.dims
        head = _HEADER.pack(MAGIC, VERSION, int(self.case), int(self.semantics), rows, cols)
        if self.case is Case.ADD:
            body = write_pgm(self.carrier)
        elif self.case is Case.OUTER:
            body = self.carrier.to_bytes()
        else:
            body = struct.pack(">Q", self.carrier)
        return head + body

    @classmethod
    def from_bytes(cls, data: bytes) -> CovertResult:
        if len(data) < _HEADER.size:
            raise ContainerError("truncated container header")
        magic, version, case, semantics, rows, cols = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise ContainerError(f"bad magic {magic!r}")
        if version != VERSION:
            raise ContainerError(f"unsupported container version {version}")
        try:
            case = Case(case)
            semantics = Semantics(semantics)
        except ValueError as exc:
            raise ContainerError(str(exc)) from exc
        body = data[_HEADER.size :]
        if case is Case.ADD:
            try:
                img = read_pgm(body)
            except PGMFormatError as exc:
                raise ContainerError(f"embedded image: {exc}") from exc
            if img.shape != (rows, cols):
                raise ContainerError("embedded image does not match header dimensions")
            return cls(case, img, semantics)
        if case is Case.OUTER:
            try:
                return cls(case, BitMatrix.from_bytes(body, rows, cols), semantics)
            except ValueError as exc:
                raise ContainerError(str(exc)) from exc
        if len(body) != 8:
            raise ContainerError("INNER payload must be an 8-byte count")
        return cls(case, struct.unpack(">Q", body)[0], semantics)


def _require_same_shape(Y1: GrayImage, Y2: GrayImage) -> None:
    if Y1.shape != Y2.shape:
        raise DimensionError(f"stego images differ in size: {Y1.shape} vs {Y2.shape}")


def _require_case(res: CovertResult, case: Case) -> None:
    if res.case is not case:
        raise ValueError(f"expected a {case.name} result, got {res.case.name}")


def covert_add(Y1: GrayImage, Y2: GrayImage) -> CovertResult:
    """Y' = Y1 with its LSB plane replaced by lsb(Y1) XOR lsb(Y2)."""
    _require_same_shape(Y1, Y2)
    plane = extract_lsb_plane(Y1) ^ extract_lsb_plane(Y2)
    return CovertResult(Case.ADD, replace_lsb_plane(Y1, plane))


def recover_add(res: CovertResult, key: HidingKey, k: int) -> Payload:
    _require_case(res, Case.ADD)
    img = res.carrier
    H = generate_matrix(key, k, img.size)
    return Payload(mul_vector(H, _lsb_vector(img)))


def covert_outer(Y1: GrayImage, Y2: GrayImage, cap: int = DEFAULT_OUTER_CAP) -> CovertResult:
    """Outer product c1 c2^T of the flattened LSB vectors (wr x wr bits)."""
    _require_same_shape(Y1, Y2)
    n = Y1.size
    if n > cap:
        raise ValueError(f"outer product of {n}-pixel images ({n}x{n} bits) exceeds cap {cap}")
    c1 = BitMatrix.column(_lsb_vector(Y1))
    c2 = BitMatrix.row(_lsb_vector(Y2))
    return CovertResult(Case.OUTER, matmul(c1, c2))


def recover_outer(res: CovertResult, key: HidingKey, k: int) -> BitMatrix:
    """H c' H^T, equal to m1 m2^T."""
    _require_case(res, Case.OUTER)
    carrier = res.carrier
    if carrier.rows != carrier.cols:
        raise DimensionError(f"OUTER carrier must be square, got {carrier.shape}")
    H = generate_matrix(key, k, carrier.rows)
    return matmul(matmul(H, carrier), H.T)


def covert_inner(Y1: GrayImage, Y2: GrayImage, semantics: Semantics = Semantics.GF2) -> CovertResult:
    _require_same_shape(Y1, Y2)
    semantics = Semantics(semantics)
    count = int(np.count_nonzero(_lsb_vector(Y1) & _lsb_vector(Y2)))
    value = count & 1 if semantics is Semantics.GF2 else count
    return CovertResult(Case.INNER, value, semantics)


def recover_inner(res: CovertResult) -> int:
    _require_case(res, Case.INNER)
    return int(res.carrier)
