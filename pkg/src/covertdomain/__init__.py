"""Computing on data hidden in image LSB planes via GF(2) matrix embedding."""

from covertdomain.covert import (
    Case,
    CovertResult,
    Semantics,
    covert_add,
    covert_inner,
    covert_outer,
    recover_add,
    recover_inner,
    recover_outer,
)
from covertdomain.gf2 import (
    BitMatrix,
    HidingKey,
    generate_matrix,
    matmul,
    rank,
    solve_syndrome,
    solve_syndrome_batch,
    xor,
)
from covertdomain.image import GrayImage, read_pgm, synth_cover, write_pgm
from covertdomain.stego import Payload, embed, embed_many, extract

__all__ = [
    "BitMatrix",
    "Case",
    "CovertResult",
    "GrayImage",
    "HidingKey",
    "Payload",
    "Semantics",
    "covert_add",
    "covert_inner",
    "covert_outer",
    "embed",
    "embed_many",
    "extract",
    "generate_matrix",
    "matmul",
    "rank",
    "read_pgm",
    "recover_add",
    "recover_inner",
    "recover_outer",
    "solve_syndrome",
    "solve_syndrome_batch",
    "synth_cover",
    "write_pgm",
    "xor",
]
