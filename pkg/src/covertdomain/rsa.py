"""Textbook RSA-256 used only as a timing baseline.

Deliberately insecure: fixed primes, no padding, deterministic output.
Modular exponentiation is square-and-multiply over 32-bit limbs with
Montgomery multiplication; Python integers are used only for the one-off
Montgomery constants and for converting to and from limbs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LIMB_BITS = 32
_LIMB_MASK = (1 << LIMB_BITS) - 1


@dataclass(frozen=True)
class RsaParams:
    p: int
    q: int
    e: int
    d: int
    block_bits: int = 128

    @property
    def n(self) -> int:
        return self.p * self.q


PINNED = RsaParams(
    p=0xC3F8658B8B0B26CD7852AB3583FE8971,
    q=0xE36434236581BDACC3B4FB15DE04936D,
    e=65537,
    d=0x3F28A2DF3E979D85FC1FFD2E56148B7D93762CEB25A5CCC0B3284F413C37FB1,
)


def _to_limbs(x: int, s: int) -> list[int]:
    return [(x >> (LIMB_BITS * i)) & _LIMB_MASK for i in range(s)]


def _from_limbs(limbs: list[int]) -> int:
    x = 0
    for limb in reversed(limbs):
        x = (x << LIMB_BITS) | limb
    return x


def _geq(a: list[int], b: list[int]) -> bool:
    for x, y in zip(reversed(a), reversed(b)):
        if x != y:
            return x > y
    return True


def _sub(a: list[int], b: list[int]) -> list[int]:
    out = []
    borrow = 0
    for x, y in zip(a, b):
        d = x - y - borrow
        borrow = 1 if d < 0 else 0
        out.append(d & _LIMB_MASK)
    return out


class _Montgomery:
    def __init__(self, modulus: int):
        self.s = s = (modulus.bit_length() + LIMB_BITS - 1) // LIMB_BITS
        self.n = _to_limbs(modulus, s)
        self.n0inv = (-pow(modulus, -1, 1 << LIMB_BITS)) & _LIMB_MASK
        radix = 1 << (LIMB_BITS * s)
        self.one = _to_limbs(radix % modulus, s)
        self.r2 = _to_limbs(radix * radix % modulus, s)

    def mul(self, a: list[int], b: list[int]) -> list[int]:
        """a * b / R mod n (coarsely integrated operand scanning)."""
        s, n, n0inv = self.s, self.n, self.n0inv
        t = [0] * (s + 2)
        for i in range(s):
            bi = b[i]
            carry = 0
            for j in range(s):
                v = t[j] + a[j] * bi + carry
                t[j] = v & _LIMB_MASK
                carry = v >> LIMB_BITS
            v = t[s] + carry
            t[s] = v & _LIMB_MASK
            t[s + 1] = v >> LIMB_BITS
            m = (t[0] * n0inv) & _LIMB_MASK
            carry = (t[0] + m * n[0]) >> LIMB_BITS
            for j in range(1, s):
                v = t[j] + m * n[j] + carry
                t[j - 1] = v & _LIMB_MASK
                carry = v >> LIMB_BITS
            v = t[s] + carry
            t[s - 1] = v & _LIMB_MASK
            t[s] = t[s + 1] + (v >> LIMB_BITS)
        out = t[:s]
        if t[s] or _geq(out, n):
            out = _sub(out, n)
        return out


def modexp(base: int, exp: int, modulus: int) -> int:
    """base ** exp mod modulus by left-to-right square-and-multiply."""
    if modulus < 2:
        raise ValueError("modulus must be at least 2")
    if exp < 0:
        raise ValueError("exponent must be non-negative")
    base %= modulus
    if modulus % 2 == 0:
        # Montgomery needs an odd modulus; even moduli never occur in RSA
        result = 1
        for bit in bin(exp)[2:]:
            result = result * result % modulus
            if bit == "1":
                result = result * base % modulus
        return result % modulus
    mont = _Montgomery(modulus)
    b = mont.mul(_to_limbs(base, mont.s), mont.r2)
    x = mont.one
    for bit in bin(exp)[2:]:
        x = mont.mul(x, x)
        if bit == "1":
            x = mont.mul(x, b)
    return _from_limbs(mont.mul(x, _to_limbs(1, mont.s)))


def to_blocks(bits, block_bits: int = 128) -> list[int]:
    """Split a bit vector into big-endian integers, zero-padding the last block."""
    bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
    if bits.size == 0:
        raise ValueError("payload must be non-empty")
    nblocks = -(-bits.size // block_bits)
    padded = np.zeros(nblocks * block_bits, dtype=np.uint8)
    padded[: bits.size] = bits
    return [int.from_bytes(np.packbits(chunk).tobytes(), "big") for chunk in padded.reshape(nblocks, block_bits)]


def rsa_encrypt(payload_bits, params: RsaParams = PINNED) -> list[int]:
    n = params.n
    return [modexp(block, params.e, n) for block in to_blocks(payload_bits, params.block_bits)]


def rsa_decrypt(blocks: list[int], params: RsaParams = PINNED) -> list[int]:
    n = params.n
    return [modexp(c, params.d, n) for c in blocks]
