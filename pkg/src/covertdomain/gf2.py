"""Bit-packed matrices over GF(2), keyed matrix generation and syndrome solving.

Entries are stored row-major in uint64 words, most-significant bit first;
padding bits past ``cols`` in the last word of every row are kept at zero.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from numba import njit, uint64

from covertdomain._prng import MASK64, Xoshiro256, fnv1a64, random_rows

GENERAL = "general"
PERMUTATION = "permutation"

# Brute-force coset search enumerates 2**(n - rank) vectors.
MAX_MINIMIZE_COLS = 24
_MAX_REPAIR_ATTEMPTS = 10_000


class DimensionError(ValueError):
    """Operand shapes do not conform."""


class InfeasibleSystemError(ValueError):
    """H e = s has no solution (H is not of full row rank)."""


def _nwords(cols: int) -> int:
    return (cols + 63) // 64


@njit(cache=True)
def _pack(bits, out):
    rows, cols = bits.shape
    nw = out.shape[1]
    for i in range(rows):
        for w in range(nw):
            lo = w * 64
            hi = min(lo + 64, cols)
            acc = uint64(0)
            for j in range(lo, hi):
                acc = (acc << uint64(1)) | uint64(bits[i, j] != 0)
            out[i, w] = acc << uint64(64 - (hi - lo))


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a 2-D 0/1 array into uint64 words (MSB first, rows padded)."""
    bits = np.ascontiguousarray(bits, dtype=np.uint8)
    rows, cols = bits.shape
    out = np.zeros((rows, _nwords(cols)), dtype=np.uint64)
    _pack(bits, out)
    return out


def unpack_bits(words: np.ndarray, cols: int) -> np.ndarray:
    raw = np.ascontiguousarray(words.astype(">u8")).view(np.uint8)
    return np.unpackbits(raw, axis=1, bitorder="big")[:, :cols]


def _tail_mask(cols: int) -> np.uint64:
    tail = cols & 63
    if tail == 0:
        return np.uint64(0)
    return np.uint64(MASK64 >> tail)


class BitMatrix:
    """Immutable dense matrix over GF(2)."""

    __slots__ = ("rows", "cols", "_words", "_solver")

    def __init__(self, rows: int, cols: int, words: np.ndarray, *, copy: bool = True):
        if rows < 1 or cols < 1:
            raise DimensionError(f"matrix dimensions must be positive, got {rows}x{cols}")
        words = np.asarray(words, dtype=np.uint64)
        if words.shape != (rows, _nwords(cols)):
            raise DimensionError(
                f"word array shape {words.shape} does not match {rows}x{cols}"
            )
        if np.any(words[:, -1] & _tail_mask(cols)):
            raise ValueError("padding bits beyond cols must be zero")
        if copy and words.flags.writeable:
            words = words.copy()
        words.setflags(write=False)
        self.rows = rows
        self.cols = cols
        self._words = words
        self._solver = None

    @classmethod
    def from_bits(cls, bits) -> BitMatrix:
        arr = np.asarray(bits)
        if arr.ndim != 2:
            raise DimensionError("from_bits expects a 2-D array")
        if arr.size and not np.all((arr == 0) | (arr == 1)):
            raise ValueError("entries must be 0 or 1")
        return cls(arr.shape[0], arr.shape[1], pack_bits(arr))

    @classmethod
    def column(cls, bits) -> BitMatrix:
        return cls.from_bits(np.asarray(bits).reshape(-1, 1))

    @classmethod
    def row(cls, bits) -> BitMatrix:
        return cls.from_bits(np.asarray(bits).reshape(1, -1))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> BitMatrix:
        return cls(rows, cols, np.zeros((rows, _nwords(cols)), dtype=np.uint64))

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls(n, n, _identity_words(n))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def words(self) -> np.ndarray:
        return self._words

    def to_bits(self) -> np.ndarray:
        return unpack_bits(self._words, self.cols)

    def __getitem__(self, index: tuple[int, int]) -> int:
        i, j = index
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(index)
        return int(self._words[i, j >> 6] >> np.uint64(63 - (j & 63))) & 1

    @property
    def T(self) -> BitMatrix:
        return transpose(self)

    def weight(self) -> int:
        return int(np.bitwise_count(self._words).sum())

    def __matmul__(self, other: BitMatrix) -> BitMatrix:
        return matmul(self, other)

    def __xor__(self, other: BitMatrix) -> BitMatrix:
        return xor(self, other)

    def __add__(self, other: BitMatrix) -> BitMatrix:
        return xor(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._words, other._words)

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._words.tobytes()))

    def __repr__(self) -> str:
        if self.rows * self.cols <= 64:
            return f"BitMatrix({self.to_bits().tolist()})"
        return f"BitMatrix(<{self.rows}x{self.cols}>)"

    def to_bytes(self) -> bytes:
        """Row-major bytes, each row padded to a byte boundary, MSB first."""
        raw = np.ascontiguousarray(self._words.astype(">u8")).view(np.uint8)
        return raw[:, : (self.cols + 7) // 8].tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, rows: int, cols: int) -> BitMatrix:
        row_bytes = (cols + 7) // 8
        if len(data) != rows * row_bytes:
            raise ValueError(
                f"expected {rows * row_bytes} bytes for a {rows}x{cols} matrix, got {len(data)}"
            )
        buf = np.zeros((rows, _nwords(cols) * 8), dtype=np.uint8)
        buf[:, :row_bytes] = np.frombuffer(data, dtype=np.uint8).reshape(rows, row_bytes)
        return cls(rows, cols, buf.view(">u8").astype(np.uint64))


@dataclass(frozen=True)
class HidingKey:
    """Secret shared by sender and receiver; it alone determines H."""

    key_bytes: bytes

    def __post_init__(self):
        if not isinstance(self.key_bytes, (bytes, bytearray)) or len(self.key_bytes) < 1:
            raise ValueError("hiding key must be a non-empty byte string")
        object.__setattr__(self, "key_bytes", bytes(self.key_bytes))

    @classmethod
    def from_text(cls, text: str) -> HidingKey:
        return cls(text.encode("utf-8"))

    @property
    def seed(self) -> int:
        return fnv1a64(self.key_bytes)

    def __repr__(self) -> str:
        return f"HidingKey(<{len(self.key_bytes)} bytes>)"


def _identity_words(n: int) -> np.ndarray:
    words = np.zeros((n, _nwords(n)), dtype=np.uint64)
    idx = np.arange(n)
    words[idx, idx >> 6] = np.left_shift(np.uint64(1), (63 - (idx & 63)).astype(np.uint64))
    return words


@njit(cache=True)
def _parity(x):
    x ^= x >> uint64(32)
    x ^= x >> uint64(16)
    x ^= x >> uint64(8)
    x ^= x >> uint64(4)
    x ^= x >> uint64(2)
    x ^= x >> uint64(1)
    return x & uint64(1)


@njit(cache=True)
def _matvec(A, x):
    rows, nw = A.shape
    out = np.empty(rows, dtype=np.uint8)
    for i in range(rows):
        acc = uint64(0)
        for q in range(nw):
            acc ^= A[i, q] & x[q]
        out[i] = np.uint8(_parity(acc))
    return out


@njit(cache=True)
def _matvecs(A, X):
    # each row of A is read from memory once and reused from cache for every vector
    rows, nw = A.shape
    nvec = X.shape[0]
    out = np.empty((nvec, rows), dtype=np.uint8)
    for i in range(rows):
        for v in range(nvec):
            acc = uint64(0)
            for q in range(nw):
                acc ^= A[i, q] & X[v, q]
            out[v, i] = np.uint8(_parity(acc))
    return out


@njit(cache=True)
def _mul_rows(A, acols, B, out):
    # out_i = XOR of the rows of B selected by the set bits of A_i
    nb = B.shape[1]
    for i in range(A.shape[0]):
        for t in range(acols):
            if (A[i, t >> 6] >> uint64(63 - (t & 63))) & uint64(1):
                for q in range(nb):
                    out[i, q] ^= B[t, q]


@njit(cache=True)
def _mul_abt(A, Bt, out):
    # out(i, j) = <A_i, Bt_j> over GF(2)
    nw = A.shape[1]
    for i in range(A.shape[0]):
        for j in range(Bt.shape[0]):
            acc = uint64(0)
            for q in range(nw):
                acc ^= A[i, q] & Bt[j, q]
            if _parity(acc):
                out[i, j >> 6] |= uint64(1) << uint64(63 - (j & 63))


@njit(cache=True)
def _rref(A, ncols):
    """Reduce A in place to reduced row-echelon form on its first ``ncols`` bits.

    Row operations span the full word width, so any augmented block stored
    after the searched columns is transformed alongside.  Returns the pivot
    columns in order.
    """
    rows, nw = A.shape
    pivots = np.empty(min(rows, ncols), dtype=np.int64)
    r = 0
    for c in range(ncols):
        if r == rows:
            break
        w = c >> 6
        mask = uint64(1) << uint64(63 - (c & 63))
        p = -1
        for i in range(r, rows):
            if A[i, w] & mask:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for q in range(nw):
                tmp = A[r, q]
                A[r, q] = A[p, q]
                A[p, q] = tmp
        # pivot row is zero left of c, so words before w need no update
        for i in range(rows):
            if i != r and (A[i, w] & mask):
                for q in range(w, nw):
                    A[i, q] ^= A[r, q]
        pivots[r] = c
        r += 1
    return pivots[:r]


@njit(cache=True)
def _popcount(x):
    x = x - ((x >> uint64(1)) & uint64(0x5555555555555555))
    x = (x & uint64(0x3333333333333333)) + ((x >> uint64(2)) & uint64(0x3333333333333333))
    x = (x + (x >> uint64(4))) & uint64(0x0F0F0F0F0F0F0F0F)
    return (x * uint64(0x0101010101010101)) >> uint64(56)


@njit(cache=True)
def _solve_narrow(Hw, S, n, minimize, E, ok):
    """Solve H_t e = s_t for a batch of matrices whose rows fit in one word.

    Hw[t, i] is row i of matrix t.  The solution matches the wide solver:
    free variables zero, or with ``minimize`` the first minimum-weight
    coset member in the order particular ^ (subset of null-space basis).
    Infeasible systems leave E[t] at zero and clear ok[t].
    """
    N, k = Hw.shape
    rows = np.empty(k, dtype=np.uint64)
    rhs = np.empty(k, dtype=np.uint8)
    piv = np.empty(k, dtype=np.int64)
    cum = np.empty(64, dtype=np.uint64)
    one = uint64(1)
    for t in range(N):
        for i in range(k):
            rows[i] = Hw[t, i]
            rhs[i] = S[t, i]
        r = 0
        for c in range(n):
            if r == k:
                break
            mask = one << uint64(63 - c)
            p = -1
            for i in range(r, k):
                if rows[i] & mask:
                    p = i
                    break
            if p < 0:
                continue
            tmp = rows[r]
            rows[r] = rows[p]
            rows[p] = tmp
            tb = rhs[r]
            rhs[r] = rhs[p]
            rhs[p] = tb
            for i in range(k):
                if i != r and (rows[i] & mask):
                    rows[i] ^= rows[r]
                    rhs[i] ^= rhs[r]
            piv[r] = c
            r += 1
        feasible = True
        for i in range(r, k):
            if rhs[i]:
                feasible = False
        ok[t] = feasible
        if not feasible:
            continue
        x = uint64(0)
        for i in range(r):
            if rhs[i]:
                x |= one << uint64(63 - piv[i])
        if minimize:
            # cum[j] = basis[0] ^ ... ^ basis[j]; going from i - 1 to i
            # toggles basis vectors 0..ctz(i), a single XOR with cum[ctz(i)]
            nf = 0
            pi = 0
            acc = uint64(0)
            for c in range(n):
                if pi < r and piv[pi] == c:
                    pi += 1
                    continue
                col = one << uint64(63 - c)
                b = col
                for i in range(r):
                    if rows[i] & col:
                        b |= one << uint64(63 - piv[i])
                acc ^= b
                cum[nf] = acc
                nf += 1
            best = x
            best_w = _popcount(x)
            cur = x
            for i in range(1, 1 << nf):
                tz = 0
                while not (i >> tz) & 1:
                    tz += 1
                cur ^= cum[tz]
                w = _popcount(cur)
                if w < best_w:
                    best = cur
                    best_w = w
            x = best
        for c in range(n):
            E[t, c] = (x >> uint64(63 - c)) & one


def _window_cols(rows: int, cols: int) -> int:
    # A random rows x (rows + 64) block is singular with probability ~2**-64.
    return min(cols, 64 * _nwords(rows + 64))


class _Solver:
    """RREF of H's leading columns plus the transform T with T·H = R."""

    def __init__(self, H: BitMatrix):
        k, n = H.shape
        width = _window_cols(k, n)
        while True:
            hw = _nwords(width)
            aug = np.hstack([H.words[:, :hw], _identity_words(k)])
            pivots = _rref(aug, width)
            if len(pivots) == k or width == n:
                break
            width = n
        self.k = k
        self.n = n
        self.rank = len(pivots)
        self.pivots = pivots
        self.transform = np.ascontiguousarray(aug[:, hw:])

    def particular(self, s: np.ndarray) -> np.ndarray:
        y = _matvec(self.transform, pack_bits(s.reshape(1, -1))[0])
        if np.any(y[self.rank :]):
            raise InfeasibleSystemError(
                f"syndrome not in the column space of H (rank {self.rank} < {self.k})"
            )
        e = np.zeros(self.n, dtype=np.uint8)
        e[self.pivots] = y[: self.rank]
        return e


def _solver_for(H: BitMatrix) -> _Solver:
    if H._solver is None:
        H._solver = _Solver(H)
    return H._solver


def matmul(A: BitMatrix, B: BitMatrix) -> BitMatrix:
    if A.cols != B.rows:
        raise DimensionError(f"cannot multiply {A.rows}x{A.cols} by {B.rows}x{B.cols}")
    if B.cols == 1:
        # a single column keeps its entries in the top bit of each word
        x = pack_bits((B.words[:, 0] >> np.uint64(63)).astype(np.uint8).reshape(1, -1))[0]
        return BitMatrix.column(_matvec(A.words, x))
    row_cost = A.rows * A.cols * _nwords(B.cols) // 2
    dot_cost = A.rows * B.cols * _nwords(A.cols) + B.rows * B.cols // 8
    out = np.zeros((A.rows, _nwords(B.cols)), dtype=np.uint64)
    if row_cost <= dot_cost:
        _mul_rows(A.words, A.cols, B.words, out)
    else:
        _mul_abt(A.words, transpose(B).words, out)
    return BitMatrix(A.rows, B.cols, out, copy=False)


def mul_vector(A: BitMatrix, v) -> np.ndarray:
    """A·v for a 0/1 vector ``v`` of length A.cols; returns a uint8 vector."""
    v = np.asarray(v, dtype=np.uint8).reshape(-1)
    if v.size != A.cols:
        raise DimensionError(f"vector of length {v.size} does not match {A.cols} columns")
    return _matvec(A.words, pack_bits(v.reshape(1, -1))[0])


def mul_vectors(A: BitMatrix, V) -> np.ndarray:
    """A·v for every row v of ``V`` in a single pass over A; returns (len(V), A.rows)."""
    V = np.asarray(V, dtype=np.uint8)
    if V.ndim != 2 or V.shape[1] != A.cols:
        raise DimensionError(f"vectors of shape {V.shape} do not match {A.cols} columns")
    return _matvecs(A.words, pack_bits(V))


def xor(A: BitMatrix, B: BitMatrix) -> BitMatrix:
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    return BitMatrix(A.rows, A.cols, A.words ^ B.words, copy=False)


def transpose(A: BitMatrix) -> BitMatrix:
    return BitMatrix.from_bits(np.ascontiguousarray(A.to_bits().T))


def rank(A: BitMatrix) -> int:
    if A._solver is not None:
        return A._solver.rank
    width = _window_cols(A.rows, A.cols)
    r = len(_rref(A.words[:, : _nwords(width)].copy(), width))
    if r < A.rows and width < A.cols:
        r = len(_rref(A.words.copy(), A.cols))
    return r


def solve_syndrome(H: BitMatrix, s, minimize: bool = False) -> np.ndarray:
    """Return e with H·e = s over GF(2).

    By default free variables are zero, so e is supported on pivot columns
    and has weight at most k.  ``minimize`` runs an exhaustive coset search
    for a minimum-weight e and is limited to n <= 24.
    """
    s = np.asarray(s, dtype=np.uint8).reshape(-1)
    if s.size != H.rows:
        raise DimensionError(f"syndrome length {s.size} does not match {H.rows} rows")
    if minimize and H.cols > MAX_MINIMIZE_COLS:
        raise ValueError(f"minimize is limited to n <= {MAX_MINIMIZE_COLS}")
    if H.cols <= 64:
        E = np.zeros((1, H.cols), dtype=np.uint8)
        ok = np.zeros(1, dtype=np.bool_)
        _solve_narrow(H.words[:, :1].reshape(1, -1), s.reshape(1, -1), H.cols, minimize, E, ok)
        if not ok[0]:
            raise InfeasibleSystemError(f"syndrome not in the column space of H (rank {rank(H)} < {H.rows})")
        return E[0]
    return _solver_for(H).particular(s)


def solve_syndrome_batch(Hs, S, minimize: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Solve many small systems at once.

    ``Hs`` is an (N, k, n) 0/1 array with n <= 64 and ``S`` is (N, k).
    Returns (E, feasible): row t of E is exactly what ``solve_syndrome``
    gives for (Hs[t], S[t]), or zeros where that system has no solution.
    """
    Hs = np.asarray(Hs, dtype=np.uint8)
    S = np.asarray(S, dtype=np.uint8)
    if Hs.ndim != 3 or S.shape != Hs.shape[:2]:
        raise DimensionError(f"matrices {Hs.shape} and syndromes {S.shape} do not conform")
    N, k, n = Hs.shape
    if n < 1 or k < 1 or n > 64:
        raise DimensionError("batch solving needs 1 <= n <= 64 columns and k >= 1 rows")
    if minimize and n > MAX_MINIMIZE_COLS:
        raise ValueError(f"minimize is limited to n <= {MAX_MINIMIZE_COLS}")
    if np.any(Hs > 1) or np.any(S > 1):
        raise ValueError("entries must be 0 or 1")
    Hw = pack_bits(Hs.reshape(N * k, n)).reshape(N, k)
    E = np.zeros((N, n), dtype=np.uint8)
    ok = np.zeros(N, dtype=np.bool_)
    _solve_narrow(Hw, np.ascontiguousarray(S), n, minimize, E, ok)
    return E, ok


def generate_matrix(key: HidingKey, k: int, n: int, mode: str = GENERAL) -> BitMatrix:
    """Derive the k x n embedding matrix from ``key``.

    ``general`` yields a full-row-rank matrix, retrying with seed + 1, + 2, ...
    until the rank is k.  ``permutation`` yields an n x n permutation matrix
    (k must equal n) from a Fisher-Yates shuffle on the same stream.
    """
    if k < 1 or n < 1:
        raise ValueError(f"matrix dimensions must be positive, got {k}x{n}")
    if mode == GENERAL:
        if k > n:
            raise DimensionError(f"a {k}x{n} matrix cannot have full row rank {k}")
    elif mode == PERMUTATION:
        if k != n:
            raise DimensionError(f"permutation mode needs k == n, got {k}x{n}")
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return _generate_cached(key.key_bytes, k, n, mode)


@functools.lru_cache(maxsize=4)
def _generate_cached(key_bytes: bytes, k: int, n: int, mode: str) -> BitMatrix:
    seed = fnv1a64(key_bytes)
    if mode == PERMUTATION:
        return permutation_matrix(fisher_yates(seed, n))
    for attempt in range(_MAX_REPAIR_ATTEMPTS):
        H = BitMatrix(k, n, random_rows((seed + attempt) & MASK64, k, n), copy=False)
        solver = _solver_for(H)
        if solver.rank == k:
            return H
    raise RuntimeError(f"no full-rank {k}x{n} matrix after {_MAX_REPAIR_ATTEMPTS} attempts")


def fisher_yates(seed: int, n: int) -> np.ndarray:
    """Shuffle [0, n) with j = next() mod (i + 1) for i = n-1 down to 1."""
    draws = Xoshiro256(seed).words(max(n - 1, 0))
    bounds = np.arange(n, 1, -1, dtype=np.uint64)
    picks = (draws % bounds).tolist()
    perm = list(range(n))
    for step, i in enumerate(range(n - 1, 0, -1)):
        j = picks[step]
        perm[i], perm[j] = perm[j], perm[i]
    return np.array(perm, dtype=np.int64)


def permutation_matrix(perm: Iterable[int]) -> BitMatrix:
    """Matrix with a single 1 at (u, perm[u]) in every row u."""
    perm = np.asarray(list(perm), dtype=np.int64)
    n = perm.size
    if sorted(perm.tolist()) != list(range(n)):
        raise ValueError("not a permutation")
    words = np.zeros((n, _nwords(n)), dtype=np.uint64)
    words[np.arange(n), perm >> 6] = np.left_shift(
        np.uint64(1), (63 - (perm & 63)).astype(np.uint64)
    )
    return BitMatrix(n, n, words)


def random_matrix(seed: int, k: int, n: int) -> BitMatrix:
    """Uniform random k x n matrix from the pinned stream, without rank repair."""
    return BitMatrix(k, n, random_rows(seed & MASK64, k, n), copy=False)
