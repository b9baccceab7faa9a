"""8-bit grayscale images, binary PGM I/O and synthetic covers."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

MAX_PIXELS = 1 << 31


class PGMFormatError(ValueError):
    pass


class GrayImage:
    """Immutable 8-bit grayscale raster.

    ``pixels`` has shape (height, width) and is stored row by row, top row
    first, exactly as in the PGM raster.
    """

    __slots__ = ("_pixels",)

    def __init__(self, pixels):
        arr = np.asarray(pixels)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image must be a non-empty 2-D array, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            if np.any(arr < 0) or np.any(arr > 255):
                raise ValueError("pixel values must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        else:
            arr = arr.copy()
        arr.setflags(write=False)
        self._pixels = arr

    @property
    def pixels(self) -> np.ndarray:
        return self._pixels

    @property
    def width(self) -> int:
        return self._pixels.shape[1]

    @property
    def height(self) -> int:
        return self._pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self._pixels.shape

    @property
    def size(self) -> int:
        return self._pixels.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self._pixels, other._pixels)

    def __hash__(self) -> int:
        return hash((self.shape, self._pixels.tobytes()))

    def __repr__(self) -> str:
        return f"GrayImage({self.width}x{self.height})"


_TOKEN = re.compile(rb"(?:\s|#[^\n\r]*)*(\d+)")


def read_pgm(data: bytes) -> GrayImage:
    """Parse a binary (P5) PGM with maxval 255."""
    if data[:2] != b"P5":
        raise PGMFormatError("bad magic: expected P5 binary PGM")
    pos = 2
    fields = []
    for name in ("width", "height", "maxval"):
        m = _TOKEN.match(data, pos)
        # fields must be preceded by whitespace or a comment
        if m is None or m.start(1) == pos:
            raise PGMFormatError(f"malformed header: missing {name}")
        fields.append(int(m.group(1)))
        pos = m.end()
    width, height, maxval = fields
    if maxval != 255:
        raise PGMFormatError(f"unsupported depth: maxval {maxval} (only 255 is supported)")
    if width < 1 or height < 1 or width * height > MAX_PIXELS:
        raise PGMFormatError(f"dimension overflow: {width}x{height}")
    if pos >= len(data) or data[pos : pos + 1] not in (b" ", b"\t", b"\n", b"\r", b"\x0b", b"\x0c"):
        raise PGMFormatError("missing whitespace after maxval")
    pos += 1
    count = width * height
    if len(data) - pos < count:
        raise PGMFormatError(f"truncated raster: expected {count} bytes, got {len(data) - pos}")
    raster = np.frombuffer(data, dtype=np.uint8, count=count, offset=pos)
    return GrayImage(raster.reshape(height, width))


def write_pgm(img: GrayImage) -> bytes:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


def load_image(path) -> GrayImage:
    """Read a PGM file; other formats go through Pillow and are converted to 8-bit gray."""
    path = Path(path)
    data = path.read_bytes()
    if data[:2] == b"P5":
        return read_pgm(data)
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - Pillow is optional
        raise PGMFormatError(f"{path}: not a P5 PGM and Pillow is unavailable") from exc
    with Image.open(path) as im:
        return GrayImage(np.asarray(im.convert("L")))


def save_image(img: GrayImage, path) -> None:
    Path(path).write_bytes(write_pgm(img))


def synth_cover(seed: int, w: int, r: int) -> GrayImage:
    """Deterministic pseudo-natural w x r image.

    A few seeded low-frequency sinusoids over a mid-gray base, plus integer
    noise in [-4, 4], clamped to [0, 255].
    """
    if w < 1 or r < 1:
        raise ValueError(f"cover dimensions must be positive, got {w}x{r}")
    rng = np.random.default_rng(seed)
    x = np.arange(w) / w
    y = np.arange(r) / r
    base = np.full((r, w), rng.uniform(90.0, 160.0))
    for _ in range(4):
        fx, fy = rng.uniform(0.5, 4.0, size=2) * 2.0 * np.pi
        phase = rng.uniform(0.0, 2.0 * np.pi)
        amp = rng.uniform(10.0, 35.0)
        # sin(a + b) split into outer products keeps this O(w + r) in trig calls
        a, b = fx * x, fy * y + phase
        base += amp * (np.outer(np.cos(b), np.sin(a)) + np.outer(np.sin(b), np.cos(a)))
    noise = rng.integers(-4, 5, size=(r, w))
    return GrayImage(np.clip(np.rint(base) + noise, 0, 255).astype(np.uint8))
