"""Center cropping and geometric augmentation on 8-bit pixmaps.

All geometric transforms use inverse mapping with nearest-neighbour
sampling about the image center ``((w - 1) / 2, (h - 1) / 2)``; source
coordinates that fall outside the image take the fill value. Rotation is
counter-clockwise as displayed (y axis pointing down). Multiples of 90
degrees use exact sines and cosines so quarter turns of square images are
lossless.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from wensemble import kernels
from wensemble.datapipe import make_rng
from wensemble.errors import ParseError, WensembleError

TRANSFORM_KINDS = ("hflip", "vflip", "rotate", "shift", "zoom")


@dataclass(frozen=True, eq=False)
class Pixmap:
    """Row-major, channel-interleaved 8-bit image stored as (height, width, channels)."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3 or data.shape[2] not in (1, 3):
            raise WensembleError(f"pixmap must be (h, w, 1|3), got shape {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise WensembleError("pixmap dimensions must be positive")
        if data.dtype != np.uint8:
            if np.issubdtype(data.dtype, np.integer) and (data.min() < 0 or data.max() > 255):
                raise WensembleError("pixel samples must be within 0..255")
            data = data.astype(np.uint8)
        data = np.ascontiguousarray(data)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_bytes(cls, width, height, channels, buf):
        arr = np.frombuffer(bytes(buf), dtype=np.uint8)
        if arr.size != width * height * channels:
            raise WensembleError(f"expected {width * height * channels} samples, got {arr.size}")
        return cls(arr.reshape(height, width, channels))

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def channels(self):
        return self.data.shape[2]

    def tobytes(self):
        return self.data.tobytes()

    def __eq__(self, other):
        if not isinstance(other, Pixmap):
            return NotImplemented
        return self.data.shape == other.data.shape and np.array_equal(self.data, other.data)


@dataclass(frozen=True)
class TransformSpec:
    """One geometric transform.

    ``angle`` is in degrees, ``dx``/``dy`` are fractions of width/height,
    ``factor`` > 1 magnifies.
    """

    kind: str
    angle: float = 0.0
    dx: float = 0.0
    dy: float = 0.0
    factor: float = 1.0
    fill: int = 0

    def __post_init__(self):
        if self.kind not in TRANSFORM_KINDS:
            raise WensembleError(f"unknown transform {self.kind!r}; expected one of {TRANSFORM_KINDS}")
        if self.kind == "zoom" and not self.factor > 0:
            raise WensembleError(f"zoom factor must be positive, got {self.factor}")
        if self.kind == "shift" and not (abs(self.dx) < 1 and abs(self.dy) < 1):
            raise WensembleError("shift fractions must lie in (-1, 1)")
        if not 0 <= int(self.fill) <= 255:
            raise WensembleError("fill must be within 0..255")


@dataclass(frozen=True)
class AugmentRanges:
    """Sampling ranges for random augmentation."""

    rotation: tuple = (-20.0, 20.0)
    zoom: tuple = (0.9, 1.1)
    shift: tuple = (-0.1, 0.1)
    flip_probability: float = 0.5


def center_crop(img: Pixmap, width: int, height: int) -> Pixmap:
    if width < 1 or height < 1:
        raise WensembleError("crop size must be positive")
    if width > img.width or height > img.height:
        raise WensembleError(f"cannot crop {img.width}x{img.height} to larger {width}x{height}")
    x0, y0 = crop_offset(img.width, img.height, width, height)
    return Pixmap(img.data[y0:y0 + height, x0:x0 + width])


def crop_offset(src_w, src_h, width, height):
    return (src_w - width) // 2, (src_h - height) // 2


def _quarter_turn_trig(angle):
    turns = angle / 90.0
    if turns == round(turns):
        return [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][int(round(turns)) % 4]
    rad = math.radians(angle)
    return math.cos(rad), math.sin(rad)


def inverse_map(spec: TransformSpec, width, height):
    """(matrix, offset) taking centered output coordinates to source coordinates."""
    if spec.kind == "hflip":
        return ((-1.0, 0.0), (0.0, 1.0)), (0.0, 0.0)
    if spec.kind == "vflip":
        return ((1.0, 0.0), (0.0, -1.0)), (0.0, 0.0)
    if spec.kind == "rotate":
        c, s = _quarter_turn_trig(spec.angle)
        # output = R(angle) * source, with y down: invert with R(-angle)
        return ((c, -s), (s, c)), (0.0, 0.0)
    if spec.kind == "shift":
        return ((1.0, 0.0), (0.0, 1.0)), (-spec.dx * width, -spec.dy * height)
    inv = 1.0 / spec.factor
    return ((inv, 0.0), (0.0, inv)), (0.0, 0.0)


def apply_transform(img: Pixmap, spec: TransformSpec) -> Pixmap:
    mat, off = inverse_map(spec, img.width, img.height)
    return Pixmap(kernels.nearest_remap(img.data, mat, off, int(spec.fill)))


def sample_transform(kind, seed, ranges=AugmentRanges(), fill=0) -> TransformSpec:
    """Draw a transform of ``kind`` with parameters sampled from ``ranges``.

    Flip kinds are drawn with ``ranges.flip_probability``; a non-flip comes
    back as a zero rotation, which is the identity.
    """
    rng = make_rng(seed)
    if kind in ("hflip", "vflip"):
        if rng.random() < ranges.flip_probability:
            return TransformSpec(kind, fill=fill)
        return TransformSpec("rotate", angle=0.0, fill=fill)
    if kind == "rotate":
        return TransformSpec("rotate", angle=float(rng.uniform(*ranges.rotation)), fill=fill)
    if kind == "zoom":
        return TransformSpec("zoom", factor=float(rng.uniform(*ranges.zoom)), fill=fill)
    if kind == "shift":
        dx, dy = rng.uniform(*ranges.shift, size=2)
        return TransformSpec("shift", dx=float(dx), dy=float(dy), fill=fill)
    raise WensembleError(f"unknown transform {kind!r}")


def augment(img: Pixmap, seed, kinds=TRANSFORM_KINDS, ranges=AugmentRanges(), fill=0) -> Pixmap:
    """Apply each of ``kinds`` in turn with independently sampled parameters."""
    seeds = np.random.SeedSequence(int(seed)).generate_state(len(kinds), dtype=np.uint64)
    for kind, s in zip(kinds, seeds):
        img = apply_transform(img, sample_transform(kind, int(s), ranges, fill))
    return img


# -- PGM / PPM -------------------------------------------------------------


def _pnm_tokens(buf, name):
    """Yield (token, end_offset) for the ASCII header, skipping comments."""
    i = 0
    n = len(buf)
    while i < n:
        ch = buf[i:i + 1]
        if ch == b"#":
            while i < n and buf[i:i + 1] not in (b"\n", b"\r"):
                i += 1
        elif ch.isspace():
            i += 1
        else:
            j = i
            while j < n and not buf[j:j + 1].isspace() and buf[j:j + 1] != b"#":
                j += 1
            yield buf[i:j], j
            i = j
    raise ParseError("truncated PNM header", name)


def decode_pnm(buf: bytes, name=None) -> Pixmap:
    tokens = _pnm_tokens(buf, name)
    magic, _ = next(tokens)
    if magic not in (b"P5", b"P6"):
        raise ParseError(f"unsupported PNM magic {magic!r}; expected P5 or P6", name)
    try:
        width = int(next(tokens)[0])
        height = int(next(tokens)[0])
        tok, end = next(tokens)
        maxval = int(tok)
    except ValueError:
        raise ParseError("malformed PNM header", name) from None
    if maxval != 255:
        raise ParseError(f"only maxval 255 is supported, got {maxval}", name)
    if width < 1 or height < 1:
        raise ParseError("PNM dimensions must be positive", name)
    channels = 3 if magic == b"P6" else 1
    start = end + 1  # single whitespace byte after maxval
    body = buf[start:start + width * height * channels]
    if len(body) != width * height * channels:
        raise ParseError(f"PNM body has {len(body)} bytes, expected {width * height * channels}", name)
    return Pixmap.from_bytes(width, height, channels, body)


def encode_pnm(img: Pixmap) -> bytes:
    magic = b"P6" if img.channels == 3 else b"P5"
    return magic + f"\n{img.width} {img.height}\n255\n".encode("ascii") + img.tobytes()


def read_pnm(path) -> Pixmap:
    with open(path, "rb") as fh:
        return decode_pnm(fh.read(), os.fspath(path))


def write_pnm(img: Pixmap, path):
    with open(path, "wb") as fh:
        fh.write(encode_pnm(img))
