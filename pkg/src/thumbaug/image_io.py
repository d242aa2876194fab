"""Lossless image codecs: PNG via Pillow, binary PPM (P6) in-house.

Loading always yields 3-channel rasters; grayscale sources are replicated
onto three equal channels. Saving picks the format from the file extension
and is byte-deterministic, which the replay tooling relies on.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .image import as_image

__all__ = ["CodecError", "load_image", "save_image"]

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


class CodecError(ValueError):
    """File contents could not be decoded, or the format is unsupported."""


def load_image(path: str | Path) -> np.ndarray:
    """Decode a PNG or binary PPM file into an ``(H, W, 3)`` uint8 raster.

    The format is detected from the file's magic bytes, not the extension.
    Raises :class:`CodecError` for unknown or corrupt content and lets
    filesystem errors (missing file, unreadable path) propagate as OSError.
    """
    path = Path(path)
    data = path.read_bytes()
    if data[:8] == _PNG_MAGIC:
        return _decode_png(data, path)
    if data[:2] == b"P6":
        return _decode_ppm(data, path)
    raise CodecError(f"{path}: not a PNG or binary PPM (P6) file")


def save_image(img: np.ndarray, path: str | Path) -> None:
    """Losslessly encode ``img``; the format comes from the extension.

    ``.png`` accepts 1- or 3-channel images; ``.ppm`` (binary P6) is RGB
    only. Round-trips through :func:`load_image` are bit-exact for
    3-channel images.
    """
    img = as_image(img)
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".png":
        _encode_png(img, path)
    elif suffix == ".ppm":
        _encode_ppm(img, path)
    else:
        raise CodecError(f"{path}: unsupported output format '{suffix}' (use .png or .ppm)")


def _decode_png(data: bytes, path: Path) -> np.ndarray:
    try:
        with PILImage.open(io.BytesIO(data)) as img:
            img.load()
            rgb = img.convert("RGB")
    except (OSError, SyntaxError, ValueError) as exc:
        raise CodecError(f"{path}: corrupt PNG data ({exc})") from exc
    return np.asarray(rgb, dtype=np.uint8)


def _encode_png(img: np.ndarray, path: Path) -> None:
    if img.shape[2] == 1:
        pil = PILImage.fromarray(img[:, :, 0], mode="L")
    else:
        pil = PILImage.fromarray(img, mode="RGB")
    pil.save(path, format="PNG")


def _decode_ppm(data: bytes, path: Path) -> np.ndarray:
    """Parse a binary PPM: 'P6', whitespace/comment-separated header
    fields width, height, maxval, one whitespace byte, then the raster."""
    pos = 2  # past the magic
    fields: list[int] = []
    while len(fields) < 3:
        # skip whitespace and '#' comments that run to end of line
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            eol = data.find(b"\n", pos)
            if eol == -1:
                raise CodecError(f"{path}: truncated PPM header")
            pos = eol + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        token = data[start:pos]
        if not token.isdigit():
            raise CodecError(f"{path}: malformed PPM header near byte {start}")
        fields.append(int(token))
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise CodecError(f"{path}: malformed PPM header, expected whitespace after maxval")
    pos += 1  # exactly one whitespace byte separates header and raster
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise CodecError(f"{path}: bad PPM dimensions {width}x{height}")
    if maxval != 255:
        raise CodecError(f"{path}: only maxval 255 PPMs are supported, got {maxval}")
    need = width * height * 3
    raster = data[pos : pos + need]
    if len(raster) < need:
        raise CodecError(
            f"{path}: truncated PPM raster, expected {need} bytes, got {len(raster)}"
        )
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3).copy()


def _encode_ppm(img: np.ndarray, path: Path) -> None:
    if img.shape[2] != 3:
        raise CodecError(f"{path}: PPM (P6) is RGB-only; save 1-channel images as PNG")
    height, width = img.shape[:2]
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    path.write_bytes(header + img.tobytes())
