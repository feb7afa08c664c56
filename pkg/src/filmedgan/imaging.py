"""PNG and tensor conversions.

Image tensors are float32 (3, H, W) in [-1, 1] everywhere in this
package; PNG is the only wire format.
"""

import base64
import io

import numpy as np
import torch
from PIL import Image

from .errors import ShapeError, ValidationError


def to_tensor(arr: np.ndarray) -> torch.Tensor:
    """uint8 (H, W, 3) -> float32 (3, H, W) in [-1, 1]."""
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ShapeError(f"expected (H, W, 3) array, got {arr.shape}")
    x = arr.astype(np.float32) / 127.5 - 1.0
    return torch.from_numpy(x).permute(2, 0, 1).contiguous()


def to_uint8(t: torch.Tensor) -> np.ndarray:
    """float (3, H, W) in [-1, 1] -> uint8 (H, W, 3), values rounded."""
    if t.dim() != 3 or t.shape[0] != 3:
        raise ShapeError(f"expected (3, H, W) tensor, got {tuple(t.shape)}")
    x = t.detach().float().clamp(-1.0, 1.0)
    arr = ((x + 1.0) * 127.5).round().to(torch.uint8)
    return arr.permute(1, 2, 0).numpy()


def encode_png(t: torch.Tensor) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(to_uint8(t)).save(buf, format="PNG")
    return buf.getvalue()


def decode_png(data: bytes, resolution=None) -> torch.Tensor:
    """PNG bytes -> image tensor, resized to (H, W) when requested."""
    try:
        img = Image.open(io.BytesIO(data)).convert("RGB")
    except Exception as exc:
        raise ValidationError(f"not a decodable image: {exc}") from exc
    if resolution is not None and img.size != (resolution[1], resolution[0]):
        img = img.resize((resolution[1], resolution[0]), Image.BILINEAR)
    return to_tensor(np.asarray(img))


def save_image(t: torch.Tensor, path) -> None:
    Image.fromarray(to_uint8(t)).save(path)


def load_image(path, resolution=None) -> torch.Tensor:
    with open(path, "rb") as f:
        return decode_png(f.read(), resolution=resolution)


def heatmap_png(m: torch.Tensor) -> bytes:
    """2D map in [0, 1] -> 8-bit grayscale PNG bytes."""
    if m.dim() != 2:
        raise ShapeError(f"expected 2D heatmap, got {tuple(m.shape)}")
    arr = (m.detach().float().clamp(0, 1) * 255).round().to(torch.uint8).numpy()
    buf = io.BytesIO()
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def png_to_b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def b64_to_bytes(s: str) -> bytes:
    try:
        return base64.b64decode(s, validate=True)
    except Exception as exc:
        raise ValidationError(f"invalid base64 payload: {exc}") from exc
