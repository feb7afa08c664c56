"""Feature-wise linear modulation and the total-variation penalty.

Everything here is a plain differentiable function over tensors; the
training loop owns all weight updates.
"""

from typing import NamedTuple

import torch
from torch import nn

from .errors import ShapeError


class FiLMParams(NamedTuple):
    """Per-channel scale/shift pair. Shapes: (C,) or (B, C)."""

    gamma: torch.Tensor
    beta: torch.Tensor


class FiLMGenerator(nn.Module):
    """Maps a conditioning vector to per-channel (gamma, beta).

    gamma = W_g h + b_g, beta = W_b h + b_b. Construction sets
    b_g = 1 and every other entry to 0, so an untrained generator
    modulates with gamma == 1, beta == 0 (identity start). The bias
    terms exist precisely to make that identity start expressible.
    """

    def __init__(self, embed_dim: int, channels: int):
        super().__init__()
        self.embed_dim = embed_dim
        self.channels = channels
        self.gamma_proj = nn.Linear(embed_dim, channels)
        self.beta_proj = nn.Linear(embed_dim, channels)
        self.reset_to_identity()

    def reset_to_identity(self) -> None:
        with torch.no_grad():
            self.gamma_proj.weight.zero_()
            self.gamma_proj.bias.fill_(1.0)
            self.beta_proj.weight.zero_()
            self.beta_proj.bias.zero_()

    def forward(self, h: torch.Tensor) -> FiLMParams:
        if h.shape[-1] != self.embed_dim:
            raise ShapeError(
                f"conditioning vector has dim {h.shape[-1]}, expected {self.embed_dim}"
            )
        return FiLMParams(self.gamma_proj(h), self.beta_proj(h))


def film_params(h: torch.Tensor, generator: FiLMGenerator) -> FiLMParams:
    """Functional alias for FiLMGenerator.forward."""
    return generator(h)


def film_modulate(z: torch.Tensor, params: FiLMParams) -> torch.Tensor:
    """Applies out[k, i, j] = z[k, i, j] * gamma[k] + beta[k].

    Accepts z of shape (C, H, W) with params of shape (C,), or a batch
    (B, C, H, W) with params (C,) or (B, C).
    """
    gamma, beta = params
    if gamma.shape != beta.shape:
        raise ShapeError(f"gamma {tuple(gamma.shape)} != beta {tuple(beta.shape)}")
    if z.dim() == 3:
        if gamma.dim() != 1 or gamma.shape[0] != z.shape[0]:
            raise ShapeError(
                f"params for {tuple(gamma.shape)} channels cannot modulate {tuple(z.shape)}"
            )
        return z * gamma[:, None, None] + beta[:, None, None]
    if z.dim() == 4:
        if gamma.shape[-1] != z.shape[1]:
            raise ShapeError(
                f"params for {gamma.shape[-1]} channels cannot modulate {tuple(z.shape)}"
            )
        if gamma.dim() == 1:
            return z * gamma[None, :, None, None] + beta[None, :, None, None]
        if gamma.dim() == 2:
            if gamma.shape[0] != z.shape[0]:
                raise ShapeError(
                    f"batch {gamma.shape[0]} params cannot modulate batch {z.shape[0]}"
                )
            return z * gamma[:, :, None, None] + beta[:, :, None, None]
    raise ShapeError(f"unsupported feature map shape {tuple(z.shape)}")


def identity_params(channels: int, batch=None, dtype=torch.float32) -> FiLMParams:
    """gamma == 1, beta == 0; modulating with these is the identity map."""
    shape = (channels,) if batch is None else (batch, channels)
    return FiLMParams(torch.ones(shape, dtype=dtype), torch.zeros(shape, dtype=dtype))


def tv_penalty(x: torch.Tensor) -> torch.Tensor:
    """Squared anisotropic total variation, normalized by element count.

    (1 / (C*H*W)) * sum over channels and valid neighbor pairs of
    (x[c, i+1, j] - x[c, i, j])^2 + (x[c, i, j+1] - x[c, i, j])^2.

    A 1x1 spatial extent has no neighbor pairs and scores 0. Batched
    input (B, C, H, W) returns the mean penalty over the batch.
    """
    if x.dim() == 3:
        x = x.unsqueeze(0)
    elif x.dim() != 4:
        raise ShapeError(f"expected (C, H, W) or (B, C, H, W), got {tuple(x.shape)}")
    b, c, h, w = x.shape
    total = x.new_zeros(())
    if h > 1:
        total = total + (x[:, :, 1:, :] - x[:, :, :-1, :]).pow(2).sum()
    if w > 1:
        total = total + (x[:, :, :, 1:] - x[:, :, :, :-1]).pow(2).sum()
    return total / (b * c * h * w)
