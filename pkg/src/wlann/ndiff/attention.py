"""Multi-head self-attention and the pre-norm transformer block."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ..errors import ConfigError, ShapeError
from . import functional as F
from .tensor import Tensor, truncated_normal

FF_EXPANSION = 4


@dataclass
class AttentionParams:
    """Query/key/value/output projections for one attention layer."""

    wq: Tensor
    bq: Tensor
    wk: Tensor
    bk: Tensor
    wv: Tensor
    bv: Tensor
    wo: Tensor
    bo: Tensor
    heads: int

    @classmethod
    def create(cls, dim: int, heads: int, rng: np.random.Generator, prefix: str = "attn"):
        if dim % heads != 0:
            raise ConfigError(f"embedding dim {dim} not divisible by {heads} heads")

        def weight(tag):
            return Tensor(truncated_normal(rng, (dim, dim)), name=f"{prefix}.{tag}.w")

        def bias(tag):
            return Tensor(np.zeros(dim), name=f"{prefix}.{tag}.b")

        return cls(
            wq=weight("q"), bq=bias("q"),
            wk=weight("k"), bk=bias("k"),
            wv=weight("v"), bv=bias("v"),
            wo=weight("out"), bo=bias("out"),
            heads=heads,
        )

    def tensors(self) -> Iterator[Tensor]:
        yield from (self.wq, self.bq, self.wk, self.bk, self.wv, self.bv, self.wo, self.bo)


def _split_heads(x: np.ndarray, heads: int) -> np.ndarray:
    n, dim = x.shape
    return x.reshape(n, heads, dim // heads).transpose(1, 0, 2)  # (h, N, d_h)


def _merge_heads(x: np.ndarray) -> np.ndarray:
    heads, n, d_h = x.shape
    return x.transpose(1, 0, 2).reshape(n, heads * d_h)


def multi_head_self_attention(x: np.ndarray, params: AttentionParams):
    """Scaled dot-product attention over a (N, D) token sequence."""
    n, dim = x.shape
    if dim % params.heads != 0:
        raise ConfigError(f"embedding dim {dim} not divisible by {params.heads} heads")
    q, c_q = F.linear(x, params.wq, params.bq)
    k, c_k = F.linear(x, params.wk, params.bk)
    v, c_v = F.linear(x, params.wv, params.bv)
    qh, kh, vh = (_split_heads(t, params.heads) for t in (q, k, v))
    scale = 1.0 / np.sqrt(dim // params.heads)
    scores = (qh @ kh.transpose(0, 2, 1)) * scale
    attn, c_soft = F.softmax(scores, axis=-1)
    context = attn @ vh  # (h, N, d_h)
    merged = _merge_heads(context)
    y, c_o = F.linear(merged, params.wo, params.bo)
    cache = (c_q, c_k, c_v, c_o, c_soft, qh, kh, vh, attn, scale, params.heads)
    return y, cache


def multi_head_self_attention_vjp(dy: np.ndarray, cache):
    c_q, c_k, c_v, c_o, c_soft, qh, kh, vh, attn, scale, heads = cache
    dmerged = F.linear_vjp(dy, c_o)
    dcontext = _split_heads(dmerged, heads)
    dattn = dcontext @ vh.transpose(0, 2, 1)
    dvh = attn.transpose(0, 2, 1) @ dcontext
    dscores = F.softmax_vjp(dattn, c_soft) * scale
    dqh = dscores @ kh
    dkh = dscores.transpose(0, 2, 1) @ qh
    dx = F.linear_vjp(_merge_heads(dqh), c_q)
    dx += F.linear_vjp(_merge_heads(dkh), c_k)
    dx += F.linear_vjp(_merge_heads(dvh), c_v)
    return dx


@dataclass
class TransformerBlockParams:
    """Pre-norm block: LN -> attention -> residual, LN -> MLP -> residual."""

    ln1_gain: Tensor
    ln1_shift: Tensor
    attn: AttentionParams
    ln2_gain: Tensor
    ln2_shift: Tensor
    ff1_w: Tensor
    ff1_b: Tensor
    ff2_w: Tensor
    ff2_b: Tensor

    @classmethod
    def create(cls, dim: int, heads: int, rng: np.random.Generator, prefix: str = "block"):
        hidden = FF_EXPANSION * dim
        return cls(
            ln1_gain=Tensor(np.ones(dim), name=f"{prefix}.ln1.gain"),
            ln1_shift=Tensor(np.zeros(dim), name=f"{prefix}.ln1.shift"),
            attn=AttentionParams.create(dim, heads, rng, prefix=f"{prefix}.attn"),
            ln2_gain=Tensor(np.ones(dim), name=f"{prefix}.ln2.gain"),
            ln2_shift=Tensor(np.zeros(dim), name=f"{prefix}.ln2.shift"),
            ff1_w=Tensor(truncated_normal(rng, (hidden, dim)), name=f"{prefix}.ff1.w"),
            ff1_b=Tensor(np.zeros(hidden), name=f"{prefix}.ff1.b"),
            ff2_w=Tensor(truncated_normal(rng, (dim, hidden)), name=f"{prefix}.ff2.w"),
            ff2_b=Tensor(np.zeros(dim), name=f"{prefix}.ff2.b"),
        )

    def tensors(self) -> Iterator[Tensor]:
        yield self.ln1_gain
        yield self.ln1_shift
        yield from self.attn.tensors()
        yield self.ln2_gain
        yield self.ln2_shift
        yield from (self.ff1_w, self.ff1_b, self.ff2_w, self.ff2_b)


def transformer_block(x: np.ndarray, params: TransformerBlockParams):
    """One encoder block over a (N, D) sequence; output shape equals input shape."""
    if x.ndim != 2:
        raise ShapeError(f"transformer block expects a (N, D) sequence, got {x.shape}")
    h1, c_ln1 = F.layer_norm(x, params.ln1_gain, params.ln1_shift)
    attn_out, c_attn = multi_head_self_attention(h1, params.attn)
    x_mid = x + attn_out
    h2, c_ln2 = F.layer_norm(x_mid, params.ln2_gain, params.ln2_shift)
    f1, c_f1 = F.linear(h2, params.ff1_w, params.ff1_b)
    g1, c_g = F.gelu(f1)
    f2, c_f2 = F.linear(g1, params.ff2_w, params.ff2_b)
    y = x_mid + f2
    return y, (c_ln1, c_attn, c_ln2, c_f1, c_g, c_f2)


def transformer_block_vjp(dy: np.ndarray, cache):
    c_ln1, c_attn, c_ln2, c_f1, c_g, c_f2 = cache
    dg1 = F.linear_vjp(dy, c_f2)
    df1 = F.gelu_vjp(dg1, c_g)
    dx_mid = dy + F.layer_norm_vjp(F.linear_vjp(df1, c_f1), c_ln2)
    dh1 = multi_head_self_attention_vjp(dx_mid, c_attn)
    return dx_mid + F.layer_norm_vjp(dh1, c_ln1)
