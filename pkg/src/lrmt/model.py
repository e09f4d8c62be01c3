"""Small encoder-decoder transformer with exact manual reverse-mode gradients.

Pre-layer-norm variant, sinusoidal positions, ReLU feed-forward. Every
forward primitive returns a cache consumed by its backward twin, so the
gradient is exact for the computation graph as executed (recorded dropout
masks included). Training runs in float32; float64 is supported for
finite-difference verification.
"""

import math
from dataclasses import dataclass

import numpy as np

NEG_INF = -1e9  # additive attention mask value, finite so float32 stays clean
LN_EPS = 1e-5


class ModelError(ValueError):
    pass


class InvalidConfig(ModelError):
    pass


class ShapeMismatch(ModelError):
    pass


class NonFiniteLoss(ModelError):
    pass


class EmptySource(ModelError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    layers_enc: int = 2
    layers_dec: int = 2
    d_model: int = 128
    d_ff: int = 256
    heads: int = 4
    dropout: float = 0.3
    max_positions: int = 256
    shared_embeddings: bool = True  # one table for source and target ids

    def __post_init__(self):
        if self.d_model % self.heads != 0:
            raise InvalidConfig(f"d_model {self.d_model} not divisible by heads {self.heads}")
        if not 0.0 <= self.dropout < 1.0:
            raise InvalidConfig(f"dropout {self.dropout} outside [0, 1)")
        for name in ("vocab_size", "layers_enc", "layers_dec", "d_model", "d_ff",
                     "heads", "max_positions"):
            if getattr(self, name) < 1:
                raise InvalidConfig(f"{name} must be positive")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


class Parameters:
    """Flat named-tensor store; every tensor belongs to one freeze group."""

    def __init__(self, tensors: dict, groups: dict):
        assert set(tensors) == set(groups)
        self.tensors = tensors
        self.groups = groups

    def __getitem__(self, name):
        return self.tensors[name]

    def __setitem__(self, name, value):
        assert name in self.tensors
        self.tensors[name] = value

    def __iter__(self):
        return iter(self.tensors)

    def __contains__(self, name):
        return name in self.tensors

    @property
    def dtype(self):
        return next(iter(self.tensors.values())).dtype

    def copy(self) -> "Parameters":
        return Parameters({k: v.copy() for k, v in self.tensors.items()}, dict(self.groups))

    def astype(self, dtype) -> "Parameters":
        return Parameters({k: v.astype(dtype) for k, v in self.tensors.items()},
                          dict(self.groups))

    def zeros_like(self) -> "Parameters":
        return Parameters({k: np.zeros_like(v) for k, v in self.tensors.items()},
                          dict(self.groups))

    def names_in_group(self, group: str) -> list:
        return [n for n, g in self.groups.items() if g == group]

    def group_hash(self, group: str) -> str:
        import hashlib
        h = hashlib.sha256()
        for name in sorted(self.names_in_group(group)):
            h.update(name.encode())
            h.update(np.ascontiguousarray(self.tensors[name]).tobytes())
        return h.hexdigest()

    def full_hash(self) -> str:
        import hashlib
        h = hashlib.sha256()
        for name in sorted(self.tensors):
            h.update(name.encode())
            h.update(np.ascontiguousarray(self.tensors[name]).tobytes())
        return h.hexdigest()

    def assert_finite(self):
        for name, t in self.tensors.items():
            if not np.all(np.isfinite(t)):
                raise ModelError(f"non-finite values in tensor {name}")


def _attn_param_names(prefix):
    return [f"{prefix}.{w}" for w in ("wq", "bq", "wk", "bk", "wv", "bv", "wo", "bo")]


def init_parameters(cfg: ModelConfig, seed: int, dtype=np.float32) -> Parameters:
    """Deterministic initialization: scaled-uniform matrices, unit layer norms."""
    rng = np.random.default_rng(seed)
    tensors = {}
    groups = {}

    def matrix(name, group, fan_in, fan_out, shape=None):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        shape = shape or (fan_in, fan_out)
        tensors[name] = rng.uniform(-limit, limit, size=shape).astype(dtype)
        groups[name] = group

    def zeros(name, group, shape):
        tensors[name] = np.zeros(shape, dtype=dtype)
        groups[name] = group

    def ones(name, group, shape):
        tensors[name] = np.ones(shape, dtype=dtype)
        groups[name] = group

    d, v = cfg.d_model, cfg.vocab_size
    if cfg.shared_embeddings:
        matrix("embed", "embedding", v, d, shape=(v, d))
    else:
        matrix("src_embed", "embedding", v, d, shape=(v, d))
        matrix("tgt_embed", "embedding", v, d, shape=(v, d))
    zeros("out_bias", "output", (v,))

    def attention_block(prefix, group):
        for w in ("wq", "wk", "wv", "wo"):
            matrix(f"{prefix}.{w}", group, d, d)
            zeros(f"{prefix}.{w.replace('w', 'b')}", group, (d,))

    def ln(prefix, group):
        ones(f"{prefix}.g", group, (d,))
        zeros(f"{prefix}.b", group, (d,))

    def ffn(prefix, group):
        matrix(f"{prefix}.w1", group, d, cfg.d_ff)
        zeros(f"{prefix}.b1", group, (cfg.d_ff,))
        matrix(f"{prefix}.w2", group, cfg.d_ff, d)
        zeros(f"{prefix}.b2", group, (d,))

    for i in range(cfg.layers_enc):
        p = f"enc.{i}"
        ln(f"{p}.ln1", "encoder")
        attention_block(f"{p}.attn", "encoder")
        ln(f"{p}.ln2", "encoder")
        ffn(f"{p}.ffn", "encoder")
    ln("enc.norm", "encoder")

    for i in range(cfg.layers_dec):
        p = f"dec.{i}"
        ln(f"{p}.ln1", "decoder")
        attention_block(f"{p}.attn", "decoder")
        ln(f"{p}.ln2", "decoder")
        attention_block(f"{p}.cross", "decoder")
        ln(f"{p}.ln3", "decoder")
        ffn(f"{p}.ffn", "decoder")
    ln("dec.norm", "decoder")

    return Parameters(tensors, groups)


@dataclass
class Batch:
    src: np.ndarray      # (B, S) token ids, right-padded
    tgt_in: np.ndarray   # (B, T) = target shifted right, starts with bos
    tgt_out: np.ndarray  # (B, T) = target, ends with eos
    pad_id: int

    def __post_init__(self):
        if self.src.ndim != 2 or self.tgt_in.shape != self.tgt_out.shape:
            raise ShapeMismatch("batch arrays must be (B, S)/(B, T) with matching targets")
        if self.src.shape[0] != self.tgt_in.shape[0]:
            raise ShapeMismatch("source and target batch sizes differ")

    @property
    def n_tokens(self) -> int:
        return int(np.sum(self.tgt_out != self.pad_id))

    @property
    def n_padded_tokens(self) -> int:
        rows, s = self.src.shape
        t = self.tgt_in.shape[1]
        return rows * max(s, t)


def sinusoid_table(n_positions: int, d_model: int, dtype) -> np.ndarray:
    pos = np.arange(n_positions, dtype=np.float64)[:, None]
    dim = np.arange(d_model // 2, dtype=np.float64)[None, :]
    angle = pos / np.power(10000.0, 2.0 * dim / d_model)
    table = np.zeros((n_positions, d_model))
    table[:, 0::2] = np.sin(angle)
    table[:, 1::2] = np.cos(angle)
    return table.astype(dtype)


# ---------------------------------------------------------------------------
# forward/backward primitives. Caches are tuples consumed by the *_bwd twin.
# ---------------------------------------------------------------------------

def _linear_fwd(x, w, b):
    return x @ w + b, (x, w)


def _linear_bwd(dout, cache):
    x, w = cache
    dw = x.reshape(-1, x.shape[-1]).T @ dout.reshape(-1, dout.shape[-1])
    db = dout.reshape(-1, dout.shape[-1]).sum(axis=0)
    dx = dout @ w.T
    return dx, dw, db


def _layernorm_fwd(x, g, b):
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LN_EPS)
    xhat = (x - mean) * inv
    return xhat * g + b, (xhat, inv, g)


def _layernorm_bwd(dout, cache):
    xhat, inv, g = cache
    dg = (dout * xhat).reshape(-1, xhat.shape[-1]).sum(axis=0)
    db = dout.reshape(-1, dout.shape[-1]).sum(axis=0)
    dxhat = dout * g
    m1 = dxhat.mean(axis=-1, keepdims=True)
    m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
    dx = inv * (dxhat - m1 - xhat * m2)
    return dx, dg, db


def _softmax(scores):
    shifted = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _dropout_fwd(x, p, rng):
    if rng is None or p <= 0.0:
        return x, None
    keep = (rng.random(x.shape) >= p).astype(x.dtype) / np.array(1.0 - p, dtype=x.dtype)
    return x * keep, keep


def _dropout_bwd(dout, keep):
    return dout if keep is None else dout * keep


def _split_heads(x, heads):
    b, l, d = x.shape
    return x.reshape(b, l, heads, d // heads).transpose(0, 2, 1, 3)


def _merge_heads(x):
    b, h, l, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, l, h * dh)


def _attention_fwd(params, prefix, q_in, kv_in, mask, heads):
    q, cq = _linear_fwd(q_in, params[f"{prefix}.wq"], params[f"{prefix}.bq"])
    k, ck = _linear_fwd(kv_in, params[f"{prefix}.wk"], params[f"{prefix}.bk"])
    v, cv = _linear_fwd(kv_in, params[f"{prefix}.wv"], params[f"{prefix}.bv"])
    qh, kh, vh = (_split_heads(t, heads) for t in (q, k, v))
    scale = 1.0 / math.sqrt(qh.shape[-1])
    scores = (qh @ kh.transpose(0, 1, 3, 2)) * scale
    if mask is not None:
        scores = scores + mask
    attn = _softmax(scores)
    ctx = _merge_heads(attn @ vh)
    out, co = _linear_fwd(ctx, params[f"{prefix}.wo"], params[f"{prefix}.bo"])
    return out, (cq, ck, cv, co, qh, kh, vh, attn, scale, heads)


def _attention_bwd(dout, cache, grads, prefix):
    cq, ck, cv, co, qh, kh, vh, attn, scale, heads = cache
    dctx, dwo, dbo = _linear_bwd(dout, co)
    grads[f"{prefix}.wo"] += dwo
    grads[f"{prefix}.bo"] += dbo
    dctx_h = _split_heads(dctx, heads)
    dattn = dctx_h @ vh.transpose(0, 1, 3, 2)
    dvh = attn.transpose(0, 1, 3, 2) @ dctx_h
    dscores = attn * (dattn - (dattn * attn).sum(axis=-1, keepdims=True))
    dscores *= scale
    dqh = dscores @ kh
    dkh = dscores.transpose(0, 1, 3, 2) @ qh
    dq, dk, dv = (_merge_heads(t) for t in (dqh, dkh, dvh))
    dq_in, dwq, dbq = _linear_bwd(dq, cq)
    dk_in, dwk, dbk = _linear_bwd(dk, ck)
    dv_in, dwv, dbv = _linear_bwd(dv, cv)
    grads[f"{prefix}.wq"] += dwq
    grads[f"{prefix}.bq"] += dbq
    grads[f"{prefix}.wk"] += dwk
    grads[f"{prefix}.bk"] += dbk
    grads[f"{prefix}.wv"] += dwv
    grads[f"{prefix}.bv"] += dbv
    return dq_in, dk_in + dv_in


def _ffn_fwd(params, prefix, x):
    h, c1 = _linear_fwd(x, params[f"{prefix}.w1"], params[f"{prefix}.b1"])
    relu_mask = h > 0
    a = h * relu_mask
    out, c2 = _linear_fwd(a, params[f"{prefix}.w2"], params[f"{prefix}.b2"])
    return out, (c1, c2, relu_mask)


def _ffn_bwd(dout, cache, grads, prefix):
    c1, c2, relu_mask = cache
    da, dw2, db2 = _linear_bwd(dout, c2)
    grads[f"{prefix}.w2"] += dw2
    grads[f"{prefix}.b2"] += db2
    dh = da * relu_mask
    dx, dw1, db1 = _linear_bwd(dh, c1)
    grads[f"{prefix}.w1"] += dw1
    grads[f"{prefix}.b1"] += db1
    return dx


def _embed_fwd(table, ids, pos_table, scale, p, rng):
    x = table[ids] * scale + pos_table[: ids.shape[1]]
    x, keep = _dropout_fwd(x, p, rng)
    return x, (ids, keep, scale)


def _embed_bwd(dout, cache, dtable):
    ids, keep, scale = cache
    dout = _dropout_bwd(dout, keep)
    flat = (dout * scale).reshape(-1, dout.shape[-1])
    np.add.at(dtable, ids.reshape(-1), flat)


def _key_padding_mask(ids, pad_id, dtype):
    # (B, 1, 1, L) additive mask over attention keys
    mask = np.where(ids == pad_id, NEG_INF, 0.0).astype(dtype)
    return mask[:, None, None, :]


def _causal_mask(t, dtype):
    m = np.triu(np.full((t, t), NEG_INF), k=1).astype(dtype)
    return m[None, None, :, :]


def _embedding_tables(params, cfg):
    if cfg.shared_embeddings:
        return params["embed"], params["embed"]
    return params["src_embed"], params["tgt_embed"]


def _forward(params: Parameters, cfg: ModelConfig, batch: Batch, dropout_rng=None):
    """Full training-mode forward; returns logits and the backward cache."""
    dtype = params.dtype
    if batch.src.shape[1] > cfg.max_positions or batch.tgt_in.shape[1] > cfg.max_positions:
        raise ShapeMismatch(
            f"sequence longer than max_positions={cfg.max_positions}")
    if int(batch.src.max()) >= cfg.vocab_size or int(batch.tgt_in.max()) >= cfg.vocab_size:
        raise ShapeMismatch("token id outside configured vocabulary")
    p = cfg.dropout if dropout_rng is not None else 0.0
    src_table, tgt_table = _embedding_tables(params, cfg)
    pos = sinusoid_table(cfg.max_positions, cfg.d_model, dtype)
    scale = math.sqrt(cfg.d_model)
    cache = {"pos": pos, "p": p}

    src_mask = _key_padding_mask(batch.src, batch.pad_id, dtype)
    x, cache["src_embed"] = _embed_fwd(src_table, batch.src, pos, scale, p, dropout_rng)
    enc_layers = []
    for i in range(cfg.layers_enc):
        pre = f"enc.{i}"
        a, c_ln1 = _layernorm_fwd(x, params[f"{pre}.ln1.g"], params[f"{pre}.ln1.b"])
        sa, c_attn = _attention_fwd(params, f"{pre}.attn", a, a, src_mask, cfg.heads)
        sa, keep1 = _dropout_fwd(sa, p, dropout_rng)
        x = x + sa
        b, c_ln2 = _layernorm_fwd(x, params[f"{pre}.ln2.g"], params[f"{pre}.ln2.b"])
        ff, c_ffn = _ffn_fwd(params, f"{pre}.ffn", b)
        ff, keep2 = _dropout_fwd(ff, p, dropout_rng)
        x = x + ff
        enc_layers.append((c_ln1, c_attn, keep1, c_ln2, c_ffn, keep2))
    enc_out, c_enc_norm = _layernorm_fwd(x, params["enc.norm.g"], params["enc.norm.b"])
    cache.update(enc_layers=enc_layers, enc_norm=c_enc_norm, src_mask=src_mask)

    t = batch.tgt_in.shape[1]
    causal = _causal_mask(t, dtype)
    y, cache["tgt_embed"] = _embed_fwd(tgt_table, batch.tgt_in, pos, scale, p, dropout_rng)
    dec_layers = []
    for i in range(cfg.layers_dec):
        pre = f"dec.{i}"
        a, c_ln1 = _layernorm_fwd(y, params[f"{pre}.ln1.g"], params[f"{pre}.ln1.b"])
        sa, c_self = _attention_fwd(params, f"{pre}.attn", a, a, causal, cfg.heads)
        sa, keep1 = _dropout_fwd(sa, p, dropout_rng)
        y = y + sa
        c, c_ln2 = _layernorm_fwd(y, params[f"{pre}.ln2.g"], params[f"{pre}.ln2.b"])
        ca, c_cross = _attention_fwd(params, f"{pre}.cross", c, enc_out, src_mask, cfg.heads)
        ca, keep2 = _dropout_fwd(ca, p, dropout_rng)
        y = y + ca
        f, c_ln3 = _layernorm_fwd(y, params[f"{pre}.ln3.g"], params[f"{pre}.ln3.b"])
        ff, c_ffn = _ffn_fwd(params, f"{pre}.ffn", f)
        ff, keep3 = _dropout_fwd(ff, p, dropout_rng)
        y = y + ff
        dec_layers.append((c_ln1, c_self, keep1, c_ln2, c_cross, keep2, c_ln3, c_ffn, keep3))
    dec_out, c_dec_norm = _layernorm_fwd(y, params["dec.norm.g"], params["dec.norm.b"])
    cache.update(dec_layers=dec_layers, dec_norm=c_dec_norm, dec_out=dec_out)

    logits = dec_out @ tgt_table.T + params["out_bias"]
    return logits, cache


def _backward(params: Parameters, cfg: ModelConfig, batch: Batch, cache,
              dlogits) -> Parameters:
    grads = params.zeros_like()
    g = grads.tensors
    src_table, tgt_table = _embedding_tables(params, cfg)
    tgt_name = "embed" if cfg.shared_embeddings else "tgt_embed"
    src_name = "embed" if cfg.shared_embeddings else "src_embed"

    dec_out = cache["dec_out"]
    g["out_bias"] += dlogits.reshape(-1, dlogits.shape[-1]).sum(axis=0)
    v = dlogits.shape[-1]
    g[tgt_name] += dlogits.reshape(-1, v).T @ dec_out.reshape(-1, dec_out.shape[-1])
    dy = dlogits @ tgt_table

    dy, dg, db = _layernorm_bwd(dy, cache["dec_norm"])
    g["dec.norm.g"] += dg
    g["dec.norm.b"] += db

    denc_out = np.zeros_like(cache["enc_norm"][0])  # same shape as enc_out
    for i in reversed(range(cfg.layers_dec)):
        pre = f"dec.{i}"
        c_ln1, c_self, keep1, c_ln2, c_cross, keep2, c_ln3, c_ffn, keep3 = cache["dec_layers"][i]
        dff = _dropout_bwd(dy, keep3)
        df = _ffn_bwd(dff, c_ffn, g, f"{pre}.ffn")
        df, dg, db = _layernorm_bwd(df, c_ln3)
        g[f"{pre}.ln3.g"] += dg
        g[f"{pre}.ln3.b"] += db
        dy = dy + df
        dca = _dropout_bwd(dy, keep2)
        dc, denc = _attention_bwd(dca, c_cross, g, f"{pre}.cross")
        denc_out += denc
        dc, dg, db = _layernorm_bwd(dc, c_ln2)
        g[f"{pre}.ln2.g"] += dg
        g[f"{pre}.ln2.b"] += db
        dy = dy + dc
        dsa = _dropout_bwd(dy, keep1)
        da_q, da_kv = _attention_bwd(dsa, c_self, g, f"{pre}.attn")
        da, dg, db = _layernorm_bwd(da_q + da_kv, c_ln1)
        g[f"{pre}.ln1.g"] += dg
        g[f"{pre}.ln1.b"] += db
        dy = dy + da
    _embed_bwd(dy, cache["tgt_embed"], g[tgt_name])

    dx, dg, db = _layernorm_bwd(denc_out, cache["enc_norm"])
    g["enc.norm.g"] += dg
    g["enc.norm.b"] += db
    for i in reversed(range(cfg.layers_enc)):
        pre = f"enc.{i}"
        c_ln1, c_attn, keep1, c_ln2, c_ffn, keep2 = cache["enc_layers"][i]
        dff = _dropout_bwd(dx, keep2)
        dbb = _ffn_bwd(dff, c_ffn, g, f"{pre}.ffn")
        dbb, dg, db = _layernorm_bwd(dbb, c_ln2)
        g[f"{pre}.ln2.g"] += dg
        g[f"{pre}.ln2.b"] += db
        dx = dx + dbb
        dsa = _dropout_bwd(dx, keep1)
        da_q, da_kv = _attention_bwd(dsa, c_attn, g, f"{pre}.attn")
        da, dg, db = _layernorm_bwd(da_q + da_kv, c_ln1)
        g[f"{pre}.ln1.g"] += dg
        g[f"{pre}.ln1.b"] += db
        dx = dx + da
    _embed_bwd(dx, cache["src_embed"], g[src_name])
    return grads


def _log_softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def cross_entropy(logits, tgt_out, pad_id, label_smoothing=0.0):
    """Label-smoothed CE averaged per non-pad token.

    The smoothing mass is spread uniformly over the full vocabulary (gold
    included): loss = -((1-eps) * logp[gold] + eps * mean_v logp[v]).
    Returns (loss, dlogits, n_tokens).
    """
    v = logits.shape[-1]
    logp = _log_softmax(logits.astype(np.float64) if logits.dtype == np.float32 else logits)
    mask = (tgt_out != pad_id)
    n_tokens = int(mask.sum())
    if n_tokens == 0:
        raise ShapeMismatch("batch has no non-pad target tokens")
    gold_lp = np.take_along_axis(logp, tgt_out[..., None], axis=-1)[..., 0]
    eps = label_smoothing
    tok_loss = -((1.0 - eps) * gold_lp + eps * logp.mean(axis=-1))
    loss = float((tok_loss * mask).sum() / n_tokens)

    prob = np.exp(logp)
    q = np.full_like(prob, eps / v)
    np.put_along_axis(q, tgt_out[..., None], q[..., :1] + (1.0 - eps), axis=-1)
    dlogits = (prob - q) * (mask[..., None] / n_tokens)
    return loss, dlogits.astype(logits.dtype), n_tokens


def loss_and_grads(params: Parameters, cfg: ModelConfig, batch: Batch,
                   label_smoothing: float = 0.0, dropout_rng=None):
    """Loss plus exact gradients for the graph as executed.

    With dropout_rng=None the map is deterministic; pass a seeded
    numpy Generator to enable dropout at cfg.dropout.
    """
    if not 0.0 <= label_smoothing < 1.0:
        raise ModelError(f"label smoothing {label_smoothing} outside [0, 1)")
    logits, cache = _forward(params, cfg, batch, dropout_rng)
    loss, dlogits, _ = cross_entropy(logits, batch.tgt_out, batch.pad_id, label_smoothing)
    if not math.isfinite(loss):
        raise NonFiniteLoss(f"loss diverged: {loss}")
    grads = _backward(params, cfg, batch, cache, dlogits)
    return loss, grads


def eval_loss(params: Parameters, cfg: ModelConfig, batch: Batch,
              label_smoothing: float = 0.0) -> float:
    logits, _ = _forward(params, cfg, batch, None)
    loss, _, _ = cross_entropy(logits, batch.tgt_out, batch.pad_id, label_smoothing)
    return loss


def encode_source(params: Parameters, cfg: ModelConfig, src: np.ndarray, pad_id: int):
    """Encoder-only forward for decoding; returns (enc_out, src_mask)."""
    if src.ndim != 2 or src.shape[1] == 0:
        raise EmptySource("source batch is empty")
    dtype = params.dtype
    src_table, _ = _embedding_tables(params, cfg)
    pos = sinusoid_table(cfg.max_positions, cfg.d_model, dtype)
    scale = math.sqrt(cfg.d_model)
    src_mask = _key_padding_mask(src, pad_id, dtype)
    x, _ = _embed_fwd(src_table, src, pos, scale, 0.0, None)
    for i in range(cfg.layers_enc):
        pre = f"enc.{i}"
        a, _ = _layernorm_fwd(x, params[f"{pre}.ln1.g"], params[f"{pre}.ln1.b"])
        sa, _ = _attention_fwd(params, f"{pre}.attn", a, a, src_mask, cfg.heads)
        x = x + sa
        b, _ = _layernorm_fwd(x, params[f"{pre}.ln2.g"], params[f"{pre}.ln2.b"])
        ff, _ = _ffn_fwd(params, f"{pre}.ffn", b)
        x = x + ff
    enc_out, _ = _layernorm_fwd(x, params["enc.norm.g"], params["enc.norm.b"])
    return enc_out, src_mask


def decoder_logits(params: Parameters, cfg: ModelConfig, enc_out, src_mask,
                   tgt_in: np.ndarray):
    """Decoder forward over a full prefix; returns logits (B, T, V)."""
    dtype = params.dtype
    _, tgt_table = _embedding_tables(params, cfg)
    pos = sinusoid_table(cfg.max_positions, cfg.d_model, dtype)
    scale = math.sqrt(cfg.d_model)
    causal = _causal_mask(tgt_in.shape[1], dtype)
    y, _ = _embed_fwd(tgt_table, tgt_in, pos, scale, 0.0, None)
    for i in range(cfg.layers_dec):
        pre = f"dec.{i}"
        a, _ = _layernorm_fwd(y, params[f"{pre}.ln1.g"], params[f"{pre}.ln1.b"])
        sa, _ = _attention_fwd(params, f"{pre}.attn", a, a, causal, cfg.heads)
        y = y + sa
        c, _ = _layernorm_fwd(y, params[f"{pre}.ln2.g"], params[f"{pre}.ln2.b"])
        ca, _ = _attention_fwd(params, f"{pre}.cross", c, enc_out, src_mask, cfg.heads)
        y = y + ca
        f, _ = _layernorm_fwd(y, params[f"{pre}.ln3.g"], params[f"{pre}.ln3.b"])
        ff, _ = _ffn_fwd(params, f"{pre}.ffn", f)
        y = y + ff
    dec_out, _ = _layernorm_fwd(y, params["dec.norm.g"], params["dec.norm.b"])
    return dec_out @ tgt_table.T + params["out_bias"]
