"""The two-input temporal-convolutional classifier.

Main path: encoder convs -> residual dilated blocks -> 1x1 merge of the
stacked block outputs -> per-segment mean pooling -> per-segment class logits.

Branch path: a small conv stack applied to each segment independently produces
one scalar score per segment; a softmax over segments turns the scores into
spatial attention weights.

Head: the attention-weighted sum of per-segment logit columns is mapped by one
affine layer to the final logits.  With ``hard=True`` the per-segment logits
are replaced by one-hot argmax votes before weighting (inference only).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError
from .attention import softmax, softmax_backward
from .layers import (
    ConvLayer,
    Dense,
    conv_backward,
    conv_forward,
    dense_backward,
    dense_forward,
    init_conv,
    init_dense,
    relu_backward,
    relu_forward,
)


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyperparameters (toy scale on purpose)."""

    in_channels: int = 2
    channels: int = 8
    encoder_layers: int = 2
    encoder_width: int = 3
    n_blocks: int = 4
    block_width: int = 2
    branch_channels: int = 4
    branch_width: int = 3
    branch_layers: int = 2
    segment_len: int = 100

    def __post_init__(self):
        for name in (
            "in_channels",
            "channels",
            "encoder_layers",
            "encoder_width",
            "n_blocks",
            "block_width",
            "branch_channels",
            "branch_width",
            "branch_layers",
            "segment_len",
        ):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} must be >= 1")

    @property
    def dilations(self) -> list:
        return [2**i for i in range(self.n_blocks)]


@dataclass
class ResidualBlock:
    """o = x + conv2(relu(conv1(x))); channel count must be preserved."""

    conv1: ConvLayer
    conv2: ConvLayer


@dataclass
class TcnStack:
    blocks: list
    merge: ConvLayer  # 1x1 conv over the channel-stacked block outputs


@dataclass
class BranchNet:
    convs: list
    head: Dense  # per-segment scalar score


@dataclass
class NetParams:
    config: ModelConfig
    encoder: list
    tcn: TcnStack
    classifier1: Dense  # per-segment logits over n_classes
    branch: BranchNet
    classifier2: Dense  # pooled evidence -> final logits

    @property
    def n_classes(self) -> int:
        return self.classifier1.weights.shape[0]

    @property
    def n_out(self) -> int:
        return self.classifier2.weights.shape[0]


def init_params(
    config: ModelConfig, n_classes: int, seed: int, n_out: int | None = None
) -> NetParams:
    """Seeded uniform(+-sqrt(1/fan_in)) initialization, zero biases."""
    if n_classes < 2:
        raise ParameterError("n_classes must be >= 2")
    rng = np.random.default_rng(seed)
    c = config.channels
    encoder = []
    in_ch = config.in_channels
    for _ in range(config.encoder_layers):
        encoder.append(init_conv(rng, c, in_ch, config.encoder_width, 1))
        in_ch = c
    blocks = [
        ResidualBlock(
            conv1=init_conv(rng, c, c, config.block_width, d),
            conv2=init_conv(rng, c, c, config.block_width, d),
        )
        for d in config.dilations
    ]
    merge = init_conv(rng, c, c * config.n_blocks, 1, 1)
    classifier1 = init_dense(rng, n_classes, c)
    branch_convs = []
    in_ch = config.in_channels
    for _ in range(config.branch_layers):
        branch_convs.append(init_conv(rng, config.branch_channels, in_ch, config.branch_width, 1))
        in_ch = config.branch_channels
    branch = BranchNet(convs=branch_convs, head=init_dense(rng, 1, config.branch_channels))
    classifier2 = init_dense(rng, n_out if n_out is not None else n_classes, n_classes)
    return NetParams(
        config=config,
        encoder=encoder,
        tcn=TcnStack(blocks=blocks, merge=merge),
        classifier1=classifier1,
        branch=branch,
        classifier2=classifier2,
    )


def residual_block(x: np.ndarray, block: ResidualBlock) -> np.ndarray:
    """Single-sequence residual block: x [C, T] -> [C, T]."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ParameterError(f"expected [channels, T], got shape {x.shape}")
    if block.conv1.weights.shape[1] != x.shape[0] or block.conv2.weights.shape[0] != x.shape[0]:
        raise ParameterError("residual block must preserve the channel count")
    y, _ = _residual_forward(x[None], block)
    return y[0]


def _residual_forward(h: np.ndarray, block: ResidualBlock):
    y1, c1 = conv_forward(h, block.conv1)
    a1, r1 = relu_forward(y1)
    y2, c2 = conv_forward(a1, block.conv2)
    return h + y2, (c1, r1, c2)


def _residual_backward(dout: np.ndarray, block: ResidualBlock, cache, grads, prefix):
    c1, r1, c2 = cache
    da1, dw2, db2 = conv_backward(dout, c2)
    dy1 = relu_backward(da1, r1)
    dh, dw1, db1 = conv_backward(dy1, c1)
    grads[f"{prefix}.conv1.weights"] = dw1
    grads[f"{prefix}.conv1.bias"] = db1
    grads[f"{prefix}.conv2.weights"] = dw2
    grads[f"{prefix}.conv2.bias"] = db2
    return dout + dh  # skip connection plus the conv path


def features_forward(params: NetParams, x: np.ndarray):
    """Encoder + TCN + merge: x [B, C_in, T] -> feat [B, channels, T], cache."""
    enc_caches = []
    h = x
    for conv in params.encoder:
        y, cc = conv_forward(h, conv)
        a, rc = relu_forward(y)
        enc_caches.append((cc, rc))
        h = a
    block_caches = []
    block_outs = []
    for blk in params.tcn.blocks:
        h, cache = _residual_forward(h, blk)
        block_caches.append(cache)
        block_outs.append(h)
    stacked = np.concatenate(block_outs, axis=1)
    feat, merge_cache = conv_forward(stacked, params.tcn.merge)
    return feat, (enc_caches, block_caches, merge_cache)


def features_backward(params: NetParams, dfeat: np.ndarray, cache, grads) -> np.ndarray:
    enc_caches, block_caches, merge_cache = cache
    dstacked, dw, db = conv_backward(dfeat, merge_cache)
    grads["tcn.merge.weights"] = dw
    grads["tcn.merge.bias"] = db
    c = params.config.channels
    chunks = [dstacked[:, i * c : (i + 1) * c, :] for i in range(params.config.n_blocks)]
    dh = np.zeros_like(chunks[-1])
    for i in range(params.config.n_blocks - 1, -1, -1):
        dout = chunks[i] + dh
        dh = _residual_backward(dout, params.tcn.blocks[i], block_caches[i], grads, f"tcn.blocks.{i}")
    for i in range(len(params.encoder) - 1, -1, -1):
        cc, rc = enc_caches[i]
        dy = relu_backward(dh, rc)
        dh, dw, db = conv_backward(dy, cc)
        grads[f"encoder.{i}.weights"] = dw
        grads[f"encoder.{i}.bias"] = db
    return dh


def _segment_count(params: NetParams, t: int) -> int:
    s = t // params.config.segment_len
    if s < 1:
        raise ParameterError(
            f"need at least one full segment: T={t} < segment_len={params.config.segment_len}"
        )
    return s


def _branch_forward(params: NetParams, xb: np.ndarray, s: int):
    """Per-segment scores: xb [B, C_in, T] -> scores [B, S], cache.

    Segments are processed independently (folded into the batch axis), so the
    score of segment s depends only on the samples inside segment s.
    """
    length = params.config.segment_len
    b = xb.shape[0]
    xs = xb[:, :, : s * length]
    folded = xs.reshape(b, xb.shape[1], s, length).transpose(0, 2, 1, 3)
    folded = folded.reshape(b * s, xb.shape[1], length)
    caches = []
    h = folded
    for conv in params.branch.convs:
        y, cc = conv_forward(h, conv)
        a, rc = relu_forward(y)
        caches.append((cc, rc))
        h = a
    pooled = h.mean(axis=2)  # [B*S, branch_channels]
    scores, dcache = dense_forward(pooled, params.branch.head)
    return scores.reshape(b, s), (caches, dcache, h.shape, b, s)


def _branch_backward(params: NetParams, dscores: np.ndarray, cache, grads, t_full: int):
    caches, dcache, h_shape, b, s = cache
    length = params.config.segment_len
    dy = dscores.reshape(b * s, 1)
    dpooled, dw, db = dense_backward(dy, dcache, params.branch.head)
    grads["branch.head.weights"] = dw
    grads["branch.head.bias"] = db
    dh = np.broadcast_to(dpooled[:, :, None] / h_shape[2], h_shape).copy()
    for i in range(len(params.branch.convs) - 1, -1, -1):
        cc, rc = caches[i]
        dy = relu_backward(dh, rc)
        dh, dw, db = conv_backward(dy, cc)
        grads[f"branch.convs.{i}.weights"] = dw
        grads[f"branch.convs.{i}.bias"] = db
    dxs = dh.reshape(b, s, -1, length).transpose(0, 2, 1, 3).reshape(b, -1, s * length)
    if s * length < t_full:
        dxs = np.pad(dxs, ((0, 0), (0, 0), (0, t_full - s * length)))
    return dxs


def spatial_attention_weights(params: NetParams, branch_x: np.ndarray) -> np.ndarray:
    """Softmax-normalized per-segment weights from the branch path.

    Accepts [C, T] (returns [S]) or [B, C, T] (returns [B, S]).
    """
    xb = np.asarray(branch_x, dtype=float)
    single = xb.ndim == 2
    if single:
        xb = xb[None]
    if xb.ndim != 3:
        raise ParameterError(f"expected [C, T] or [B, C, T], got shape {branch_x.shape}")
    s = _segment_count(params, xb.shape[2])
    scores, _ = _branch_forward(params, xb, s)
    w = softmax(scores, axis=1)
    return w[0] if single else w


def model_forward(params: NetParams, main_x: np.ndarray, branch_x: np.ndarray, hard: bool = False):
    """Full forward pass.

    main_x and branch_x are [B, C_in, T] (or [C_in, T], auto-batched) over the
    same time grid.  Returns (logits [B, n_out], cache); the cache holds the
    attention weights under key 'attention'.
    """
    xm = np.asarray(main_x, dtype=float)
    xb = np.asarray(branch_x, dtype=float)
    single = xm.ndim == 2
    if single:
        xm = xm[None]
        xb = xb[None]
    if xm.ndim != 3 or xb.ndim != 3:
        raise ParameterError("inputs must be [B, C, T] or [C, T]")
    if xm.shape[0] != xb.shape[0] or xm.shape[2] != xb.shape[2]:
        raise ParameterError(
            f"main {xm.shape} and branch {xb.shape} must share batch size and length"
        )
    b, _, t = xm.shape
    s = _segment_count(params, t)
    length = params.config.segment_len

    feat, feat_cache = features_forward(params, xm)
    trimmed = feat[:, :, : s * length]
    pool = trimmed.reshape(b, feat.shape[1], s, length).mean(axis=3)  # [B, C, S]

    flat = pool.transpose(0, 2, 1).reshape(b * s, -1)
    seg_logits_flat, cls1_cache = dense_forward(flat, params.classifier1)
    seg_logits = seg_logits_flat.reshape(b, s, -1).transpose(0, 2, 1)  # [B, n_classes, S]

    scores, branch_cache = _branch_forward(params, xb, s)
    att = softmax(scores, axis=1)  # [B, S]

    if hard:
        votes = np.zeros_like(seg_logits)
        top = np.argmax(seg_logits, axis=1)  # [B, S]
        np.put_along_axis(votes, top[:, None, :], 1.0, axis=1)
        evidence = votes
    else:
        evidence = seg_logits

    z = np.einsum("bs,bos->bo", att, evidence)  # [B, n_classes]
    logits, cls2_cache = dense_forward(z, params.classifier2)

    cache = {
        "feat_cache": feat_cache,
        "feat_shape": feat.shape,
        "cls1_cache": cls1_cache,
        "seg_logits": seg_logits,
        "branch_cache": branch_cache,
        "attention": att,
        "cls2_cache": cls2_cache,
        "dims": (b, s, t),
        "hard": hard,
        "single": single,
    }
    return (logits[0] if single else logits), cache


def model_backward(params: NetParams, dlogits: np.ndarray, cache) -> dict:
    """Exact gradients of every parameter for the cached forward pass."""
    if cache["hard"]:
        raise ParameterError("hard-decision forward is not differentiable; train with hard=False")
    b, s, t = cache["dims"]
    length = params.config.segment_len
    dlogits = np.asarray(dlogits, dtype=float)
    if cache["single"]:
        dlogits = dlogits[None]

    grads: dict = {}
    dz, dw, db = dense_backward(dlogits, cache["cls2_cache"], params.classifier2)
    grads["classifier2.weights"] = dw
    grads["classifier2.bias"] = db

    att = cache["attention"]
    seg_logits = cache["seg_logits"]
    datt = np.einsum("bo,bos->bs", dz, seg_logits)
    dseg_logits = np.einsum("bo,bs->bos", dz, att)

    dscores = softmax_backward(datt, att, axis=1)
    dxb = _branch_backward(params, dscores, cache["branch_cache"], grads, t)

    dflat = dseg_logits.transpose(0, 2, 1).reshape(b * s, -1)
    dpool_flat, dw, db = dense_backward(dflat, cache["cls1_cache"], params.classifier1)
    grads["classifier1.weights"] = dw
    grads["classifier1.bias"] = db
    dpool = dpool_flat.reshape(b, s, -1).transpose(0, 2, 1)  # [B, C, S]

    feat_shape = cache["feat_shape"]
    dfeat = np.zeros(feat_shape)
    dtrim = np.broadcast_to(
        dpool[:, :, :, None] / length, (b, feat_shape[1], s, length)
    ).reshape(b, feat_shape[1], s * length)
    dfeat[:, :, : s * length] = dtrim
    dxm = features_backward(params, dfeat, cache["feat_cache"], grads)

    grads["_input_main"] = dxm
    grads["_input_branch"] = dxb
    return grads


def relu_kink_margin(params: NetParams, main_x: np.ndarray, branch_x: np.ndarray) -> float:
    """Smallest |pre-activation| over every ReLU for this batch.

    Finite-difference gradient verification is only trustworthy when this
    margin is comfortably larger than the probe step.
    """
    xm = np.asarray(main_x, dtype=float)
    xb = np.asarray(branch_x, dtype=float)
    if xm.ndim == 2:
        xm = xm[None]
    if xb.ndim == 2:
        xb = xb[None]
    margin = np.inf
    h = xm
    for conv in params.encoder:
        y, _ = conv_forward(h, conv)
        margin = min(margin, float(np.abs(y).min()))
        h = np.maximum(y, 0.0)
    for blk in params.tcn.blocks:
        y1, _ = conv_forward(h, blk.conv1)
        margin = min(margin, float(np.abs(y1).min()))
        a1 = np.maximum(y1, 0.0)
        y2, _ = conv_forward(a1, blk.conv2)
        h = h + y2
    s = _segment_count(params, xb.shape[2])
    length = params.config.segment_len
    b = xb.shape[0]
    folded = (
        xb[:, :, : s * length]
        .reshape(b, xb.shape[1], s, length)
        .transpose(0, 2, 1, 3)
        .reshape(b * s, xb.shape[1], length)
    )
    hb = folded
    for conv in params.branch.convs:
        y, _ = conv_forward(hb, conv)
        margin = min(margin, float(np.abs(y).min()))
        hb = np.maximum(y, 0.0)
    return margin


def cross_entropy(logits: np.ndarray, labels: np.ndarray):
    """Mean cross-entropy over the batch; returns (loss, dlogits)."""
    logits = np.atleast_2d(np.asarray(logits, dtype=float))
    labels = np.atleast_1d(np.asarray(labels))
    b, k = logits.shape
    if labels.shape != (b,):
        raise ParameterError("labels must be [batch]")
    if labels.min() < 0 or labels.max() >= k:
        raise ParameterError(f"labels must lie in [0, {k})")
    shifted = logits - logits.max(axis=1, keepdims=True)
    logz = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    logp = shifted - logz
    loss = float(-np.mean(logp[np.arange(b), labels]))
    p = np.exp(logp)
    onehot = np.zeros_like(p)
    onehot[np.arange(b), labels] = 1.0
    dlogits = (p - onehot) / b
    return loss, dlogits


def iter_arrays(params: NetParams):
    """Yield (path, array) for every trainable array, in a fixed order."""
    for i, conv in enumerate(params.encoder):
        yield f"encoder.{i}.weights", conv.weights
        yield f"encoder.{i}.bias", conv.bias
    for i, blk in enumerate(params.tcn.blocks):
        for sub in ("conv1", "conv2"):
            layer = getattr(blk, sub)
            yield f"tcn.blocks.{i}.{sub}.weights", layer.weights
            yield f"tcn.blocks.{i}.{sub}.bias", layer.bias
    yield "tcn.merge.weights", params.tcn.merge.weights
    yield "tcn.merge.bias", params.tcn.merge.bias
    yield "classifier1.weights", params.classifier1.weights
    yield "classifier1.bias", params.classifier1.bias
    for i, conv in enumerate(params.branch.convs):
        yield f"branch.convs.{i}.weights", conv.weights
        yield f"branch.convs.{i}.bias", conv.bias
    yield "branch.head.weights", params.branch.head.weights
    yield "branch.head.bias", params.branch.head.bias
    yield "classifier2.weights", params.classifier2.weights
    yield "classifier2.bias", params.classifier2.bias


def _resolve(params: NetParams, path: str):
    obj = params
    parts = path.split(".")
    for part in parts[:-1]:
        obj = obj[int(part)] if part.isdigit() else getattr(obj, part)
    return obj, parts[-1]


def get_array(params: NetParams, path: str) -> np.ndarray:
    obj, leaf = _resolve(params, path)
    return getattr(obj, leaf)


def set_array(params: NetParams, path: str, value: np.ndarray) -> None:
    obj, leaf = _resolve(params, path)
    current = getattr(obj, leaf)
    if current.shape != value.shape:
        raise ParameterError(f"shape mismatch at {path}: {current.shape} vs {value.shape}")
    setattr(obj, leaf, np.asarray(value, dtype=float))


def clone_params(params: NetParams) -> NetParams:
    import copy

    return copy.deepcopy(params)


def param_count(params: NetParams) -> int:
    return sum(arr.size for _, arr in iter_arrays(params))
