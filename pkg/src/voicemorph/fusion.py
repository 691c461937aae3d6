"""Forward-inference engine for the parameter-prediction network.

Two branch encoders (1D conv -> ReLU -> 1D conv -> ReLU -> group norm) embed
the mapped phonetic features and the prosodic features; the branches fuse by
element-wise addition, pass through sinusoidal positional encoding and three
pre-norm self-attention layers, then a two-conv stack with a final layer norm,
and a linear head emitting one F0 channel plus the harmonic/noise filter rows.

The F0 channel is squashed to (40, 2000) Hz with a sigmoid so any weight
bundle yields synthesiser-legal parameters. Tensor names and shapes are fixed
by manifest() so trained weights are portable across implementations.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadConfigError,
    DimMismatchError,
    LengthMismatchError,
    MissingTensorError,
    ShapeMismatchError,
)
from .formats import FeatureSequence, SynthParamsSeq, WeightBundle
from .synth import HARM_FILTER_LEN, NOISE_FILTER_LEN

# small enough that normalized group variance stays within 1e-3 of 1 for
# realistically scaled activations
NORM_EPS = 1e-8
F0_FLOOR = 40.0
F0_SPAN = 1960.0


@dataclass(frozen=True)
class FusionConfig:
    d_phon_in: int
    d_pro_in: int
    d_model: int = 256
    kernel_size: int = 3
    n_attn_layers: int = 3
    n_heads: int = 4
    groups: int = 8

    def __post_init__(self):
        if self.d_phon_in < 1 or self.d_pro_in < 1:
            raise BadConfigError("input dims must be >= 1")
        if self.d_model < 1 or self.n_attn_layers < 1:
            raise BadConfigError("d_model and n_attn_layers must be >= 1")
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise BadConfigError("kernel_size must be odd and positive")
        if self.d_model % self.n_heads != 0:
            raise BadConfigError("d_model must be divisible by n_heads")
        if self.d_model % self.groups != 0:
            raise BadConfigError("d_model must be divisible by groups")

    @property
    def out_dim(self) -> int:
        return 1 + HARM_FILTER_LEN + NOISE_FILTER_LEN


def manifest(cfg: FusionConfig) -> list:
    """Ordered (name, shape) pairs every weight bundle must provide."""
    d, k = cfg.d_model, cfg.kernel_size
    entries = []
    for branch, d_in in (("enc_phon", cfg.d_phon_in), ("enc_pro", cfg.d_pro_in)):
        entries += [
            (f"{branch}.conv1.weight", (d, d_in, k)),
            (f"{branch}.conv1.bias", (d,)),
            (f"{branch}.conv2.weight", (d, d, k)),
            (f"{branch}.conv2.bias", (d,)),
            (f"{branch}.norm.scale", (d,)),
            (f"{branch}.norm.offset", (d,)),
        ]
    for i in range(cfg.n_attn_layers):
        entries += [(f"attn{i}.ln.scale", (d,)), (f"attn{i}.ln.offset", (d,))]
        for proj in ("q", "k", "v", "out"):
            entries += [
                (f"attn{i}.{proj}.weight", (d, d)),
                (f"attn{i}.{proj}.bias", (d,)),
            ]
    entries += [
        ("post.conv1.weight", (d, d, k)),
        ("post.conv1.bias", (d,)),
        ("post.conv2.weight", (d, d, k)),
        ("post.conv2.bias", (d,)),
        ("post.norm.scale", (d,)),
        ("post.norm.offset", (d,)),
        ("head.weight", (cfg.out_dim, d)),
        ("head.bias", (cfg.out_dim,)),
    ]
    return entries


@dataclass(frozen=True)
class FusionNet:
    config: FusionConfig
    params: dict

    def tensor(self, name: str) -> np.ndarray:
        return self.params[name].astype(np.float64)

    def to_bundle(self) -> WeightBundle:
        return WeightBundle(tensors=tuple(
            (name, shape, self.params[name].reshape(-1))
            for name, shape in manifest(self.config)
        ))


def init_random(cfg: FusionConfig, seed: int) -> FusionNet:
    """Deterministic random init: uniform [-1/sqrt(fan_in), +] per weight tensor.

    Normalization scales/offsets start at 1/0 so fresh nets actually normalize.
    """
    rng = np.random.default_rng(seed)
    entries = manifest(cfg)
    shapes = dict(entries)
    params = {}
    for name, shape in entries:
        if name.endswith(".scale"):
            params[name] = np.ones(shape, dtype=np.float32)
        elif name.endswith(".offset"):
            params[name] = np.zeros(shape, dtype=np.float32)
        else:
            fan_shape = shapes[name[:-5] + ".weight"] if name.endswith(".bias") else shape
            bound = 1.0 / np.sqrt(float(np.prod(fan_shape[1:])))
            params[name] = rng.uniform(-bound, bound, shape).astype(np.float32)
    return FusionNet(config=cfg, params=params)


def load_weights(bundle: WeightBundle, cfg: FusionConfig) -> FusionNet:
    """Build a net from a weight bundle, validating against the manifest."""
    available = bundle.as_dict()
    expected = manifest(cfg)
    expected_names = {name for name, _ in expected}
    for name in available:
        if name not in expected_names:
            raise ShapeMismatchError(f"unexpected tensor {name!r} not in manifest")
    params = {}
    for name, shape in expected:
        if name not in available:
            raise MissingTensorError(f"bundle is missing tensor {name!r}")
        tensor = available[name]
        if tensor.shape != shape:
            raise ShapeMismatchError(
                f"tensor {name!r} has shape {tensor.shape}, manifest requires {shape}"
            )
        params[name] = tensor.astype(np.float32)
    return FusionNet(config=cfg, params=params)


def _conv1d_same(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """x: (T, C_in), weight: (C_out, C_in, k) -> (T, C_out), zero same-padding."""
    k = weight.shape[2]
    pad = (k - 1) // 2
    xp = np.pad(x, ((pad, pad), (0, 0)))
    out = np.tile(bias, (x.shape[0], 1))
    for dk in range(k):
        out += xp[dk:dk + x.shape[0]] @ weight[:, :, dk].T
    return out


def _group_norm(x: np.ndarray, scale: np.ndarray, offset: np.ndarray,
                groups: int) -> np.ndarray:
    """Standardize each frame's channel groups, then apply per-channel affine."""
    t, c = x.shape
    g = x.reshape(t, groups, c // groups)
    mean = g.mean(axis=2, keepdims=True)
    var = g.var(axis=2, keepdims=True)
    normed = ((g - mean) / np.sqrt(var + NORM_EPS)).reshape(t, c)
    return normed * scale + offset


def _layer_norm(x: np.ndarray, scale: np.ndarray, offset: np.ndarray) -> np.ndarray:
    mean = x.mean(axis=1, keepdims=True)
    var = x.var(axis=1, keepdims=True)
    return (x - mean) / np.sqrt(var + NORM_EPS) * scale + offset


def _softmax(x: np.ndarray, axis: int) -> np.ndarray:
    shifted = x - x.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def _positional_encoding(t: int, d: int) -> np.ndarray:
    pos = np.arange(t)[:, None]
    idx = np.arange(0, d, 2)[None, :]
    angle = pos / np.power(10000.0, idx / d)
    pe = np.zeros((t, d))
    pe[:, 0::2] = np.sin(angle)
    pe[:, 1::2] = np.cos(angle[:, :pe[:, 1::2].shape[1]])
    return pe


def _branch_forward(net: FusionNet, x: np.ndarray, branch: str) -> np.ndarray:
    h = _conv1d_same(x, net.tensor(f"{branch}.conv1.weight"), net.tensor(f"{branch}.conv1.bias"))
    h = np.maximum(h, 0.0)
    h = _conv1d_same(h, net.tensor(f"{branch}.conv2.weight"), net.tensor(f"{branch}.conv2.bias"))
    h = np.maximum(h, 0.0)
    return _group_norm(h, net.tensor(f"{branch}.norm.scale"),
                       net.tensor(f"{branch}.norm.offset"), net.config.groups)


def _attention_layer(net: FusionNet, x: np.ndarray, layer: int) -> np.ndarray:
    cfg = net.config
    pre = _layer_norm(x, net.tensor(f"attn{layer}.ln.scale"),
                      net.tensor(f"attn{layer}.ln.offset"))
    t, d = pre.shape
    heads = cfg.n_heads
    d_head = d // heads

    def project(name):
        w = net.tensor(f"attn{layer}.{name}.weight")
        b = net.tensor(f"attn{layer}.{name}.bias")
        return (pre @ w.T + b).reshape(t, heads, d_head).transpose(1, 0, 2)

    q, k, v = project("q"), project("k"), project("v")
    scores = q @ k.transpose(0, 2, 1) / np.sqrt(d_head)
    mixed = _softmax(scores, axis=2) @ v                     # (heads, T, d_head)
    merged = mixed.transpose(1, 0, 2).reshape(t, d)
    out = merged @ net.tensor(f"attn{layer}.out.weight").T + net.tensor(f"attn{layer}.out.bias")
    return x + out


def _check_input(fs: FeatureSequence, expected_dim: int, what: str) -> np.ndarray:
    if fs.dim != expected_dim:
        raise DimMismatchError(f"{what} dim {fs.dim} != configured {expected_dim}")
    return fs.frames.astype(np.float64)


def enc_phon_forward(net: FusionNet, x_phon: FeatureSequence) -> FeatureSequence:
    """Phonetic branch alone; exposed because the leakage loss compares its outputs."""
    x = _check_input(x_phon, net.config.d_phon_in, "phonetic input")
    return FeatureSequence(frames=_branch_forward(net, x, "enc_phon"),
                           hop_samples=x_phon.hop_samples)


def enc_pro_forward(net: FusionNet, x_pro: FeatureSequence) -> FeatureSequence:
    """Prosody branch alone."""
    x = _check_input(x_pro, net.config.d_pro_in, "prosodic input")
    return FeatureSequence(frames=_branch_forward(net, x, "enc_pro"),
                           hop_samples=x_pro.hop_samples)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def forward(net: FusionNet, x_phon: FeatureSequence, x_pro: FeatureSequence) -> SynthParamsSeq:
    """Full forward pass from aligned feature sequences to synthesiser parameters."""
    if x_phon.n_frames != x_pro.n_frames:
        raise LengthMismatchError(
            f"frame counts differ: {x_phon.n_frames} vs {x_pro.n_frames}"
        )
    if x_phon.hop_samples != x_pro.hop_samples:
        raise LengthMismatchError(
            f"hops differ: {x_phon.hop_samples} vs {x_pro.hop_samples}"
        )
    phon = _check_input(x_phon, net.config.d_phon_in, "phonetic input")
    pro = _check_input(x_pro, net.config.d_pro_in, "prosodic input")

    h = _branch_forward(net, phon, "enc_phon") + _branch_forward(net, pro, "enc_pro")
    h = h + _positional_encoding(*h.shape)
    for layer in range(net.config.n_attn_layers):
        h = _attention_layer(net, h, layer)

    h = _conv1d_same(h, net.tensor("post.conv1.weight"), net.tensor("post.conv1.bias"))
    h = np.maximum(h, 0.0)
    h = _conv1d_same(h, net.tensor("post.conv2.weight"), net.tensor("post.conv2.bias"))
    h = np.maximum(h, 0.0)
    h = _layer_norm(h, net.tensor("post.norm.scale"), net.tensor("post.norm.offset"))

    z = h @ net.tensor("head.weight").T + net.tensor("head.bias")
    f0 = F0_FLOOR + F0_SPAN * _sigmoid(z[:, 0])
    return SynthParamsSeq(
        f0_hz=f0,
        harm_logmag=z[:, 1:1 + HARM_FILTER_LEN],
        noise_logmag=z[:, 1 + HARM_FILTER_LEN:],
        hop_samples=x_phon.hop_samples,
    )
