"""Permutation-invariant set function and its 1x1-convolution equivalent.

A set function maps an unordered point set to a single vector:

    f(x_1, ..., x_n) = gamma( MAX_i h(x_i) )

with h and gamma plain feed-forward MLPs and MAX the elementwise maximum.
The same map evaluated on the image grid is a stack of 1x1 convolutions
(h applied independently at every pixel) followed by global max pooling
and gamma. :func:`set_function` and :func:`grid_function` implement the
two readings; making their outputs agree on every patch is the executable
form of the representation-equivalence argument.

Pooling can optionally be restricted to foreground pixels through a
binary mask (max or average mode). NaNs are treated as errors, never
propagated through a max.
"""

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyForegroundError, EmptyInputError, ParseError, ShapeError
from .patches import PatchTensor

_ACTIVATIONS = ("relu", "identity")


@dataclass
class MlpLayer:
    weight: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str = "relu"

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise ShapeError(
                f"layer needs weight (out, in) and bias (out,), got "
                f"{self.weight.shape} and {self.bias.shape}"
            )
        if self.activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if not (np.isfinite(self.weight).all() and np.isfinite(self.bias).all()):
            raise ValueError("layer parameters must be finite")


@dataclass
class MlpParams:
    layers: list[MlpLayer] = field(default_factory=list)

    def __post_init__(self):
        for prev, cur in zip(self.layers, self.layers[1:]):
            if cur.weight.shape[1] != prev.weight.shape[0]:
                raise ShapeError(
                    f"layer dimensions do not chain: {prev.weight.shape[0]} -> "
                    f"{cur.weight.shape[1]}"
                )

    @property
    def in_dim(self) -> int:
        return self.layers[0].weight.shape[1]

    @property
    def out_dim(self) -> int:
        return self.layers[-1].weight.shape[0]


def identity_mlp(dim: int) -> MlpParams:
    """An MLP that returns its input unchanged."""
    return MlpParams([MlpLayer(np.eye(dim), np.zeros(dim), "identity")])


def random_mlp(dims, rng, hidden_activation="relu", output_activation="identity") -> MlpParams:
    """Seeded MLP with weights and biases uniform in [-1/sqrt(in), 1/sqrt(in)].

    dims is the chain of layer widths, e.g. (3, 64, 128, 1024).
    """
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    layers = []
    for i, (d_in, d_out) in enumerate(zip(dims, dims[1:])):
        bound = 1.0 / np.sqrt(d_in)
        act = output_activation if i == len(dims) - 2 else hidden_activation
        layers.append(MlpLayer(
            weight=rng.uniform(-bound, bound, size=(d_out, d_in)),
            bias=rng.uniform(-bound, bound, size=d_out),
            activation=act,
        ))
    return MlpParams(layers)


def apply_mlp(x, params: MlpParams) -> np.ndarray:
    """Apply the MLP along the last axis of x, shape (..., in) -> (..., out).

    Every leading shape is flattened to one batch for the matrix products,
    so a pixel grid and the flattened point set go through bit-identical
    arithmetic.
    """
    x = np.asarray(x, dtype=np.float64)
    lead = x.shape[:-1]
    out = x.reshape(-1, x.shape[-1]) if x.ndim != 1 else x[None, :]
    for layer in params.layers:
        if out.shape[-1] != layer.weight.shape[1]:
            raise ShapeError(
                f"input dimension {out.shape[-1]} does not match layer "
                f"expecting {layer.weight.shape[1]}"
            )
        out = out @ layer.weight.T + layer.bias
        if layer.activation == "relu":
            out = np.maximum(out, 0.0)
    return out[0] if x.ndim == 1 else out.reshape(*lead, -1)


def set_function(points, h: MlpParams, gamma: MlpParams) -> np.ndarray:
    """gamma( elementwise max over points of h(point) ); order-independent."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ShapeError(f"point set must be (M, D), got shape {points.shape}")
    if points.shape[0] == 0:
        raise EmptyInputError("set function is undefined on an empty point set")
    feats = apply_mlp(points, h)
    if np.isnan(feats).any():
        raise ValueError("NaN in point features")
    return apply_mlp(feats.max(axis=0), gamma)


def mask_global_pool(features, mask, mode: str = "max") -> np.ndarray:
    """Pool an (H, W, F) feature map over the pixels where mask is set.

    mode 'max' takes the per-feature maximum, 'avg' the per-feature mean.
    An all-zero mask raises EmptyForegroundError; callers that want the
    conventional behaviour fall back to pooling over the full grid.
    """
    features = np.asarray(features, dtype=np.float64)
    mask = np.asarray(mask)
    if features.ndim != 3:
        raise ShapeError(f"feature map must be (H, W, F), got {features.shape}")
    if mask.shape != features.shape[:2]:
        raise ShapeError(
            f"mask shape {mask.shape} does not match grid {features.shape[:2]}"
        )
    if mode not in ("max", "avg"):
        raise ValueError(f"mode must be 'max' or 'avg', got {mode!r}")
    selected = features[mask.astype(bool)]
    if selected.shape[0] == 0:
        raise EmptyForegroundError("mask selects no pixels")
    if np.isnan(selected).any():
        raise ValueError("NaN in pooled features")
    return selected.max(axis=0) if mode == "max" else selected.mean(axis=0)


def grid_function(tensor, h: MlpParams, gamma: MlpParams, mask=None,
                  mode: str = "max") -> np.ndarray:
    """Grid reading of the set function: 1x1 conv, (mask) pooling, gamma.

    h is applied independently at every pixel (a 1x1 receptive field),
    the H x W feature map is pooled globally -- over foreground pixels
    only when a mask is given -- and gamma maps the pooled vector to the
    output. Without a mask, max mode reproduces set_function on the
    flattened pixels exactly.
    """
    data = tensor.data if isinstance(tensor, PatchTensor) else np.asarray(tensor, dtype=np.float64)
    if data.ndim != 3:
        raise ShapeError(f"grid input must be (H, W, C), got shape {data.shape}")
    feats = apply_mlp(data, h)
    if mask is None:
        flat = feats.reshape(-1, feats.shape[-1])
        if np.isnan(flat).any():
            raise ValueError("NaN in pixel features")
        if mode == "max":
            pooled = flat.max(axis=0)
        elif mode == "avg":
            pooled = flat.mean(axis=0)
        else:
            raise ValueError(f"mode must be 'max' or 'avg', got {mode!r}")
    else:
        pooled = mask_global_pool(feats, mask, mode)
    return apply_mlp(pooled, gamma)


# --- parameter fixture files -----------------------------------------------
#
# mlp-fixture v1 seed <seed-or-none> layers <L>
# layer <out> <in> <activation>
# <out lines of in weight values>        (row i of the weight matrix)
# <1 line of out bias values>

_MAGIC = "mlp-fixture v1"


def dump_mlp(params: MlpParams, seed=None) -> str:
    out = io.StringIO()
    out.write(f"{_MAGIC} seed {'none' if seed is None else seed} "
              f"layers {len(params.layers)}\n")
    for layer in params.layers:
        o, i = layer.weight.shape
        out.write(f"layer {o} {i} {layer.activation}\n")
        for row in layer.weight:
            out.write(" ".join(format(v, ".17g") for v in row) + "\n")
        out.write(" ".join(format(v, ".17g") for v in layer.bias) + "\n")
    return out.getvalue()


def parse_mlp(text: str):
    """Returns (MlpParams, seed) where seed is None when not recorded."""
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty MLP fixture")
    head = lines[0].split()
    if lines[0].rsplit(" seed", 1)[0] != _MAGIC or len(head) != 6 or head[4] != "layers":
        raise ParseError(f"malformed fixture header: {lines[0]!r}")
    seed = None if head[3] == "none" else int(head[3])
    n_layers = int(head[5])
    layers = []
    pos = 1
    for _ in range(n_layers):
        if pos >= len(lines):
            raise ParseError("truncated MLP fixture")
        fields = lines[pos].split()
        if len(fields) != 4 or fields[0] != "layer":
            raise ParseError(f"expected layer header at line {pos + 1}: {lines[pos]!r}")
        o, i, act = int(fields[1]), int(fields[2]), fields[3]
        if pos + 1 + o >= len(lines):
            raise ParseError("truncated MLP fixture")
        rows = lines[pos + 1:pos + 1 + o]
        bias_line = lines[pos + 1 + o]
        try:
            weight = np.array([[float(v) for v in r.split()] for r in rows])
            bias = np.array([float(v) for v in bias_line.split()])
        except (ValueError, IndexError) as e:
            raise ParseError(f"bad layer values: {e}") from None
        if weight.shape != (o, i) or bias.shape != (o,):
            raise ParseError(f"layer values have wrong shape: {weight.shape}, {bias.shape}")
        layers.append(MlpLayer(weight, bias, act))
        pos += 2 + o
    return MlpParams(layers), seed


# --- equivalence harness ---------------------------------------------------

_CONFIG_FOR_CHANNELS = {1: "z", 2: "xz", 3: "xyz"}


def equivalence_trials(trials: int = 100, seed: int = 0, max_side: int = 32,
                       inject_fault: bool = False, tensors=()) -> np.ndarray:
    """Run seeded set-vs-grid trials; returns the absolute deviation per trial.

    Each trial draws a random patch (side up to max_side, 1-3 channels),
    random h widths up to (64, 128, 1024) and gamma widths up to (512, 256),
    then compares grid_function (no mask, max pooling) against set_function
    on the flattened pixels. Extra tensors, e.g. built from real depth
    patches, are appended as additional trials with fresh parameters.
    inject_fault permutes the first-layer weights on the grid path only,
    as a negative control that the harness can detect disagreement.
    """
    rng = np.random.default_rng(seed)
    devs = []

    def one_trial(data):
        c = data.shape[-1]
        h_dims = (c,
                  int(rng.integers(2, 65)),
                  int(rng.integers(2, 129)),
                  int(rng.integers(2, 1025)))
        g_dims = (h_dims[-1],
                  int(rng.integers(2, 513)),
                  int(rng.integers(2, 257)),
                  int(rng.integers(1, 17)))
        h = random_mlp(h_dims, rng, output_activation="relu")
        gamma = random_mlp(g_dims, rng)
        h_grid = h
        if inject_fault:
            first = h.layers[0]
            h_grid = MlpParams([MlpLayer(first.weight[::-1].copy(),
                                         first.bias[::-1].copy(),
                                         first.activation)] + h.layers[1:])
        via_grid = grid_function(data, h_grid, gamma, mask=None, mode="max")
        via_set = set_function(data.reshape(-1, c), h, gamma)
        return float(np.abs(via_grid - via_set).max())

    for _ in range(trials):
        n = int(rng.integers(1, max_side + 1)) if not inject_fault \
            else int(rng.integers(4, max_side + 1))
        c = int(rng.choice([1, 2, 3]))
        data = rng.normal(size=(n, n, c))
        # knock out a few pixels to mimic invalid-depth zero vectors
        holes = rng.random(size=(n, n)) < 0.1
        data[holes] = 0.0
        devs.append(one_trial(data))

    for t in tensors:
        data = t.data if isinstance(t, PatchTensor) else np.asarray(t, dtype=np.float64)
        devs.append(one_trial(data))

    return np.array(devs)
