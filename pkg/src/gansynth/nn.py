"""Small feed-forward networks with hand-written backpropagation and Adam.

Parameters of a network live in one flat buffer; each :class:`DenseLayer`
holds reshaped views into it, so a single fused Adam call updates the whole
network.  Internally activations are kept feature-major (``dim x batch``),
which is the fast layout for the BLAS calls at GAN batch sizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels

BCE_EPSILON = 1e-7


class TrainingDivergedError(FloatingPointError):
    """A loss or gradient became non-finite."""


@dataclass(frozen=True)
class Activation:
    name: str
    slope: float = 0.0

    def __post_init__(self):
        if self.name not in ("leaky_relu", "sigmoid", "identity"):
            raise ValueError(f"unknown activation {self.name!r}")

    @classmethod
    def leaky_relu(cls, slope=0.2):
        return cls("leaky_relu", float(slope))

    @classmethod
    def sigmoid(cls):
        return cls("sigmoid")

    @classmethod
    def identity(cls):
        return cls("identity")

    def to_dict(self):
        if self.name == "leaky_relu":
            return {"name": self.name, "slope": self.slope}
        return {"name": self.name}

    @classmethod
    def from_dict(cls, data):
        return cls(data["name"], float(data.get("slope", 0.0)))


@dataclass
class DenseLayer:
    weights: np.ndarray  # (out_dim, in_dim), view into the network buffer
    biases: np.ndarray  # (out_dim,)
    activation: Activation

    @property
    def in_dim(self):
        return self.weights.shape[1]

    @property
    def out_dim(self):
        return self.weights.shape[0]


def _layer_views(buffer, dims):
    views = []
    offset = 0
    for d_in, d_out in zip(dims[:-1], dims[1:]):
        w = buffer[offset:offset + d_in * d_out].reshape(d_out, d_in)
        offset += d_in * d_out
        b = buffer[offset:offset + d_out]
        offset += d_out
        views.append((w, b))
    return views


def parameter_count(dims):
    return sum(a * b + b for a, b in zip(dims[:-1], dims[1:]))


class MlpNetwork:
    """Ordered dense layers over one flat parameter buffer.

    ``dropout_probability`` is applied (inverted dropout) after every hidden
    layer, and only on forward passes made with ``training=True``.
    """

    def __init__(self, dims, activations, params=None, dropout_probability=0.0, dtype=np.float64):
        dims = [int(d) for d in dims]
        if len(dims) < 2:
            raise ValueError("a network needs at least an input and an output dimension")
        if any(d < 1 for d in dims):
            raise ValueError(f"layer dimensions must be positive, got {dims}")
        if len(activations) != len(dims) - 1:
            raise ValueError(
                f"{len(dims) - 1} weight layers need as many activations, got {len(activations)}"
            )
        if not 0.0 <= dropout_probability < 1.0:
            raise ValueError("dropout probability must lie in [0, 1)")
        self.dtype = np.dtype(dtype)
        size = parameter_count(dims)
        if params is None:
            params = np.zeros(size, dtype=self.dtype)
        else:
            params = np.ascontiguousarray(params, dtype=self.dtype).reshape(-1)
            if params.shape[0] != size:
                raise ValueError(f"expected {size} parameters, got {params.shape[0]}")
        self.params = params
        self.dims = dims
        self.dropout_probability = float(dropout_probability)
        self.layers = [
            DenseLayer(w, b, act) for (w, b), act in zip(_layer_views(params, dims), activations)
        ]

    @property
    def activations(self):
        return [layer.activation for layer in self.layers]

    @property
    def in_dim(self):
        return self.dims[0]

    @property
    def out_dim(self):
        return self.dims[-1]

    def copy(self):
        return MlpNetwork(
            self.dims, self.activations, self.params.copy(), self.dropout_probability, self.dtype
        )

    def __repr__(self):
        arch = "->".join(str(d) for d in self.dims)
        return f"MlpNetwork({arch}, dropout={self.dropout_probability}, dtype={self.dtype.name})"


def init_network(layer_dims, activations, rng, dropout_probability=0.0, dtype=np.float64):
    """Glorot-uniform weights, zero biases."""
    net = MlpNetwork(layer_dims, activations, None, dropout_probability, dtype)
    for layer in net.layers:
        limit = np.sqrt(6.0 / (layer.in_dim + layer.out_dim))
        layer.weights[...] = rng.uniform(-limit, limit, size=layer.weights.shape)
    return net


@dataclass
class ForwardCache:
    net_id: int
    inputs: list  # per-layer input, feature-major
    preacts: list  # per-layer pre-activation, feature-major
    masks: list  # per-layer dropout mask or None
    output: np.ndarray  # feature-major
    vector_input: bool


@dataclass
class Gradients:
    flat: np.ndarray
    weights: list = field(default_factory=list)
    biases: list = field(default_factory=list)
    input: np.ndarray | None = None


def _activate(z, activation):
    if activation.name == "leaky_relu":
        return kernels.leaky_forward(z, activation.slope)
    if activation.name == "sigmoid":
        return kernels.sigmoid(z)
    return z


def forward(net, inputs, training=False, rng=None):
    """Run ``inputs`` (a vector or a ``batch x in_dim`` matrix) through ``net``.

    Returns ``(output, cache)``; the output has the same rank as the input.
    """
    x = np.asarray(inputs)
    vector_input = x.ndim == 1
    if vector_input:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != net.in_dim:
        raise ValueError(f"expected input width {net.in_dim}, got shape {np.shape(inputs)}")
    rate = net.dropout_probability
    use_dropout = training and rate > 0.0
    if use_dropout and rng is None:
        raise ValueError("training-mode dropout needs a random generator")

    h = np.ascontiguousarray(x.T, dtype=net.dtype)
    inputs_fm, preacts, masks = [], [], []
    last = len(net.layers) - 1
    for i, layer in enumerate(net.layers):
        inputs_fm.append(h)
        z = layer.weights @ h
        z += layer.biases[:, None]
        preacts.append(z)
        act = layer.activation
        if i < last and use_dropout:
            u = rng.random(z.shape, dtype=net.dtype)
            if act.name == "leaky_relu":
                h, mask = kernels.leaky_dropout_forward(z, u, act.slope, rate)
            else:
                keep = net.dtype.type(1.0 / (1.0 - rate))
                mask = np.where(u >= rate, keep, net.dtype.type(0))
                h = _activate(z, act) * mask
            masks.append(mask)
        else:
            h = _activate(z, act)
            masks.append(None)
    out = h.T
    if vector_input:
        out = out[0]
    cache = ForwardCache(id(net), inputs_fm, preacts, masks, h, vector_input)
    return out, cache


def backward(net, cache, loss_gradient, wrt_logits=False, input_gradient=False,
             param_gradients=True, out=None):
    """Exact gradients of a scalar loss given d(loss)/d(output).

    With ``wrt_logits=True`` the supplied gradient is taken with respect to
    the last layer's pre-activation instead (the fused sigmoid/BCE form).
    ``input_gradient=True`` also returns d(loss)/d(input) in ``Gradients.input``;
    ``param_gradients=False`` skips the weight gradients (``Gradients.flat``
    is then ``None``), for passes that only propagate to the input.
    ``out`` is an optional flat buffer, shaped like ``net.params``, to write
    the parameter gradients into; reusing one avoids a large allocation
    (and its page faults) per call.
    """
    if not (param_gradients or input_gradient):
        raise ValueError("nothing to compute: both parameter and input gradients disabled")
    if cache.net_id != id(net) or len(cache.preacts) != len(net.layers):
        raise ValueError("cache was produced by a different network")
    g = np.asarray(loss_gradient, dtype=net.dtype)
    if cache.vector_input:
        g = g[None, :] if g.ndim == 1 else g
    batch = cache.output.shape[1]
    if g.shape != (batch, net.out_dim):
        raise ValueError(f"loss gradient shape {g.shape} does not match output ({batch}, {net.out_dim})")
    g = np.ascontiguousarray(g.T)
    ones = np.ones(batch, dtype=net.dtype)

    flat = None
    if param_gradients:
        if out is None:
            flat = np.empty_like(net.params)
        elif out.shape != net.params.shape or out.dtype != net.params.dtype:
            raise ValueError("gradient buffer must match the parameter buffer")
        else:
            flat = out
    views = _layer_views(flat, net.dims) if param_gradients else None
    last_act = net.layers[-1].activation
    if not wrt_logits:
        g = _activation_backward(g, cache.preacts[-1], cache.output, last_act, None)

    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        if param_gradients:
            gw, gb = views[i]
            np.matmul(g, np.ascontiguousarray(cache.inputs[i].T), out=gw)
            np.matmul(g, ones, out=gb)  # row sums; a mat-vec beats sum(axis=1) here
        if i == 0 and not input_gradient:
            break
        g = layer.weights.T @ g
        if i > 0:
            prev = net.layers[i - 1]
            g = _activation_backward(g, cache.preacts[i - 1], None, prev.activation, cache.masks[i - 1])

    if param_gradients:
        grads = Gradients(flat, [w for w, _ in views], [b for _, b in views])
    else:
        grads = Gradients(None)
    if input_gradient:
        gi = g.T
        grads.input = gi[0] if cache.vector_input else np.ascontiguousarray(gi)
    return grads


def _activation_backward(g, z, post, activation, mask):
    g = np.ascontiguousarray(g)
    if activation.name == "leaky_relu":
        return kernels.leaky_backward(g, z, mask, activation.slope)
    if activation.name == "sigmoid":
        s = kernels.sigmoid(z) if post is None else post
        g = g * s * (1 - s)
    if mask is not None:
        g = g * mask
    return g


def bce_loss(prediction, target):
    """Binary cross-entropy, elementwise, with predictions clamped to [1e-7, 1 - 1e-7]."""
    p, t = _bce_args(prediction, target)
    loss = -(t * np.log(p) + (1.0 - t) * np.log1p(-p))
    return float(loss) if loss.ndim == 0 else loss


def bce_grad(prediction, target):
    """d(bce)/d(prediction), evaluated at the clamped prediction."""
    p, t = _bce_args(prediction, target)
    grad = -t / p + (1.0 - t) / (1.0 - p)
    return float(grad) if grad.ndim == 0 else grad


def _bce_args(prediction, target):
    t = np.asarray(target, dtype=np.float64)
    if not np.all((t == 0.0) | (t == 1.0)):
        raise ValueError("binary cross-entropy targets must be 0 or 1")
    p = np.clip(np.asarray(prediction, dtype=np.float64), BCE_EPSILON, 1.0 - BCE_EPSILON)
    return p, t


@dataclass
class AdamState:
    first_moment: np.ndarray
    second_moment: np.ndarray
    learning_rate: float = 0.0002
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0

    @classmethod
    def for_params(cls, params, learning_rate=0.0002, beta1=0.9, beta2=0.999, epsilon=1e-8):
        if learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if not (0 < beta1 < 1 and 0 < beta2 < 1):
            raise ValueError("Adam betas must lie in (0, 1)")
        if epsilon <= 0:
            raise ValueError("Adam epsilon must be positive")
        return cls(np.zeros_like(params), np.zeros_like(params), learning_rate, beta1, beta2, epsilon)


def adam_step(params, grads, state):
    """One bias-corrected Adam update of ``params`` in place.

    ``grads`` may be a :class:`Gradients` or a flat array. Raises
    :class:`TrainingDivergedError` (leaving everything untouched) if any
    gradient is non-finite.
    """
    g = grads.flat if isinstance(grads, Gradients) else grads
    if params.shape != g.shape or params.shape != state.first_moment.shape \
            or params.shape != state.second_moment.shape:
        raise ValueError("parameter, gradient and moment shapes disagree")
    if g.dtype != params.dtype:
        g = g.astype(params.dtype)
    t = state.step_count + 1
    correction2 = np.sqrt(1.0 - state.beta2 ** t)
    lr_t = state.learning_rate * correction2 / (1.0 - state.beta1 ** t)
    eps_t = state.epsilon * correction2
    ok = kernels.adam_update(
        params, np.ascontiguousarray(g), state.first_moment, state.second_moment,
        lr_t, state.beta1, state.beta2, eps_t,
    )
    if not ok:
        raise TrainingDivergedError("non-finite gradient in Adam update")
    state.step_count = t
    return params, state
