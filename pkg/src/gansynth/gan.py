"""Fully connected GAN for tabular rows, trained with alternating BCE/Adam steps.

The generator maps standard-normal latent vectors through ascending hidden
widths to a row (features plus label) squashed by a sigmoid; the
discriminator scores rows through the same widths in descending order.
Dropout is used in the generator only.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import nn
from .data import DataError, Dataset
from .nn import Activation, AdamState, MlpNetwork, TrainingDivergedError

ARCHITECTURES = {
    "256/512/1024": (256, 512, 1024),
    "256/512": (256, 512),
    "256": (256,),
    "128/256/512": (128, 256, 512),
    "128/256": (128, 256),
    "128": (128,),
}

MODEL_FORMAT = "gansynth-gan/1"


def parse_architecture(text):
    """``"256/512"`` or ``"256,512"`` -> ``(256, 512)``."""
    parts = [p for p in str(text).replace(",", "/").split("/") if p.strip()]
    if not parts:
        raise ValueError(f"empty architecture {text!r}")
    try:
        sizes = tuple(int(p) for p in parts)
    except ValueError:
        raise ValueError(f"architecture {text!r} is not a list of integers") from None
    if any(s < 1 for s in sizes):
        raise ValueError(f"architecture {text!r} has a non-positive width")
    return sizes


def architecture_name(sizes):
    return "/".join(str(s) for s in sorted(sizes))


@dataclass(frozen=True)
class GanConfig:
    hidden_sizes: tuple = (256, 512)
    latent_dim: int = 100
    batch_size: int = 5
    learning_rate: float = 0.0002
    dropout_probability: float = 0.3
    leaky_slope: float = 0.2
    epochs: int = 1500
    seed: int = 0
    # beta1 = 0.5 is the usual partner of lr = 0.0002 in GAN training; with
    # the generic 0.9 the deeper generators lock the label column onto one
    # class within a few epochs
    beta1: float = 0.5
    beta2: float = 0.999
    adam_epsilon: float = 1e-8
    # float32 halves the memory traffic of the training loop; gradient
    # checks and anything numerically delicate should use float64
    dtype: str = "float32"

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.hidden_sizes)
        object.__setattr__(self, "hidden_sizes", sizes)
        if not sizes:
            raise ValueError("hidden_sizes must not be empty")
        if any(s < 1 for s in sizes):
            raise ValueError(f"hidden sizes must be positive, got {sizes}")
        if self.latent_dim < 1:
            raise ValueError("latent_dim must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if not 0.0 <= self.dropout_probability < 1.0:
            raise ValueError("dropout_probability must lie in [0, 1)")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.dtype not in ("float32", "float64"):
            raise ValueError(f"dtype must be float32 or float64, got {self.dtype!r}")

    @property
    def generator_hidden(self):
        return tuple(sorted(self.hidden_sizes))

    @property
    def discriminator_hidden(self):
        return tuple(sorted(self.hidden_sizes, reverse=True))

    def replace(self, **changes):
        values = asdict(self)
        values.update(changes)
        return GanConfig(**values)

    def to_dict(self):
        values = asdict(self)
        values["hidden_sizes"] = list(self.hidden_sizes)
        return values

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


@dataclass
class GanModel:
    generator: MlpNetwork
    discriminator: MlpNetwork
    config: GanConfig
    data_dim: int
    columns: tuple | None = None  # feature names then label name
    generator_opt: AdamState | None = field(default=None, repr=False)
    discriminator_opt: AdamState | None = field(default=None, repr=False)
    _grad_buffers: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.generator.out_dim != self.data_dim or self.discriminator.in_dim != self.data_dim:
            raise ValueError("generator output and discriminator input must both equal data_dim")
        if self.discriminator.out_dim != 1:
            raise ValueError("discriminator must produce a single score")
        cfg = self.config
        if self.generator_opt is None:
            self.generator_opt = AdamState.for_params(
                self.generator.params, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_epsilon)
        if self.discriminator_opt is None:
            self.discriminator_opt = AdamState.for_params(
                self.discriminator.params, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_epsilon)

    def grad_buffer(self, net):
        buf = self._grad_buffers.get(id(net))
        if buf is None or buf.shape != net.params.shape or buf.dtype != net.params.dtype:
            buf = np.empty_like(net.params)
            self._grad_buffers[id(net)] = buf
        return buf


@dataclass
class TrainingLog:
    """Per-epoch mean losses; ``diverged`` marks a run aborted on a non-finite loss."""

    generator_loss: list = field(default_factory=list)
    discriminator_real_loss: list = field(default_factory=list)
    discriminator_fake_loss: list = field(default_factory=list)
    diverged: bool = False
    diverged_at: tuple | None = None  # (epoch, batch)
    message: str = ""

    @property
    def epochs_completed(self):
        return len(self.generator_loss)

    def all_finite(self):
        values = self.generator_loss + self.discriminator_real_loss + self.discriminator_fake_loss
        return all(math.isfinite(v) for v in values)


def build_gan(config, data_dim, rng=None):
    """Freshly initialised generator/discriminator pair.

    Parameters
    ----------
    config : GanConfig
    data_dim : int
        Width of a data row, features plus the label column.
    rng : numpy.random.Generator, optional
        Source for the Glorot initialisation; defaults to one seeded with
        ``config.seed``.
    """
    if data_dim < 2:
        raise ValueError(f"data_dim must be at least 2 (a feature and the label), got {data_dim}")
    if rng is None:
        rng = np.random.default_rng(config.seed)
    dtype = np.dtype(config.dtype)
    leaky = Activation.leaky_relu(config.leaky_slope)

    g_dims = [config.latent_dim, *config.generator_hidden, data_dim]
    d_dims = [data_dim, *config.discriminator_hidden, 1]
    g_acts = [leaky] * (len(g_dims) - 2) + [Activation.sigmoid()]
    d_acts = [leaky] * (len(d_dims) - 2) + [Activation.sigmoid()]
    generator = nn.init_network(g_dims, g_acts, rng, config.dropout_probability, dtype)
    discriminator = nn.init_network(d_dims, d_acts, rng, 0.0, dtype)
    return GanModel(generator, discriminator, config, int(data_dim))


def sample_latent(config, rng, n=None):
    """Standard-normal latent draws: a vector, or an ``n x latent_dim`` matrix."""
    dtype = np.dtype(config.dtype)
    shape = config.latent_dim if n is None else (int(n), config.latent_dim)
    return rng.standard_normal(shape, dtype=dtype)


def _mean_bce(scores, target):
    loss = float(np.mean(nn.bce_loss(scores, np.full(scores.shape, target))))
    if not math.isfinite(loss):
        raise TrainingDivergedError("non-finite loss")
    return loss


def _discriminator_update(model, rows, target):
    disc = model.discriminator
    scores, cache = nn.forward(disc, rows)
    loss = _mean_bce(scores, target)
    # sigmoid + BCE fused: gradient w.r.t. the logit is (p - t) / batch
    grad = (scores - disc.dtype.type(target)) / disc.dtype.type(scores.shape[0])
    grads = nn.backward(disc, cache, grad, wrt_logits=True, out=model.grad_buffer(disc))
    nn.adam_step(disc.params, grads, model.discriminator_opt)
    return loss


def generate(model, n, rng, training=False):
    """Raw generator output for ``n`` fresh latent draws."""
    z = sample_latent(model.config, rng, n)
    out, cache = nn.forward(model.generator, z, training=training, rng=rng)
    return out, cache


def train_discriminator_step(model, real_batch, rng):
    """One discriminator round: update toward 1 on ``real_batch``, then toward 0 on fakes.

    The fake batch has the same size as ``real_batch`` and is drawn from the
    generator in inference mode. Returns the two BCE losses, each measured
    before its own update.
    """
    real = np.asarray(real_batch)
    if real.ndim != 2 or real.shape[1] != model.data_dim:
        raise ValueError(f"real batch must be (batch, {model.data_dim}), got {real.shape}")
    if real.shape[0] == 0:
        raise ValueError("empty real batch")
    real_loss = _discriminator_update(model, real, 1.0)
    fake, _ = generate(model, real.shape[0], rng)
    fake_loss = _discriminator_update(model, fake, 0.0)
    return real_loss, fake_loss


def train_generator_step(model, rng, batch_size=None):
    """One generator update toward fooling the (fixed) discriminator.

    Gradients flow back through the discriminator, but only generator
    parameters change. Returns the BCE loss of the fakes against label 1.
    """
    n = model.config.batch_size if batch_size is None else int(batch_size)
    gen, disc = model.generator, model.discriminator
    fake, g_cache = generate(model, n, rng, training=True)
    scores, d_cache = nn.forward(disc, fake)
    loss = _mean_bce(scores, 1.0)
    grad = (scores - disc.dtype.type(1.0)) / disc.dtype.type(n)
    through = nn.backward(disc, d_cache, grad, wrt_logits=True, input_gradient=True,
                          param_gradients=False)
    grads = nn.backward(gen, g_cache, through.input, out=model.grad_buffer(gen))
    nn.adam_step(gen.params, grads, model.generator_opt)
    return loss


def train_gan(dataset, config, rng=None, loss_hook=None, progress=None):
    """Adversarial training over shuffled mini-batches of ``dataset``.

    Parameters
    ----------
    dataset : Dataset
        Rows scaled to [0, 1]; the label is trained as an extra column.
    config : GanConfig
    rng : numpy.random.Generator, optional
        Single source for initialisation, shuffling, latent draws and
        dropout; defaults to one seeded with ``config.seed``.
    loss_hook : callable, optional
        ``hook(epoch, batch, (d_real, d_fake, g))`` returning the losses to
        record. Used to inject faults; a non-finite returned value aborts.
    progress : callable, optional
        Called as ``progress(epoch, log)`` after every completed epoch.

    Returns
    -------
    (GanModel, TrainingLog)
        On divergence the log is marked and holds the completed epochs.
    """
    if dataset.n_rows == 0:
        raise DataError("cannot train a GAN on an empty dataset")
    if config.batch_size > dataset.n_rows:
        raise DataError(f"batch size {config.batch_size} exceeds the {dataset.n_rows} rows")
    data = np.ascontiguousarray(dataset.matrix(), dtype=np.dtype(config.dtype))
    if data.min() < 0.0 or data.max() > 1.0:
        raise DataError("GAN training data must be scaled to [0, 1]")
    if rng is None:
        rng = np.random.default_rng(config.seed)
    model = build_gan(config, data.shape[1], rng)
    model.columns = dataset.columns
    log = TrainingLog()
    n, bs = data.shape[0], config.batch_size

    for epoch in range(config.epochs):
        order = rng.permutation(n)
        sums = [0.0, 0.0, 0.0]
        batches = 0
        for b, start in enumerate(range(0, n, bs)):
            batch = data[order[start:start + bs]]
            try:
                d_real, d_fake = train_discriminator_step(model, batch, rng)
                g = train_generator_step(model, rng, batch.shape[0])
                losses = (d_real, d_fake, g)
                if loss_hook is not None:
                    losses = tuple(float(v) for v in loss_hook(epoch, b, losses))
                if not all(math.isfinite(v) for v in losses):
                    raise TrainingDivergedError("non-finite loss")
            except TrainingDivergedError as exc:
                log.diverged = True
                log.diverged_at = (epoch, b)
                log.message = str(exc)
                return model, log
            for i, v in enumerate(losses):
                sums[i] += v
            batches += 1
        log.discriminator_real_loss.append(sums[0] / batches)
        log.discriminator_fake_loss.append(sums[1] / batches)
        log.generator_loss.append(sums[2] / batches)
        if progress is not None:
            progress(epoch, log)
    return model, log


def round_labels(values):
    """Nearest of {0, 1}; exactly 0.5 goes to 1."""
    return (np.asarray(values) >= 0.5).astype(np.int64)


def synthesize(model, n_rows, rng):
    """``n_rows`` generator rows (dropout off) as a :class:`Dataset`.

    Features stay continuous; the last column is rounded into a label.
    """
    if n_rows <= 0:
        raise ValueError("n_rows must be positive")
    out, _ = generate(model, n_rows, rng)
    out = np.clip(out.astype(np.float64), 0.0, 1.0)
    if model.columns is not None:
        names, label_name = model.columns[:-1], model.columns[-1]
    else:
        names = tuple(f"x{i}" for i in range(model.data_dim - 1))
        label_name = "label"
    return Dataset(names, out[:, :-1], round_labels(out[:, -1]), label_name)


def _network_to_dict(net):
    return {
        "dims": list(net.dims),
        "activations": [a.to_dict() for a in net.activations],
        "dropout_probability": net.dropout_probability,
        "dtype": net.dtype.name,
        "layers": [
            {"weights": layer.weights.tolist(), "biases": layer.biases.tolist()}
            for layer in net.layers
        ],
    }


def _network_from_dict(data):
    dims = data["dims"]
    dtype = np.dtype(data["dtype"])
    net = MlpNetwork(dims, [Activation.from_dict(a) for a in data["activations"]],
                     None, data["dropout_probability"], dtype)
    if len(data["layers"]) != len(net.layers):
        raise ValueError("layer count does not match the declared dimensions")
    for layer, stored in zip(net.layers, data["layers"]):
        w = np.asarray(stored["weights"], dtype=dtype)
        b = np.asarray(stored["biases"], dtype=dtype)
        if w.shape != layer.weights.shape or b.shape != layer.biases.shape:
            raise ValueError("stored weight shapes do not match the declared dimensions")
        layer.weights[...] = w
        layer.biases[...] = b
    return net


def model_to_dict(model):
    """JSON-ready document; weights are row-major ``(out, in)`` nested lists.

    Values pass through Python floats, whose shortest-repr decimal form
    reads back to the identical float32/float64 value.
    """
    return {
        "format": MODEL_FORMAT,
        "config": model.config.to_dict(),
        "data_dim": model.data_dim,
        "columns": list(model.columns) if model.columns is not None else None,
        "generator": _network_to_dict(model.generator),
        "discriminator": _network_to_dict(model.discriminator),
    }


def model_from_dict(data):
    if data.get("format") != MODEL_FORMAT:
        raise ValueError(f"unsupported model format {data.get('format')!r}")
    columns = tuple(data["columns"]) if data.get("columns") is not None else None
    return GanModel(
        _network_from_dict(data["generator"]),
        _network_from_dict(data["discriminator"]),
        GanConfig.from_dict(data["config"]),
        int(data["data_dim"]),
        columns,
    )


def save_model(model, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(model_to_dict(model)), encoding="utf-8")
    return path


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
