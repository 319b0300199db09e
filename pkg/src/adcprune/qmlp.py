"""Quantization-aware training of small MLP classifiers.

Weights live in a power-of-2 codebook {0} | {+-2^e : e_min <= e <= 0}, so a
multiply in the deployed circuit is an arithmetic shift.  Training keeps
float shadow weights: forward passes use the quantized values, backward
passes update the shadows through a straight-through estimator (identity
inside the clamp range, zero outside).  Hidden ReLU activations are
uniformly quantized to `activation_bits` fractional bits in [0, 1); the
head stays raw and classifies by argmax (ties to the lowest class index).

`infer_fixed_point` re-runs a trained net in pure integer arithmetic
(shifts and adds only) and must agree with the quantized float forward
pass on every sample's argmax.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


class AccumulatorOverflow(RuntimeError):
    """Fixed-point accumulator exceeded the configured width."""


@dataclass(frozen=True)
class QuantConfig:
    weight_bits: int = 8
    activation_bits: int = 8
    input_bits: int = 4

    def __post_init__(self):
        if not 2 <= self.weight_bits <= 8:
            raise ValueError(f"weight_bits must be in [2, 8], got {self.weight_bits}")
        if not 2 <= self.activation_bits <= 8:
            raise ValueError(f"activation_bits must be in [2, 8], got {self.activation_bits}")
        if self.input_bits < 1:
            raise ValueError(f"input_bits must be >= 1, got {self.input_bits}")

    @property
    def exponent_min(self) -> int:
        """Lowest weight exponent: sign + exponent field of `weight_bits` bits."""
        return -(2 ** (self.weight_bits - 1) - 2)


@dataclass(frozen=True)
class TrainSpec:
    batch_size: int = 32
    epochs: int = 50
    learning_rate: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")


_SQRT_HALF = np.sqrt(0.5)


def quantize_pow2(w, cfg: QuantConfig):
    """Snap to the nearest codebook value in the log2 domain.

    Magnitudes below 2^(e_min - 1) underflow to exactly 0; exponents are
    clamped to [e_min, 0], so quantized magnitudes never exceed 1.
    Implemented with frexp: for mag = m * 2^k with m in [0.5, 1), rounding
    log2(mag) to the nearest integer picks k when m >= sqrt(1/2), else k - 1.
    """
    arr = np.asarray(w, dtype=np.float64)
    e_min = cfg.exponent_min
    mag = np.abs(arr)
    m, k = np.frexp(mag)
    e = np.clip(k - (m < _SQRT_HALF), e_min, 0)
    q = np.where(mag < 2.0 ** (e_min - 1), 0.0, np.ldexp(np.sign(arr), e))
    return q if q.shape else float(q)


def pow2_decompose(q):
    """Split quantized values into (sign in {-1,0,1}, exponent) int arrays."""
    q = np.asarray(q, dtype=np.float64)
    sign = np.sign(q).astype(np.int64)
    exp = np.zeros(q.shape, dtype=np.int64)
    nz = sign != 0
    exp[nz] = np.round(np.log2(np.abs(q[nz]))).astype(np.int64)
    return sign, exp


def quantize_activation(r, bits: int):
    """Uniform quantizer to `bits` fractional bits over [0, 1), half-up rounding."""
    scale = 2.0**bits
    q = np.floor(np.maximum(r, 0.0) * scale + 0.5)
    return np.minimum(q, scale - 1.0) / scale


class QuantMlp:
    """Fully-connected classifier with pow2-quantized weights and biases.

    `layer_sizes` runs input dim -> hidden sizes -> class count.  Shadow
    weights are float; `quantized_weights()` materializes the codebook view
    used by every forward pass.
    """

    def __init__(self, layer_sizes, cfg: QuantConfig = QuantConfig(), seed: int = 0):
        sizes = [int(s) for s in layer_sizes]
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ValueError(f"bad topology {layer_sizes!r}")
        rng = np.random.default_rng(seed)
        self.layer_sizes = sizes
        self.cfg = cfg
        self.weights = [
            rng.uniform(-0.5, 0.5, size=(o, i)) / np.sqrt(i)
            for i, o in zip(sizes, sizes[1:])
        ]
        # hidden biases start slightly positive: inputs are non-negative, so a
        # zero-bias unit with all-negative weights would be dead from birth
        self.biases = [np.full(o, 0.1) for o in sizes[1:-1]] + [np.zeros(sizes[-1])]
        self.diverged = False

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def quantized_weights(self):
        return [quantize_pow2(w, self.cfg) for w in self.weights]

    def quantized_biases(self):
        return [quantize_pow2(b, self.cfg) for b in self.biases]

    def forward(self, x) -> np.ndarray:
        """Quantized forward pass; returns raw logits, shape (samples, classes)."""
        a = np.atleast_2d(np.asarray(x, dtype=np.float64))
        z = a
        for l, (wq, bq) in enumerate(zip(self.quantized_weights(), self.quantized_biases())):
            z = a @ wq.T + bq
            if l < self.n_layers - 1:
                a = quantize_activation(np.maximum(z, 0.0), self.cfg.activation_bits)
        return z

    def predict(self, x) -> np.ndarray:
        return np.argmax(self.forward(x), axis=1)


def _sgd_step(mlp: QuantMlp, xb, yb, lr: float) -> float:
    """One quantized-forward / STE-backward step; returns the batch loss."""
    wqs = mlp.quantized_weights()
    bqs = mlp.quantized_biases()
    acts = [xb]
    pres = []
    a = xb
    for l in range(mlp.n_layers):
        z = a @ wqs[l].T + bqs[l]
        pres.append(z)
        if l < mlp.n_layers - 1:
            a = quantize_activation(np.maximum(z, 0.0), mlp.cfg.activation_bits)
            acts.append(a)

    logits = pres[-1]
    shifted = logits - logits.max(axis=1, keepdims=True)
    expz = np.exp(shifted)
    probs = expz / expz.sum(axis=1, keepdims=True)
    n = len(yb)
    rows = np.arange(n)
    loss = float(-np.mean(np.log(probs[rows, yb] + 1e-300)))

    dz = probs
    dz[rows, yb] -= 1.0
    dz /= n
    for l in reversed(range(mlp.n_layers)):
        dw = dz.T @ acts[l]
        db = dz.sum(axis=0)
        if l > 0:
            da = dz @ wqs[l]
            # ReLU derivative and clipped-STE window of the activation quantizer
            r = np.maximum(pres[l - 1], 0.0)
            dz = da * (pres[l - 1] > 0.0) * (r < 1.0)
        # weight STE: shadows past the |w| <= 1 clamp stop receiving gradient
        mlp.weights[l] -= lr * dw * (np.abs(mlp.weights[l]) <= 1.0)
        mlp.biases[l] -= lr * db * (np.abs(mlp.biases[l]) <= 1.0)
    return loss


def train(mlp: QuantMlp, x, y, spec: TrainSpec) -> QuantMlp:
    """Mini-batch SGD with quantized forwards; deterministic given spec.seed.

    A non-finite loss flags the model as diverged and stops training instead
    of raising, so a broken search individual fails soft.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or len(x) != len(y):
        raise ValueError("training set must be a (samples, features) matrix with labels")
    rng = np.random.default_rng(spec.seed)
    n = len(x)
    for _ in range(spec.epochs):
        order = rng.permutation(n)
        for start in range(0, n, spec.batch_size):
            idx = order[start : start + spec.batch_size]
            loss = _sgd_step(mlp, x[idx], y[idx], spec.learning_rate)
            if not np.isfinite(loss):
                mlp.diverged = True
                return mlp
    return mlp


def evaluate(mlp: QuantMlp, x, y) -> float:
    """Fraction of samples whose argmax matches the label."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(x) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    return float(np.mean(mlp.predict(x) == y))


def fixed_point_logits(mlp: QuantMlp, codes, acc_bits: int = 32) -> tuple[list[int], int]:
    """Shift-and-add integer inference of one sample of raw input codes.

    Every value is an exact fixed-point integer (arbitrary-precision Python
    ints), with the fractional position tracked per layer; pow2 multiplies
    become left shifts against the layer's lowest exponent.  Returns the
    head accumulators and their fractional bit count.  Raises
    AccumulatorOverflow if any accumulator exceeds `acc_bits` signed bits.
    """
    limit = 1 << (acc_bits - 1)
    values = [int(c) for c in codes]
    frac = mlp.cfg.input_bits
    act_bits = mlp.cfg.activation_bits
    for l in range(mlp.n_layers):
        w_sign, w_exp = pow2_decompose(quantize_pow2(mlp.weights[l], mlp.cfg))
        b_sign, b_exp = pow2_decompose(quantize_pow2(mlp.biases[l], mlp.cfg))
        used = [int(e) for e in w_exp[w_sign != 0]] + [int(e) for e in b_exp[b_sign != 0]]
        e_low = min(used, default=0)
        out_frac = frac - e_low
        accs = []
        for j in range(len(w_sign)):
            acc = 0
            for i, v in enumerate(values):
                s = int(w_sign[j, i])
                if s:
                    acc += s * (v << (int(w_exp[j, i]) - e_low))
            if b_sign[j]:
                acc += int(b_sign[j]) << (int(b_exp[j]) - e_low + frac)
            if not -limit <= acc < limit:
                raise AccumulatorOverflow(
                    f"layer {l} neuron {j}: accumulator {acc} exceeds {acc_bits} signed bits"
                )
            accs.append(acc)
        if l < mlp.n_layers - 1:
            shift = out_frac - act_bits
            quantized = []
            for acc in accs:
                acc = max(acc, 0)
                if shift > 0:
                    q = (acc + (1 << (shift - 1))) >> shift
                else:
                    q = acc << -shift
                quantized.append(min(q, (1 << act_bits) - 1))
            values = quantized
            frac = act_bits
        else:
            values = accs
            frac = out_frac
    return values, frac


def infer_fixed_point(mlp: QuantMlp, codes, acc_bits: int = 32) -> int:
    """Class index from the integer-only forward pass (ties to lowest index)."""
    logits, _ = fixed_point_logits(mlp, codes, acc_bits)
    return logits.index(max(logits))


def to_json(mlp: QuantMlp) -> str:
    layers = []
    for wq, bq in zip(mlp.quantized_weights(), mlp.quantized_biases()):
        ws, we = pow2_decompose(wq)
        bs, be = pow2_decompose(bq)
        layers.append(
            {
                "weight_sign": ws.tolist(),
                "weight_exp": we.tolist(),
                "bias_sign": bs.tolist(),
                "bias_exp": be.tolist(),
            }
        )
    doc = {
        "topology": mlp.layer_sizes,
        "quant": {
            "weight_bits": mlp.cfg.weight_bits,
            "activation_bits": mlp.cfg.activation_bits,
            "input_bits": mlp.cfg.input_bits,
        },
        "layers": layers,
    }
    return json.dumps(doc, indent=2) + "\n"


def from_json(text: str) -> QuantMlp:
    doc = json.loads(text)
    cfg = QuantConfig(**doc["quant"])
    mlp = QuantMlp(doc["topology"], cfg=cfg, seed=0)
    for l, layer in enumerate(doc["layers"]):
        ws = np.asarray(layer["weight_sign"], dtype=np.float64)
        we = np.asarray(layer["weight_exp"], dtype=np.float64)
        bs = np.asarray(layer["bias_sign"], dtype=np.float64)
        be = np.asarray(layer["bias_exp"], dtype=np.float64)
        mlp.weights[l] = ws * 2.0**we
        mlp.biases[l] = bs * 2.0**be
    return mlp
