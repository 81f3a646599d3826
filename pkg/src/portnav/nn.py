"""Dense tanh MLPs with hand-written reverse-mode gradients and Adam.

Just enough autodiff for the actor-critic agents: batch-first float64
matrices, deterministic seeded initialization, and an npz checkpoint
container that round-trips parameters bit-exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


class ShapeError(ValueError):
    """Input or gradient shapes do not match the network."""


class Mlp:
    """Fully-connected net: tanh hidden layers, linear output.

    Weights W[l] have shape (fan_in, fan_out); forward is x @ W + b.
    Initialization is uniform with fan-in scaling from the supplied rng;
    final_scale shrinks the output layer (common for policy heads).
    """

    def __init__(self, sizes, rng: np.random.Generator, final_scale: float = 1.0):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.sizes = list(int(s) for s in sizes)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for i, (n_in, n_out) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            bound = 1.0 / np.sqrt(n_in)
            if i == len(self.sizes) - 2:
                bound *= final_scale
            self.weights.append(rng.uniform(-bound, bound, size=(n_in, n_out)))
            self.biases.append(rng.uniform(-bound, bound, size=(n_out,)))

    @property
    def in_dim(self) -> int:
        return self.sizes[0]

    @property
    def out_dim(self) -> int:
        return self.sizes[-1]

    def parameters(self) -> list[np.ndarray]:
        """Flat view: [W0, b0, W1, b1, ...]; arrays are the live buffers."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def copy(self) -> "Mlp":
        clone = object.__new__(Mlp)
        clone.sizes = list(self.sizes)
        clone.weights = [w.copy() for w in self.weights]
        clone.biases = [b.copy() for b in self.biases]
        return clone

    def load_parameters(self, params: list[np.ndarray]) -> None:
        expect = self.parameters()
        if len(params) != len(expect):
            raise ShapeError("parameter count mismatch")
        for dst, src in zip(expect, params):
            if dst.shape != src.shape:
                raise ShapeError(f"parameter shape mismatch: {dst.shape} vs {src.shape}")
            dst[...] = src

    def _check_input(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        squeeze = x.ndim == 1
        if squeeze:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ShapeError(f"input shape {x.shape} incompatible with in_dim {self.in_dim}")
        return x if not squeeze else x  # caller handles squeeze via forward()

    def forward_cached(self, x: np.ndarray):
        """Batch forward returning (output, cache) for a later backward pass."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ShapeError(f"input shape {x.shape} incompatible with in_dim {self.in_dim}")
        acts = [x]
        h = x
        last = len(self.weights) - 1
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            h = z if l == last else np.tanh(z)
            acts.append(h)
        return h, acts

    def backward_cached(self, acts: list[np.ndarray], output_grad: np.ndarray):
        """Gradients of sum(output * output_grad) w.r.t. params and input.

        Returns (grads, input_grad) where grads matches parameters() order.
        Gradients sum over the batch; divide output_grad by the batch size
        for means.
        """
        gy = np.asarray(output_grad, dtype=float)
        if gy.shape != acts[-1].shape:
            raise ShapeError(f"output_grad shape {gy.shape} != output shape {acts[-1].shape}")
        grads: list[np.ndarray] = [None] * (2 * len(self.weights))
        delta = gy
        for l in range(len(self.weights) - 1, -1, -1):
            grads[2 * l] = acts[l].T @ delta
            grads[2 * l + 1] = delta.sum(axis=0)
            delta = delta @ self.weights[l].T
            if l > 0:
                delta = delta * (1.0 - acts[l] ** 2)  # tanh'
        return grads, delta


def forward(net: Mlp, x) -> np.ndarray:
    """Deterministic forward pass; accepts a single vector or a batch."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    out, _ = net.forward_cached(arr[None, :] if single else arr)
    return out[0] if single else out


def backward(net: Mlp, x, output_grad):
    """Forward + reverse pass; see Mlp.backward_cached for conventions."""
    arr = np.asarray(x, dtype=float)
    gy = np.asarray(output_grad, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
        gy = gy[None, :]
    _, acts = net.forward_cached(arr)
    grads, dx = net.backward_cached(acts, gy)
    return grads, (dx[0] if single else dx)


@dataclass
class AdamState:
    """Per-parameter-list Adam accumulators; shapes mirror the parameters."""

    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_params(cls, params: list[np.ndarray], lr: float = 3e-4, **kwargs) -> "AdamState":
        return cls(
            lr=lr,
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
            **kwargs,
        )


def adam_update(params: list[np.ndarray], grads: list[np.ndarray], state: AdamState) -> None:
    """One in-place Adam step on params."""
    if len(params) != len(state.m) or len(params) != len(grads):
        raise ShapeError("params/grads/state length mismatch")
    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise ShapeError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * np.square(g)
        p -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)


def polyak_update(target: Mlp, online: Mlp, tau: float) -> None:
    """target <- tau * online + (1 - tau) * target, parameter-wise."""
    for t, o in zip(target.parameters(), online.parameters()):
        t *= 1.0 - tau
        t += tau * o


def save_checkpoint(path, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    """Write a checkpoint: JSON metadata plus named float64 arrays (npz)."""
    if "__meta__" in arrays:
        raise ValueError("'__meta__' is reserved")
    np.savez(path, __meta__=np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8), **arrays)


def load_checkpoint(path):
    """Read a checkpoint; returns (meta, arrays)."""
    with np.load(path) as data:
        meta = json.loads(bytes(data["__meta__"]).decode())
        arrays = {k: data[k].copy() for k in data.files if k != "__meta__"}
    return meta, arrays
