"""Small fully-connected networks with hand-written backward passes.

The denoiser and the learned-weighting baseline both use this substrate:
a two-hidden-layer MLP over the concatenation of its input vector and a
deterministic Fourier embedding of the conditioning time.  SiLU is used
throughout because a smooth activation keeps finite-difference gradient
checks clean.  The output layer is zero-initialized so a fresh model
predicts exactly zero, which keeps early losses (and their logs)
well-defined.

Parameters are plain dicts of float64 arrays; the optimizer and EMA
mutate them in place and must be serialized per model instance.
"""

from __future__ import annotations

import numpy as np

from .errors import TrainingDivergenceError

FREQ_MIN = 1.0
FREQ_MAX = 1000.0


def fourier_frequencies(n_freq: int) -> np.ndarray:
    """Log-spaced frequencies in [1, 1000]; deterministic."""
    if n_freq < 1:
        raise ValueError("n_freq must be >= 1")
    if n_freq == 1:
        return np.array([FREQ_MIN])
    return np.geomspace(FREQ_MIN, FREQ_MAX, n_freq)


def fourier_embed(t, n_freq: int) -> np.ndarray:
    """Concatenated sin/cos features of ``t`` over log-spaced frequencies.

    Output has length ``2 * n_freq`` per time value; for an array input
    of shape (B,) the result is (B, 2 * n_freq).
    """
    freqs = fourier_frequencies(n_freq)
    t = np.asarray(t, dtype=float)
    phase = t[..., None] * freqs
    return np.concatenate([np.sin(phase), np.cos(phase)], axis=-1)


def _silu(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sig = 1.0 / (1.0 + np.exp(-a))
    return a * sig, sig


def _silu_grad(a: np.ndarray, sig: np.ndarray) -> np.ndarray:
    return sig * (1.0 + a * (1.0 - sig))


class Mlp:
    """Two-hidden-layer MLP: [x, fourier(t)] -> hidden -> hidden -> out.

    ``data_dim`` may be zero, in which case the Fourier embedding is the
    whole input (used by the learned-weighting baseline).
    """

    def __init__(
        self,
        data_dim: int,
        out_dim: int | None = None,
        hidden: int = 256,
        n_freq: int = 16,
        rng: np.random.Generator | None = None,
    ):
        if data_dim < 0 or hidden < 1:
            raise ValueError("bad dimensions")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.data_dim = int(data_dim)
        self.out_dim = int(out_dim) if out_dim is not None else int(data_dim)
        self.hidden = int(hidden)
        self.n_freq = int(n_freq)
        in_dim = self.data_dim + 2 * self.n_freq

        def fan_in(n_in, n_out):
            return rng.normal(0.0, 1.0 / np.sqrt(n_in), size=(n_in, n_out))

        self.params = {
            "w0": fan_in(in_dim, hidden),
            "b0": np.zeros(hidden),
            "w1": fan_in(hidden, hidden),
            "b1": np.zeros(hidden),
            "w2": np.zeros((hidden, self.out_dim)),  # zero output at init
            "b2": np.zeros(self.out_dim),
        }

    def forward(self, x: np.ndarray, t, params: dict | None = None):
        """Deterministic forward pass.

        Args:
            x: (B, data_dim) inputs (data_dim may be 0).
            t: scalar or (B,) conditioning times.
            params: optional parameter dict (e.g. an EMA shadow) used in
                place of the live parameters.

        Returns:
            (y, cache): y is (B, out_dim); cache feeds :meth:`backward`.
        """
        p = self.params if params is None else params
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.data_dim:
            raise ValueError(f"expected input dim {self.data_dim}, got {x.shape[1]}")
        t = np.broadcast_to(np.asarray(t, dtype=float), (x.shape[0],))
        h_in = np.concatenate([x, fourier_embed(t, self.n_freq)], axis=1)
        a0 = h_in @ p["w0"] + p["b0"]
        z0, s0 = _silu(a0)
        a1 = z0 @ p["w1"] + p["b1"]
        z1, s1 = _silu(a1)
        y = z1 @ p["w2"] + p["b2"]
        cache = (p, h_in, a0, s0, z0, a1, s1, z1)
        return y, cache

    def backward(self, cache, grad_y: np.ndarray):
        """Exact gradients of ``sum_ij grad_y[i,j] * y[i,j]``.

        Returns:
            (grads, grad_x): parameter-gradient dict mirroring
            :attr:`params`, and the gradient with respect to the data
            part of the input, shape (B, data_dim).
        """
        p, h_in, a0, s0, z0, a1, s1, z1 = cache
        grad_y = np.atleast_2d(np.asarray(grad_y, dtype=float))
        if grad_y.shape != (h_in.shape[0], self.out_dim):
            raise ValueError("grad_y shape does not match the forward call")
        grads = {}
        grads["w2"] = z1.T @ grad_y
        grads["b2"] = grad_y.sum(axis=0)
        d_z1 = grad_y @ p["w2"].T
        d_a1 = d_z1 * _silu_grad(a1, s1)
        grads["w1"] = z0.T @ d_a1
        grads["b1"] = d_a1.sum(axis=0)
        d_z0 = d_a1 @ p["w1"].T
        d_a0 = d_z0 * _silu_grad(a0, s0)
        grads["w0"] = h_in.T @ d_a0
        grads["b0"] = d_a0.sum(axis=0)
        grad_x = (d_a0 @ p["w0"].T)[:, : self.data_dim]
        return grads, grad_x

    def clone_params(self) -> dict:
        return {k: v.copy() for k, v in self.params.items()}


class AdamState:
    """Standard Adam moments with bias correction."""

    def __init__(self, params: dict, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}


def adam_step(params: dict, grads: dict, state: AdamState, lr: float) -> None:
    """One in-place Adam update; increments the step counter.

    Raises:
        TrainingDivergenceError: any gradient entry is non-finite.
    """
    for k, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise TrainingDivergenceError(f"non-finite gradient for parameter {k!r}")
    state.step_count += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1**state.step_count
    bc2 = 1.0 - b2**state.step_count
    for k, g in grads.items():
        state.m[k] = b1 * state.m[k] + (1.0 - b1) * g
        state.v[k] = b2 * state.v[k] + (1.0 - b2) * g * g
        m_hat = state.m[k] / bc1
        v_hat = state.v[k] / bc2
        params[k] -= lr * m_hat / (np.sqrt(v_hat) + state.eps)


class EmaParams:
    """Shadow copy of parameters updated as rho * shadow + (1 - rho) * params."""

    def __init__(self, params: dict, rate: float):
        if not 0.0 <= rate < 1.0:
            raise ValueError("EMA rate must lie in [0, 1)")
        self.rate = float(rate)
        self.shadow = {k: v.copy() for k, v in params.items()}

    def update(self, params: dict) -> None:
        r = self.rate
        for k, v in params.items():
            self.shadow[k] = r * self.shadow[k] + (1.0 - r) * v
