"""Per-noise-level loss weighting schemes.

The training objective treats every noise level sigma as its own task and
scales its loss by ``exp(-u(sigma))`` with an additive ``u(sigma)``
penalty, so the pointwise-optimal log-variance proxy is

    u*(sigma) = log lambda(sigma) + log L(sigma).

Three interchangeable estimates of u are provided:

* ``uniform`` -- u identically zero (plain weighted flow loss);
* ``variational_poly`` -- closed-form streaming fit: per batch, ridge
  least squares of log-loss against log-sigma on a Vandermonde basis,
  smoothed by an exponential moving average over the coefficients;
* ``mlp`` -- a small network over Fourier features of sigma trained
  jointly by gradient descent on the full weighted objective (the
  iterative baseline this package exists to outperform).

Schemes are consulted with their *pre-update* state inside a training
step and updated afterwards from detached (sigma, loss) statistics, so a
batch is never weighted by its own fit and no gradient flows from the
weighting into the denoiser.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .errors import InsufficientDataError
from .nets import AdamState, Mlp, adam_step
from .polyfit import least_squares_fit, poly_eval


def optimal_u(lam: float, loss: float) -> float:
    """Pointwise minimizer of ``lam * loss * exp(-u) + u``."""
    if not (lam > 0 and loss > 0):
        raise ValueError("optimal_u requires strictly positive arguments")
    return float(np.log(lam) + np.log(loss))


def weighted_term(lam: float, loss: float, u: float) -> float:
    """Per-sample integrand ``lam * loss * exp(-u) + u``."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    if loss < 0:
        raise ValueError("loss must be non-negative")
    if not np.isfinite(u):
        raise ValueError("u must be finite")
    return float(lam * loss * np.exp(-u) + u)


class LambdaFn:
    """Noise-dependent weight lambda(sigma) > 0.

    Either the constant 1 or a piecewise-linear interpolation of user
    (sigma, lambda) pairs, extended flat outside the table.
    """

    def __init__(self, table=None):
        self.table = None
        if table is not None:
            pts = np.asarray(table, dtype=float)
            if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
                raise ValueError("table must be a sequence of (sigma, lambda) pairs")
            order = np.argsort(pts[:, 0])
            pts = pts[order]
            if np.any(pts[:, 1] <= 0):
                raise ValueError("lambda values must be positive")
            self.table = pts

    @classmethod
    def ones(cls) -> "LambdaFn":
        return cls()

    def __call__(self, sigmas) -> np.ndarray:
        sigmas = np.asarray(sigmas, dtype=float)
        if self.table is None:
            return np.ones_like(sigmas)
        return np.interp(sigmas, self.table[:, 0], self.table[:, 1])


class WeightScheme:
    """Interface shared by all weighting schemes."""

    name: str

    def __init__(self, lam: LambdaFn | None = None):
        self.lam = lam if lam is not None else LambdaFn.ones()

    def u_values(self, sigmas) -> np.ndarray:
        raise NotImplementedError

    def update(self, sigmas, losses) -> None:
        """Consume one batch of detached (sigma, per-sample loss) pairs."""

    def get_state(self) -> tuple[dict, dict]:
        """(json-able meta, array dict) for checkpointing."""
        return {}, {}

    def set_state(self, meta: dict, arrays: dict) -> None:
        pass

    @staticmethod
    def _check_sigmas(sigmas) -> np.ndarray:
        sigmas = np.asarray(sigmas, dtype=float)
        if np.any(sigmas <= 0):
            raise ValueError("sigma must be strictly positive")
        return sigmas


class UniformWeighting(WeightScheme):
    """u(sigma) = 0 everywhere."""

    name = "uniform"

    def u_values(self, sigmas) -> np.ndarray:
        return np.zeros_like(self._check_sigmas(sigmas))


class VariationalPolyWeighting(WeightScheme, BaseEstimator):
    """Streaming polynomial estimate of the optimal weighting function.

    Each update fits ``P(log sigma) ~= log L(sigma)`` by ridge least
    squares over the batch and blends the coefficients with an EMA:
    ``w <- ema_mu * w + (1 - ema_mu) * w_hat``.  Until the first update
    the scheme behaves like ``uniform`` up to log-lambda (P == 0).

    Also usable standalone as a scikit-learn-style incremental estimator
    via :meth:`partial_fit` / :meth:`predict`.
    """

    name = "variational_poly"

    def __init__(
        self,
        degree: int = 5,
        ema_mu: float = 0.99,
        ridge: float = 1e-6,
        loss_floor: float = 1e-12,
        lam: LambdaFn | None = None,
    ):
        WeightScheme.__init__(self, lam)
        if degree < 0:
            raise ValueError("degree must be >= 0")
        if not 0.0 <= ema_mu < 1.0:
            raise ValueError("ema_mu must lie in [0, 1)")
        if not loss_floor > 0:
            raise ValueError("loss_floor must be positive")
        self.degree = degree
        self.ema_mu = ema_mu
        self.ridge = ridge
        self.loss_floor = loss_floor
        self.coeffs_ = np.zeros(degree + 1)
        self.initialized_ = False

    def u_values(self, sigmas) -> np.ndarray:
        sigmas = self._check_sigmas(sigmas)
        out = np.log(self.lam(sigmas))
        if self.initialized_:
            out = out + poly_eval(self.coeffs_, np.log(sigmas))
        return out

    def update(self, sigmas, losses) -> None:
        sigmas = self._check_sigmas(sigmas)
        losses = np.asarray(losses, dtype=float)
        if sigmas.shape != losses.shape:
            raise ValueError("sigmas and losses must have equal shapes")
        if sigmas.size < self.degree + 1:
            raise InsufficientDataError(
                f"need at least {self.degree + 1} pairs, got {sigmas.size}"
            )
        xs = np.log(sigmas)
        ys = np.log(np.maximum(losses, self.loss_floor))
        fitted = least_squares_fit(xs, ys, self.degree, ridge=self.ridge)
        if self.initialized_:
            self.coeffs_ = self.ema_mu * self.coeffs_ + (1.0 - self.ema_mu) * fitted
        else:
            self.coeffs_ = fitted
            self.initialized_ = True

    # scikit-learn style aliases
    def partial_fit(self, sigmas, losses) -> "VariationalPolyWeighting":
        self.update(np.ravel(sigmas), np.ravel(losses))
        return self

    def predict(self, sigmas) -> np.ndarray:
        return self.u_values(np.ravel(sigmas))

    def get_state(self) -> tuple[dict, dict]:
        meta = {
            "degree": self.degree,
            "ema_mu": self.ema_mu,
            "coeffs": [float(c) for c in self.coeffs_],
            "initialized": self.initialized_,
        }
        return meta, {}

    def set_state(self, meta: dict, arrays: dict) -> None:
        self.coeffs_ = np.asarray(meta["coeffs"], dtype=float)
        self.initialized_ = bool(meta["initialized"])


class MlpWeighting(WeightScheme):
    """Learned u(sigma): one hidden layer over 32 Fourier features.

    Trained jointly with the denoiser by Adam on the full weighted
    objective; the gradient with respect to u is ``1 - lam * L * exp(-u)``
    per sample (losses enter as detached numbers).
    """

    name = "mlp"

    def __init__(
        self,
        hidden: int = 64,
        n_freq: int = 32,
        learning_rate: float = 8e-4,
        lam: LambdaFn | None = None,
        rng: np.random.Generator | None = None,
    ):
        super().__init__(lam)
        self.learning_rate = learning_rate
        self.net = Mlp(data_dim=0, out_dim=1, hidden=hidden, n_freq=n_freq, rng=rng)
        self.adam = AdamState(self.net.params)

    def u_values(self, sigmas) -> np.ndarray:
        sigmas = self._check_sigmas(sigmas)
        y, _ = self.net.forward(np.zeros((sigmas.size, 0)), sigmas)
        return y[:, 0]

    def update(self, sigmas, losses) -> None:
        sigmas = self._check_sigmas(np.asarray(sigmas, dtype=float))
        losses = np.asarray(losses, dtype=float)
        y, cache = self.net.forward(np.zeros((sigmas.size, 0)), sigmas)
        u = y[:, 0]
        lam_v = self.lam(sigmas)
        grad_u = (1.0 - lam_v * losses * np.exp(-u)) / sigmas.size
        grads, _ = self.net.backward(cache, grad_u[:, None])
        adam_step(self.net.params, grads, self.adam, self.learning_rate)

    def get_state(self) -> tuple[dict, dict]:
        arrays = {}
        for k, v in self.net.params.items():
            arrays[f"p_{k}"] = v
        for k, v in self.adam.m.items():
            arrays[f"m_{k}"] = v
        for k, v in self.adam.v.items():
            arrays[f"v_{k}"] = v
        return {"adam_step": self.adam.step_count}, arrays

    def set_state(self, meta: dict, arrays: dict) -> None:
        for k in self.net.params:
            self.net.params[k] = arrays[f"p_{k}"].copy()
            self.adam.m[k] = arrays[f"m_{k}"].copy()
            self.adam.v[k] = arrays[f"v_{k}"].copy()
        self.adam.step_count = int(meta["adam_step"])


def make_weighting(
    kind: str,
    lam: LambdaFn | None = None,
    degree: int = 5,
    ema_mu: float = 0.99,
    ridge: float = 1e-6,
    loss_floor: float = 1e-12,
    mlp_hidden: int = 64,
    mlp_n_freq: int = 32,
    learning_rate: float = 8e-4,
    rng: np.random.Generator | None = None,
) -> WeightScheme:
    """Construct a weighting scheme by name."""
    if kind == "uniform":
        return UniformWeighting(lam)
    if kind == "variational_poly":
        return VariationalPolyWeighting(
            degree=degree, ema_mu=ema_mu, ridge=ridge, loss_floor=loss_floor, lam=lam
        )
    if kind == "mlp":
        return MlpWeighting(
            hidden=mlp_hidden,
            n_freq=mlp_n_freq,
            learning_rate=learning_rate,
            lam=lam,
            rng=rng,
        )
    raise ValueError(f"unknown weighting kind: {kind!r}")
