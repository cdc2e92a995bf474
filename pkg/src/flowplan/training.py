"""Training loop: weighted flow-matching objective plus streaming updates.

Each step draws a minibatch (uniform with replacement), forms bridge
points and velocity targets, and descends the weighted objective

    mean_i [ lambda(t_i) * exp(-u(t_i)) * L_i ] + mean_i u(t_i),

where ``L_i`` is the per-sample mean squared velocity residual and ``u``
comes from the configured weighting scheme in its pre-update state.  The
additive u term carries no denoiser gradient; it trains the learned-MLP
weighting baseline and is reported in the logged objective for all
schemes.  After the gradient step the weighting consumes the detached
(t_i, L_i) pairs, so a batch is never weighted by its own statistics.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InsufficientDataError, TrainingDivergenceError
from .nets import AdamState, EmaParams, Mlp, adam_step
from .paths import Path, make_path
from .streams import TIME_EPS, TimeSampler, rng_state, seeded
from .weighting import LambdaFn, WeightScheme, make_weighting


@dataclass
class TrainConfig:
    """Declarative description of one training run."""

    path_kind: str = "trig"
    weighting: str = "variational_poly"  # {"uniform", "variational_poly", "mlp"}
    time_kind: str = "logit_normal"
    p_mean: float = -0.4
    p_std: float = 1.6
    sigma_data: float | None = 1.0  # None: pooled std of the (normalized) data
    batch_size: int = 128
    learning_rate: float = 8e-4
    total_steps: int = 1000
    ema_rates: tuple = (0.999, 0.9995)
    poly_degree: int = 5
    poly_ema_mu: float = 0.99
    poly_ridge: float = 1e-6
    loss_floor: float = 1e-12
    hidden_width: int = 256
    n_freq: int = 16
    mlp_weight_hidden: int = 64
    mlp_weight_n_freq: int = 32
    seed: int = 0
    normalize: bool = True
    u_grid_size: int = 32
    lambda_table: list | None = None
    divergence_limit: float = 1e6

    def validate(self) -> None:
        if self.weighting == "variational_poly" and self.batch_size < self.poly_degree + 1:
            raise ConfigError(
                "batch_size must be >= poly_degree + 1 for variational_poly weighting"
            )
        if self.total_steps < 0:
            raise ConfigError("total_steps must be >= 0")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be positive")
        if len(self.ema_rates) < 1:
            raise ConfigError("at least one EMA rate is required")


@dataclass
class FlowBatch:
    """One minibatch of bridge quantities."""

    x: np.ndarray
    z: np.ndarray
    t: np.ndarray
    x_t: np.ndarray
    v_target: np.ndarray
    per_sample_loss: np.ndarray


@dataclass
class StepRecord:
    step: int
    raw_loss: float
    weighted_obj: float
    sigma_samples: np.ndarray
    loss_samples: np.ndarray
    u_grid: np.ndarray
    wall_ms: float


class MetricLog:
    """Append-only per-step records with a fixed u-snapshot grid."""

    def __init__(self, u_grid_sigmas: np.ndarray):
        self.u_grid_sigmas = np.asarray(u_grid_sigmas, dtype=float)
        self.records: list[StepRecord] = []

    def append(self, record: StepRecord) -> None:
        if self.records and record.step <= self.records[-1].step:
            raise ValueError("step indices must increase monotonically")
        self.records.append(record)

    @property
    def steps(self) -> np.ndarray:
        return np.array([r.step for r in self.records], dtype=int)

    @property
    def raw_losses(self) -> np.ndarray:
        return np.array([r.raw_loss for r in self.records])

    def record_at(self, step: int) -> StepRecord:
        for r in self.records:
            if r.step == step:
                return r
        raise KeyError(f"no record for step {step}")

    def to_csv(self, path, include_timing: bool = False) -> None:
        """Write the log; wall_ms is zeroed unless timing is requested,
        so reruns with the same seed produce byte-identical files."""
        n_grid = self.u_grid_sigmas.size
        header = ["step", "raw_loss", "weighted_obj"]
        header += [f"u_grid_{i}" for i in range(n_grid)]
        header += ["wall_ms"]
        with open(path, "w", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for r in self.records:
                row = [str(r.step), repr(r.raw_loss), repr(r.weighted_obj)]
                row += [repr(float(v)) for v in r.u_grid]
                row += [repr(r.wall_ms) if include_timing else "0"]
                fh.write(",".join(row) + "\n")


def u_grid_sigmas(path_kind: str, size: int = 32) -> np.ndarray:
    """Fixed log-spaced noise levels used for u(sigma) snapshots."""
    t_max = 1.0 if path_kind == "linear" else np.pi / 2
    return np.geomspace(TIME_EPS, t_max - TIME_EPS, size)


def compute_flow_loss(
    model,
    path: Path,
    x: np.ndarray,
    rng: np.random.Generator,
    time_sampler: TimeSampler,
    t: np.ndarray | None = None,
    z: np.ndarray | None = None,
):
    """Build a FlowBatch and run the model on it.

    ``t`` and ``z`` may be forced for oracle tests; otherwise times come
    from the sampler and noise from N(0, noise_scale^2 I).

    Returns:
        (batch, cache, residual): residual is (B, D) model minus target,
        cache feeds ``model.backward``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n, dim = x.shape
    if n < 1:
        raise ValueError("batch must be non-empty")
    if t is None:
        t = time_sampler.sample(rng, n)
    else:
        t = np.broadcast_to(np.asarray(t, dtype=float), (n,)).copy()
    if z is None:
        z = rng.normal(0.0, path.noise_scale(), size=(n, dim))
    else:
        z = np.atleast_2d(np.asarray(z, dtype=float))
    x_t = path.interpolate(x, z, t)
    v_target = path.velocity_target(x, z, t)
    y, cache = model.forward(path.model_input_scale(x_t), path.c_noise(t))
    residual = y - v_target
    per_sample = np.mean(residual**2, axis=1)
    if not np.all(np.isfinite(per_sample)):
        raise TrainingDivergenceError("non-finite flow loss")
    batch = FlowBatch(x=x, z=z, t=t, x_t=x_t, v_target=v_target, per_sample_loss=per_sample)
    return batch, cache, residual


@dataclass
class TrainState:
    """Everything the loop mutates; checkpointable and resumable."""

    model: Mlp
    adam: AdamState
    emas: dict
    weighting: WeightScheme
    lam: LambdaFn
    path: Path
    time_sampler: TimeSampler
    rng: np.random.Generator
    step: int
    norm_mean: np.ndarray
    norm_std: np.ndarray
    sigma_data: float
    u_sigmas: np.ndarray = field(default=None)

    def ema_params(self, rate: float | None = None) -> dict:
        """Shadow parameters for sampling (first configured rate by default)."""
        if rate is None:
            rate = next(iter(self.emas))
        return self.emas[rate].shadow

    def normalize(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.norm_mean) / self.norm_std

    def denormalize(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) * self.norm_std + self.norm_mean

    def rng_snapshot(self) -> dict:
        return rng_state(self.rng)


def init_state(config: TrainConfig, dataset: np.ndarray) -> TrainState:
    """Set up model, weighting, normalization, and streams for a run."""
    config.validate()
    data = np.atleast_2d(np.asarray(dataset, dtype=float))
    if data.shape[0] < 1:
        raise ValueError("dataset must be non-empty")
    dim = data.shape[1]
    if config.normalize:
        norm_mean = data.mean(axis=0)
        norm_std = np.maximum(data.std(axis=0), 1e-8)
    else:
        norm_mean = np.zeros(dim)
        norm_std = np.ones(dim)
    normed = (data - norm_mean) / norm_std
    sigma_data = config.sigma_data if config.sigma_data is not None else float(np.std(normed))
    path = make_path(config.path_kind, sigma_d=sigma_data)
    sampler = TimeSampler(
        kind=config.time_kind,
        p_mean=config.p_mean,
        p_std=config.p_std,
        path_kind=config.path_kind,
        sigma_d=sigma_data,
    )
    lam = LambdaFn(config.lambda_table) if config.lambda_table else LambdaFn.ones()
    model = Mlp(
        data_dim=dim,
        out_dim=dim,
        hidden=config.hidden_width,
        n_freq=config.n_freq,
        rng=seeded(config.seed, "model-init"),
    )
    weighting = make_weighting(
        config.weighting,
        lam=lam,
        degree=config.poly_degree,
        ema_mu=config.poly_ema_mu,
        ridge=config.poly_ridge,
        loss_floor=config.loss_floor,
        mlp_hidden=config.mlp_weight_hidden,
        mlp_n_freq=config.mlp_weight_n_freq,
        learning_rate=config.learning_rate,
        rng=seeded(config.seed, "weight-init"),
    )
    return TrainState(
        model=model,
        adam=AdamState(model.params),
        emas={r: EmaParams(model.params, r) for r in config.ema_rates},
        weighting=weighting,
        lam=lam,
        path=path,
        time_sampler=sampler,
        rng=seeded(config.seed, "train"),
        step=0,
        norm_mean=norm_mean,
        norm_std=norm_std,
        sigma_data=sigma_data,
        u_sigmas=u_grid_sigmas(config.path_kind, config.u_grid_size),
    )


def training_step(state: TrainState, config: TrainConfig, data_normed: np.ndarray) -> StepRecord:
    """One gradient step; returns the metric record (not yet appended)."""
    t0 = time.perf_counter()
    rng = state.rng
    idx = rng.integers(0, data_normed.shape[0], size=config.batch_size)
    xb = data_normed[idx]
    batch, cache, residual = compute_flow_loss(
        state.model, state.path, xb, rng, state.time_sampler
    )
    sigmas = batch.t
    losses = batch.per_sample_loss
    u = state.weighting.u_values(sigmas)  # pre-update state
    lam_v = state.lam(sigmas)
    w = lam_v * np.exp(-u)
    n, dim = residual.shape
    grad_y = residual * (2.0 / dim) * (w / n)[:, None]
    grads, _ = state.model.backward(cache, grad_y)
    adam_step(state.model.params, grads, state.adam, config.learning_rate)
    try:
        state.weighting.update(sigmas, losses)
    except InsufficientDataError:
        pass  # keep previous weighting state
    for ema in state.emas.values():
        ema.update(state.model.params)
    raw = float(np.mean(losses))
    if not np.isfinite(raw) or raw > config.divergence_limit:
        raise TrainingDivergenceError(f"raw loss {raw!r} at step {state.step + 1}")
    weighted_obj = float(np.mean(w * losses + u))
    u_grid = state.weighting.u_values(state.u_sigmas)
    state.step += 1
    return StepRecord(
        step=state.step,
        raw_loss=raw,
        weighted_obj=weighted_obj,
        sigma_samples=sigmas,
        loss_samples=losses,
        u_grid=np.asarray(u_grid, dtype=float),
        wall_ms=(time.perf_counter() - t0) * 1e3,
    )


def train(
    config: TrainConfig,
    dataset: np.ndarray,
    log: MetricLog | None = None,
    state: TrainState | None = None,
    eval_fn=None,
    eval_interval: int | None = None,
    checkpoint_fn=None,
    checkpoint_interval: int | None = None,
) -> tuple[TrainState, MetricLog]:
    """Run the loop up to ``config.total_steps``.

    Pass a previously checkpointed ``state`` to resume; the loop
    continues from ``state.step + 1`` and reproduces the uninterrupted
    run exactly.  ``eval_fn(state, step)`` and ``checkpoint_fn(state,
    step)`` fire at their intervals and must not consume ``state.rng``.

    On divergence the error propagates; records appended so far remain
    in ``log`` for the caller to persist.
    """
    if state is None:
        state = init_state(config, dataset)
    if log is None:
        log = MetricLog(state.u_sigmas)
    data = np.atleast_2d(np.asarray(dataset, dtype=float))
    data_normed = state.normalize(data)
    while state.step < config.total_steps:
        record = training_step(state, config, data_normed)
        log.append(record)
        if eval_fn is not None and eval_interval and record.step % eval_interval == 0:
            eval_fn(state, record.step)
        if (
            checkpoint_fn is not None
            and checkpoint_interval
            and record.step % checkpoint_interval == 0
        ):
            checkpoint_fn(state, record.step)
    return state, log
