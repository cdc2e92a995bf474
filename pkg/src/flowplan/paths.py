"""Interpolant paths between data and noise.

A path is the coefficient pair (gamma(t), alpha(t)) defining the bridge
``x_t = gamma(t) x + alpha(t) z`` together with its velocity
``d x_t / dt = gamma'(t) x + alpha'(t) z``:

* linear: gamma = 1 - t, alpha = t on t in (0, 1); velocity is the
  constant z - x.
* trigonometric: gamma = cos t, alpha = sin t on t in (0, pi/2) with
  noise scaled to the data standard deviation ``sigma_d``; velocity is
  -sin(t) x + cos(t) z.  Model inputs are divided by sigma_d.

Evaluation accepts the closed domain [0, t_max]; training times are kept
strictly inside by the time-sampler clamp.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .streams import TIME_EPS


class Path:
    """Common interface for the two interpolants."""

    kind: str
    t_min: float = 0.0
    t_max: float

    def __init__(self, sigma_d: float = 1.0, c_noise: Callable | None = None):
        if not sigma_d > 0:
            raise ValueError("sigma_d must be positive")
        self.sigma_d = float(sigma_d)
        self._c_noise = c_noise

    def _check_time(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t_min) or np.any(t > self.t_max):
            raise ValueError(
                f"time outside [{self.t_min}, {self.t_max:.6g}] for {self.kind} path"
            )
        return t

    def gamma_alpha(self, t):
        """Coefficients (gamma(t), alpha(t)); vectorized over t."""
        raise NotImplementedError

    def gamma_alpha_dot(self, t):
        """Time derivatives (gamma'(t), alpha'(t))."""
        raise NotImplementedError

    def interpolate(self, x: np.ndarray, z: np.ndarray, t) -> np.ndarray:
        """Bridge point gamma(t) x + alpha(t) z, elementwise per row."""
        x, z, g, a = self._broadcast(x, z, t)
        return g * x + a * z

    def velocity_target(self, x: np.ndarray, z: np.ndarray, t) -> np.ndarray:
        """Regression target gamma'(t) x + alpha'(t) z."""
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        if x.shape != z.shape:
            raise ValueError(f"shape mismatch: x {x.shape} vs z {z.shape}")
        t = self._check_time(t)
        gd, ad = self.gamma_alpha_dot(t)
        gd, ad = self._per_row(gd, x), self._per_row(ad, x)
        return gd * x + ad * z

    def c_noise(self, t):
        """Time-conditioning transform fed to the model; identity by default."""
        t = self._check_time(t)
        if self._c_noise is not None:
            return self._c_noise(t)
        return t

    def model_input_scale(self, x_t: np.ndarray) -> np.ndarray:
        """Rescale bridge points before they enter the model."""
        x_t = np.asarray(x_t, dtype=float)
        if self.kind == "trig":
            return x_t / self.sigma_d
        return x_t

    def noise_scale(self) -> float:
        """Standard deviation of the noise endpoint distribution."""
        return self.sigma_d if self.kind == "trig" else 1.0

    def clamp_times(self, t) -> np.ndarray:
        return np.clip(np.asarray(t, dtype=float), self.t_min + TIME_EPS, self.t_max - TIME_EPS)

    def _broadcast(self, x, z, t):
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        if x.shape != z.shape:
            raise ValueError(f"shape mismatch: x {x.shape} vs z {z.shape}")
        g, a = self.gamma_alpha(self._check_time(t))
        return x, z, self._per_row(g, x), self._per_row(a, x)

    @staticmethod
    def _per_row(coef, x):
        coef = np.asarray(coef, dtype=float)
        if coef.ndim == 0 or x.ndim <= 1:
            return coef
        return coef[:, None]


class LinearPath(Path):
    """gamma = 1 - t, alpha = t; constant velocity z - x."""

    kind = "linear"
    t_max = 1.0

    def __init__(self, sigma_d: float = 1.0, c_noise: Callable | None = None):
        # sigma_d is fixed at 1 for the linear path; the argument is
        # accepted for interface symmetry but ignored.
        super().__init__(1.0, c_noise)

    def gamma_alpha(self, t):
        t = self._check_time(t)
        return 1.0 - t, t

    def gamma_alpha_dot(self, t):
        t = self._check_time(t)
        return -np.ones_like(t), np.ones_like(t)


class TrigPath(Path):
    """gamma = cos t, alpha = sin t on (0, pi/2); unit-circle interpolant."""

    kind = "trig"
    t_max = np.pi / 2

    def gamma_alpha(self, t):
        t = self._check_time(t)
        return np.cos(t), np.sin(t)

    def gamma_alpha_dot(self, t):
        t = self._check_time(t)
        return -np.sin(t), np.cos(t)


def make_path(kind: str, sigma_d: float = 1.0, c_noise: Callable | None = None) -> Path:
    """Construct a path by name ("linear" or "trig")."""
    if kind == "linear":
        return LinearPath(c_noise=c_noise)
    if kind == "trig":
        return TrigPath(sigma_d=sigma_d, c_noise=c_noise)
    raise ValueError(f"unknown path kind: {kind!r}")
