"""L^q spectra of inhomogeneous Bernoulli products.

For a single level with weight p the spectrum is tau(p, q) = log2(p^q + (1-p)^q);
for a product measure tau_n(q) is the running average of tau(p_i, q) over the
first n levels. Limits at finite depth are always tail extrema over a supplied
depth schedule, never true limits.
"""
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Annotated, Literal, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator
from scipy.special import entr, expit, logsumexp

from cointoss.errors import (LegendreBoundaryWarning, PreconditionError,
                             ScheduleTooShortError)
from cointoss.measure import LN2, Probability, WeightSequence, cylinder_log_masses


logger = logging.getLogger(__name__)

DEFAULT_TAIL_FRACTION = 0.5


def _scalar(value):
    return float(value) if np.ndim(value) == 0 else value


def _probabilities(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0.0) & (p < 1.0))):
        raise PreconditionError("weights must lie strictly inside (0, 1)")
    return p


def tau_single(p, q):
    """log2(p^q + (1-p)^q), exponent-shifted so that large |q| cannot overflow.

    Exactly 1 at q = 0 and exactly 0 at q = 1.
    """
    p = _probabilities(p)
    q = np.asarray(q, dtype=float)
    value = np.logaddexp(q * np.log(p), q * np.log1p(-p)) / LN2
    value = np.where(q == 0.0, 1.0, np.where(q == 1.0, 0.0, value))
    return _scalar(value)


def _tilt_pair(p: np.ndarray, q: np.ndarray):
    x = q * (np.log(p) - np.log1p(-p))
    return expit(x), expit(-x)


def tau_single_d1(p, q):
    """d/dq tau(p, q) = (p^q ln p + (1-p)^q ln(1-p)) / ((p^q + (1-p)^q) ln 2)."""
    p = _probabilities(p)
    q = np.asarray(q, dtype=float)
    t, s = _tilt_pair(p, q)
    return _scalar((t * np.log(p) + s * np.log1p(-p)) / LN2)


def tau_single_d2(p, q):
    """d^2/dq^2 tau(p, q) = ln 2 * p^q (1-p)^q (log2 p/(1-p))^2 / (p^q + (1-p)^q)^2."""
    p = _probabilities(p)
    q = np.asarray(q, dtype=float)
    t, s = _tilt_pair(p, q)
    log_ratio = (np.log(p) - np.log1p(-p)) / LN2
    return _scalar(LN2 * t * s * log_ratio ** 2)


def binary_entropy(p):
    """Base-2 Shannon entropy h(p) = -tau_single_d1(p, 1)."""
    p = _probabilities(p)
    return _scalar((entr(p) + entr(1.0 - p)) / LN2)


class Component(BaseModel):
    model_config = ConfigDict(frozen=True)

    weight: Annotated[float, Field(gt=0.0, le=1.0)]
    p: Probability


class TauCurve(BaseModel):
    """Convex combination sum_i weight_i * tau(p_i, .)."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["tau_curve"] = "tau_curve"
    components: tuple[Component, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_weights(self):
        total = math.fsum(c.weight for c in self.components)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"component weights sum to {total!r}, expected 1")
        return self

    @classmethod
    def of(cls, pairs: Sequence[tuple[float, float]]) -> "TauCurve":
        """Build from (weight, p) pairs."""
        return cls(components=tuple(Component(weight=w, p=p) for w, p in pairs))

    @classmethod
    def single(cls, p: float) -> "TauCurve":
        return cls.of([(1.0, p)])

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])

    @property
    def ps(self) -> np.ndarray:
        return np.array([c.p for c in self.components])

    def _combine(self, fn, q):
        q = np.asarray(q, dtype=float)
        total = np.zeros_like(q)
        for c in self.components:
            total = total + c.weight * fn(c.p, q)
        return _scalar(total)

    def value(self, q):
        return self._combine(tau_single, q)

    def derivative(self, q):
        return self._combine(tau_single_d1, q)

    def second_derivative(self, q):
        return self._combine(tau_single_d2, q)

    __call__ = value


def _depths(depths: Sequence[int]) -> np.ndarray:
    depths = np.asarray(depths, dtype=int)
    if depths.size == 0:
        raise PreconditionError("the depth schedule is empty")
    if depths[0] < 1 or np.any(np.diff(depths) <= 0):
        raise PreconditionError(
            f"depths must be positive and strictly increasing, got {depths.tolist()}")
    return depths


def _running_mean(terms: np.ndarray) -> np.ndarray:
    return np.cumsum(terms, axis=-1) / np.arange(1, terms.shape[-1] + 1)


def tau_profile(w: WeightSequence, q: float, n: int) -> np.ndarray:
    """tau_k(q) for k = 1..n."""
    if n < 1:
        raise PreconditionError(f"depth must be >= 1, got {n}")
    return _running_mean(tau_single(w.prefix(n), q))


def tau_n(w: WeightSequence, q: float, n: int) -> float:
    return float(tau_profile(w, q, n)[-1])


def tau_n_enumerated(w: WeightSequence, q: float, n: int,
                     cap: Optional[int] = None) -> float:
    """(1 / (n log 2)) log sum_I mu(I)^q over all depth-n cylinders."""
    if n < 1:
        raise PreconditionError(f"depth must be >= 1, got {n}")
    logs = cylinder_log_masses(w, n, cap)
    return float(logsumexp(q * logs) / (n * LN2))


def _tail_slice(count: int, tail_fraction: float) -> slice:
    if not 0.0 < tail_fraction <= 1.0:
        raise PreconditionError(f"tail fraction must be in (0, 1], got {tail_fraction}")
    start = min(count - 1, int(math.floor(count * (1.0 - tail_fraction))))
    return slice(start, count)


@dataclass(frozen=True)
class EmpiricalTau:
    q_grid: np.ndarray
    depths: np.ndarray
    values: np.ndarray  # shape (len(q_grid), len(depths))

    @property
    def running_limsup(self) -> np.ndarray:
        """sup over depths >= n, per q."""
        return np.maximum.accumulate(self.values[:, ::-1], axis=1)[:, ::-1]

    @property
    def running_liminf(self) -> np.ndarray:
        return np.minimum.accumulate(self.values[:, ::-1], axis=1)[:, ::-1]

    def tail(self, tail_fraction: float = DEFAULT_TAIL_FRACTION) -> np.ndarray:
        return self.values[:, _tail_slice(len(self.depths), tail_fraction)]

    def to_frame(self) -> pd.DataFrame:
        q, depth = np.meshgrid(self.q_grid, self.depths, indexing="ij")
        return pd.DataFrame({
            "q": q.ravel(),
            "depth": depth.ravel(),
            "value": self.values.ravel(),
        })


def empirical_tau(w: WeightSequence, q_grid: Sequence[float],
                  depths: Sequence[int]) -> EmpiricalTau:
    q_grid = np.asarray(q_grid, dtype=float)
    depths = _depths(depths)
    p = w.prefix(int(depths[-1]))
    values = np.empty((len(q_grid), len(depths)))
    for i, q in enumerate(q_grid):
        values[i] = _running_mean(tau_single(p, q))[depths - 1]
    return EmpiricalTau(q_grid=q_grid, depths=depths, values=values)


class TailExtrema(NamedTuple):
    liminf: float
    limsup: float


class LimitEstimate(BaseModel):
    """Tail extrema of tau_n(q) over the supplied schedule, with the depths
    where each is approached."""
    q: float
    liminf: float
    limsup: float
    liminf_depths: list[int]
    limsup_depths: list[int]
    tail_depths: list[int]

    @computed_field
    @property
    def gap(self) -> float:
        return self.limsup - self.liminf


def _tail_extrema(profile: np.ndarray, depths: np.ndarray,
                  tail_fraction: float) -> tuple[np.ndarray, np.ndarray]:
    tail = depths[_tail_slice(len(depths), tail_fraction)]
    return tail, profile[tail - 1]


def tau_limits(w: WeightSequence, q: float, depths: Sequence[int],
               tail_fraction: float = DEFAULT_TAIL_FRACTION,
               near: float = 1e-3) -> LimitEstimate:
    depths = _depths(depths)
    profile = tau_profile(w, q, int(depths[-1]))
    tail, values = _tail_extrema(profile, depths, tail_fraction)
    low, high = float(values.min()), float(values.max())
    return LimitEstimate(
        q=q,
        liminf=low,
        limsup=high,
        liminf_depths=tail[values <= low + near].tolist(),
        limsup_depths=tail[values >= high - near].tolist(),
        tail_depths=tail.tolist(),
    )


def limit_exists(estimate: LimitEstimate, tolerance: float = 1e-3) -> bool:
    """Whether tau_n(q) has settled on the schedule tail (tail extrema agree)."""
    return estimate.gap <= tolerance


class LegendrePoint(BaseModel):
    alpha: float
    value: float
    argmin_q: float
    on_boundary: bool = False


def _grid(q_grid: Sequence[float], tau_values: Sequence[float]):
    q_grid = np.asarray(q_grid, dtype=float)
    tau_values = np.asarray(tau_values, dtype=float)
    if q_grid.size == 0:
        raise PreconditionError("the q grid is empty")
    if q_grid.shape != tau_values.shape:
        raise PreconditionError(
            f"q grid has {q_grid.size} points but {tau_values.size} tau values were given")
    if np.any(np.diff(q_grid) <= 0):
        raise PreconditionError("the q grid must be strictly increasing")
    return q_grid, tau_values


def _boundary_hits(objective: np.ndarray, index: np.ndarray) -> np.ndarray:
    """Minimizer on the grid edge and strictly below its inner neighbour."""
    last = objective.shape[-1] - 1
    if last == 0:
        return np.ones_like(index, dtype=bool)
    low = (index == 0) & (objective[:, 0] < objective[:, 1] - 1e-12)
    high = (index == last) & (objective[:, last] < objective[:, last - 1] - 1e-12)
    return low | high


def legendre_curve(q_grid: Sequence[float], tau_values: Sequence[float],
                   alphas: Sequence[float]) -> list[LegendrePoint]:
    """tau*(alpha) = min over the grid of alpha * q + tau(q)."""
    q_grid, tau_values = _grid(q_grid, tau_values)
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    objective = alphas[:, None] * q_grid[None, :] + tau_values[None, :]
    index = np.argmin(objective, axis=1)
    values = objective[np.arange(len(alphas)), index]
    boundary = _boundary_hits(objective, index)

    if boundary.any():
        hit = alphas[boundary]
        logger.warning(
            "Legendre minimizer on the grid boundary for %d alpha value(s) in [%.6g, %.6g]",
            hit.size, hit.min(), hit.max())
        warnings.warn(
            f"infimum over q may lie outside [{q_grid[0]}, {q_grid[-1]}] for "
            f"{hit.size} alpha value(s)", LegendreBoundaryWarning, stacklevel=2)

    return [LegendrePoint(alpha=float(a), value=float(v), argmin_q=float(q_grid[i]),
                          on_boundary=bool(b))
            for a, v, i, b in zip(alphas, values, index, boundary)]


def legendre(q_grid: Sequence[float], tau_values: Sequence[float],
             alpha: float) -> LegendrePoint:
    return legendre_curve(q_grid, tau_values, [alpha])[0]


def entropy_profile(w: WeightSequence, n: int) -> np.ndarray:
    """(1/k) sum_{i<=k} h(p_i) = -tau_k'(1) for k = 1..n."""
    if n < 1:
        raise PreconditionError(f"depth must be >= 1, got {n}")
    return _running_mean(binary_entropy(w.prefix(n)))


def entropy_dimension(w: WeightSequence, depths: Sequence[int],
                      tail_fraction: float = DEFAULT_TAIL_FRACTION) -> TailExtrema:
    depths = _depths(depths)
    _, values = _tail_extrema(entropy_profile(w, int(depths[-1])), depths, tail_fraction)
    return TailExtrema(float(values.min()), float(values.max()))


def lower_bound_profile(w: WeightSequence, q: float, n: int) -> np.ndarray:
    """-q tau_k'(q) + tau_k(q) for k = 1..n."""
    if n < 1:
        raise PreconditionError(f"depth must be >= 1, got {n}")
    p = w.prefix(n)
    return _running_mean(-q * tau_single_d1(p, q) + tau_single(p, q))


def level_set_lower_bound(w: WeightSequence, q: float, depths: Sequence[int],
                          tail_fraction: float = DEFAULT_TAIL_FRACTION) -> float:
    """Tail liminf of -q tau_n'(q) + tau_n(q): a lower bound for the dimension of
    the points whose local exponents accumulate on [-tau'(q+), -tau'(q-)]."""
    depths = _depths(depths)
    profile = lower_bound_profile(w, q, int(depths[-1]))
    _, values = _tail_extrema(profile, depths, tail_fraction)
    return float(values.min())


def derivative_profile(w: WeightSequence, q: float, n: int) -> np.ndarray:
    """tau_k'(q) for k = 1..n."""
    return _running_mean(tau_single_d1(w.prefix(n), q))


class DerivativeBracket(BaseModel):
    """Derivatives of tau_n along the depths where tau_n(q) is near its tail
    limsup, against one-sided difference quotients of the limsup estimate.

    The one-sided derivatives are estimates with offset ``eps_q``, and the choice
    of subsequence at finite depth is heuristic.
    """
    q: float
    eps_q: float
    subsequence: list[int]
    derivative_min: float
    derivative_max: float
    left_derivative: float
    right_derivative: float
    tolerance: float
    violated: bool

    @computed_field
    @property
    def width(self) -> float:
        return self.right_derivative - self.left_derivative


def subsequence_derivative_bracket(w: WeightSequence, q: float, depths: Sequence[int],
                                   eps_q: float = 1e-3, near: float = 1e-3,
                                   tolerance: float = 1e-2,
                                   tail_fraction: float = DEFAULT_TAIL_FRACTION
                                   ) -> DerivativeBracket:
    depths = _depths(depths)
    tail = depths[_tail_slice(len(depths), tail_fraction)]
    if tail.size < 3:
        raise ScheduleTooShortError(
            f"the schedule tail {tail.tolist()} has fewer than 3 depths")
    if eps_q <= 0:
        raise PreconditionError(f"eps_q must be positive, got {eps_q}")

    n = int(depths[-1])
    p = w.prefix(n)
    idx = tail - 1

    def limsup_at(x: float) -> float:
        return float(_running_mean(tau_single(p, x))[idx].max())

    centre = _running_mean(tau_single(p, q))[idx]
    top = float(centre.max())
    chosen = centre >= top - near
    slopes = _running_mean(tau_single_d1(p, q))[idx][chosen]

    left = (top - limsup_at(q - eps_q)) / eps_q
    right = (limsup_at(q + eps_q) - top) / eps_q
    low, high = float(slopes.min()), float(slopes.max())
    violated = low < left - tolerance or high > right + tolerance
    if violated:
        logger.warning(
            "Subsequence derivatives [%.6g, %.6g] at q=%s fall outside the bracket "
            "[%.6g, %.6g]", low, high, q, left, right)

    return DerivativeBracket(
        q=q, eps_q=eps_q, subsequence=tail[chosen].tolist(),
        derivative_min=low, derivative_max=high,
        left_derivative=left, right_derivative=right,
        tolerance=tolerance, violated=violated,
    )


def geometric_depths(start: int, stop: int, count: int) -> list[int]:
    """Roughly log-spaced integer depths in [start, stop], duplicates removed."""
    if not 1 <= start <= stop or count < 1:
        raise PreconditionError(
            f"need 1 <= start <= stop and count >= 1, got {start}, {stop}, {count}")
    raw = np.rint(np.geomspace(start, stop, count)).astype(int)
    return np.unique(raw).tolist()
