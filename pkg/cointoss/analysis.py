"""Numerical checks of the multifractal formalism: coarse-grained spectra from
exhaustive enumeration and Monte Carlo statistics of local exponents."""
import logging
import math
from typing import Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, computed_field

from cointoss.errors import PreconditionError
from cointoss.gibbs import gibbs_reweight
from cointoss.measure import LN2, WeightSequence, cylinder_log_masses, sample_digits
from cointoss.spectrum import legendre_curve, tau_single, tau_single_d1, tau_single_d2


logger = logging.getLogger(__name__)

# Rows of sampled digits held in memory at once, in cells.
SAMPLE_CHUNK_CELLS = 1 << 22


class CoarseSpectrum(BaseModel):
    """Counts N_n(alpha) of depth-n cylinders by local exponent bin."""
    depth: int
    edges: list[float]
    counts: list[int]

    @computed_field
    @property
    def centers(self) -> list[float]:
        edges = np.asarray(self.edges)
        return (0.5 * (edges[:-1] + edges[1:])).tolist()

    @computed_field
    @property
    def normalized(self) -> list[Optional[float]]:
        """log2(N_n) / n, None for empty bins."""
        return [math.log2(c) / self.depth if c else None for c in self.counts]

    def to_rows(self) -> list[dict]:
        return [{"alpha_bin": a, "count": c, "normalized": v}
                for a, c, v in zip(self.centers, self.counts, self.normalized) if c]


def local_exponents(w: WeightSequence, n: int, cap: Optional[int] = None) -> np.ndarray:
    """-log2 mu(I) / n for every depth-n cylinder, in enumeration order."""
    if n < 1:
        raise PreconditionError(f"depth must be >= 1, got {n}")
    return -cylinder_log_masses(w, n, cap) / (n * LN2)


def coarse_spectrum(w: WeightSequence, n: int, bins: Union[int, Sequence[float]] = 50,
                    cap: Optional[int] = None) -> CoarseSpectrum:
    exponents = local_exponents(w, n, cap)
    low, high = float(exponents.min()), float(exponents.max())
    if isinstance(bins, int) and high - low < 1e-12:
        bins = [low - 1e-9, high + 1e-9]
    counts, edges = np.histogram(exponents, bins=bins)
    if counts.sum() != exponents.size:
        raise PreconditionError(
            f"bin edges [{edges[0]}, {edges[-1]}] miss part of the exponent range "
            f"[{low}, {high}]")
    return CoarseSpectrum(depth=n, edges=edges.tolist(), counts=counts.tolist())


class ExponentRange(BaseModel):
    depth: int
    low: float
    high: float


def exponent_range(w: WeightSequence, n: int) -> ExponentRange:
    """Smallest and largest local exponent at depth n, from the extremal paths
    that take the heavier (lighter) child at every level."""
    if n < 1:
        raise PreconditionError(f"depth must be >= 1, got {n}")
    p = w.prefix(n)
    costs = np.vstack([-np.log(p), -np.log1p(-p)]) / LN2
    return ExponentRange(depth=n, low=float(costs.min(axis=0).sum() / n),
                         high=float(costs.max(axis=0).sum() / n))


def sample_local_exponents(w: WeightSequence, n: int, count: int, seed,
                           sampler: Optional[WeightSequence] = None) -> np.ndarray:
    """Local exponents of ``w`` at depth n along ``count`` paths drawn from
    ``sampler`` (``w`` itself by default)."""
    if count < 1:
        raise PreconditionError(f"sample count must be >= 1, got {count}")
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    sampler = w if sampler is None else sampler
    rows = max(1, SAMPLE_CHUNK_CELLS // n)
    out = np.empty(count)
    for start in range(0, count, rows):
        stop = min(count, start + rows)
        out[start:stop] = path_exponents(w, sample_digits(sampler, n, stop - start, rng))
    return out


def path_exponents(w: WeightSequence, digits: np.ndarray) -> np.ndarray:
    """Local exponents of ``w`` along each row of a (count, n) 0/1 digit array."""
    digits = np.atleast_2d(digits).astype(bool)
    n = digits.shape[1]
    if n < 1:
        raise PreconditionError("paths must have depth >= 1")
    p = w.prefix(n)
    return -np.where(digits, np.log1p(-p), np.log(p)).sum(axis=1) / (n * LN2)


class ExponentStatistics(BaseModel):
    """Sample mean of local exponents against its analytic value.

    Under Gibbs(w, q) sampling the exponent of w has mean -(1/n) sum d1(p_i, q)
    and variance (1/n^2) sum d2(p_i, q) / ln 2 along a single path.
    """
    depth: int
    q: float
    samples: int
    expected_mean: float
    path_std: float
    sample_mean: float

    @computed_field
    @property
    def standard_error(self) -> float:
        return self.path_std / math.sqrt(self.samples)

    @computed_field
    @property
    def z_score(self) -> float:
        if self.standard_error == 0.0:
            return 0.0 if self.sample_mean == self.expected_mean else math.inf
        return (self.sample_mean - self.expected_mean) / self.standard_error


def exponent_statistics(w: WeightSequence, n: int, samples: int, seed,
                        q: float = 1.0) -> ExponentStatistics:
    p = w.prefix(n)
    exponents = sample_local_exponents(w, n, samples, seed, sampler=gibbs_reweight(w, q))
    return ExponentStatistics(
        depth=n, q=q, samples=samples,
        expected_mean=float(-np.sum(tau_single_d1(p, q)) / n),
        path_std=float(math.sqrt(np.sum(tau_single_d2(p, q)) / LN2) / n),
        sample_mean=float(exponents.mean()),
    )


class EmptyLevelInterval(BaseModel):
    """Exponents in (low, high) are never reached as liminf local exponents of
    the alternating-block measure, yet the Legendre transform of its spectrum is
    positive there."""
    p: float
    p_tilde: float
    low: float
    high: float
    alphas: list[float]
    legendre_values: list[float]

    @computed_field
    @property
    def formalism_fails(self) -> bool:
        return all(v > 0.0 for v in self.legendre_values)


def empty_level_interval(p: float, p_tilde: float, q_grid: Sequence[float],
                         alpha_count: int = 25) -> EmptyLevelInterval:
    if not 0.0 < p < p_tilde < 0.5:
        raise PreconditionError(f"need 0 < p < p_tilde < 1/2, got {p}, {p_tilde}")
    low, high = -math.log2(p_tilde), -math.log2(p)
    q_grid = np.asarray(q_grid, dtype=float)
    sup = np.maximum(tau_single(p, q_grid), tau_single(p_tilde, q_grid))
    alphas = np.linspace(low, high, alpha_count + 2)[1:-1]
    points = legendre_curve(q_grid, sup, alphas)
    return EmptyLevelInterval(p=p, p_tilde=p_tilde, low=low, high=high,
                              alphas=alphas.tolist(),
                              legendre_values=[pt.value for pt in points])


def constant_peak_exponent(p: float) -> float:
    """Exponent of the most populated bin for Constant(p): -log2(p (1 - p)) / 2."""
    return -0.5 * math.log2(p * (1.0 - p))
