"""Gibbs reweighting of a Bernoulli product at parameter q.

nu(I) is proportional to mu(I)^q at every depth. For a product measure the
normalization factorizes level by level, so nu is again a product with weights
p' = p^q / (p^q + (1-p)^q) and no limiting procedure is needed.
"""
import logging
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, computed_field
from scipy.special import logsumexp

from cointoss import spectrum
from cointoss.errors import PreconditionError
from cointoss.measure import Gibbs, WeightSequence, cylinder_log_masses


logger = logging.getLogger(__name__)


def gibbs_reweight(w: WeightSequence, q: float) -> WeightSequence:
    if q == 1.0:
        return w
    return Gibbs(source=w, q=q)


class ConsistencyReport(BaseModel):
    q: float
    depth: int
    cylinders: int
    max_discrepancy: float


class CompositionReport(BaseModel):
    q: float
    s: float
    depth: int
    lhs: float
    rhs: float

    @computed_field
    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)


def _normalized(log_masses: np.ndarray, q: float) -> np.ndarray:
    weighted = q * log_masses
    return np.exp(weighted - logsumexp(weighted))


def verify_consistency(w: WeightSequence, q: float, n: int,
                       cap: Optional[int] = None) -> ConsistencyReport:
    """Compare mu(I)^q / sum_J mu(J)^q at depth n with the sum over the two
    children of I of the same quantity at depth n + 1."""
    if n < 0:
        raise PreconditionError(f"depth must be >= 0, got {n}")
    parents = _normalized(cylinder_log_masses(w, n, cap), q)
    children = _normalized(cylinder_log_masses(w, n + 1, cap), q)
    discrepancy = float(np.abs(parents - children.reshape(-1, 2).sum(axis=1)).max())
    logger.debug("Consistency at q=%s, depth %d: max discrepancy %.3e", q, n, discrepancy)
    return ConsistencyReport(q=q, depth=n, cylinders=parents.size,
                             max_discrepancy=discrepancy)


def verify_tau_composition(w: WeightSequence, q: float, s: float,
                           n: int) -> CompositionReport:
    """tau_{nu,n}(s) against tau_{mu,n}(q s) - s tau_{mu,n}(q)."""
    lhs = spectrum.tau_n(gibbs_reweight(w, q), s, n)
    rhs = spectrum.tau_n(w, q * s, n) - s * spectrum.tau_n(w, q, n)
    return CompositionReport(q=q, s=s, depth=n, lhs=lhs, rhs=rhs)


def gibbs_dimension(w: WeightSequence, q: float, depths: Sequence[int],
                    tail_fraction: float = spectrum.DEFAULT_TAIL_FRACTION
                    ) -> spectrum.TailExtrema:
    """Tail extrema of -tau_{nu,n}'(1), the entropy of the reweighted sequence.

    Equal to -q tau_{mu,n}'(q) + tau_{mu,n}(q) on the source.
    """
    return spectrum.entropy_dimension(gibbs_reweight(w, q), depths, tail_fraction)
