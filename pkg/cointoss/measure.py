"""Inhomogeneous Bernoulli products on the dyadic tree.

Digit convention, used everywhere in the package: at level j the digit 0 carries
the weight p_j and the digit 1 carries 1 - p_j, so that

    mu(I_{e1...en}) = prod_j p_j^(1 - e_j) * (1 - p_j)^e_j.

Weight sequences are frozen pydantic models tagged by ``kind``; they serialize to
JSON and evaluate lazily through ``prefix(n)``.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import (BaseModel, ConfigDict, Field, PositiveInt, TypeAdapter,
                      ValidationError, model_validator)
from scipy.special import expit

from cointoss import settings
from cointoss.errors import (ConfigError, DepthError, EnumerationBudgetError,
                             PreconditionError)


logger = logging.getLogger(__name__)

LN2 = math.log(2.0)

Probability = Annotated[float, Field(gt=0.0, lt=1.0)]

_FLOOR = float(np.finfo(float).tiny)
_CEIL = float(np.nextafter(1.0, 0.0))

# Blocks inspected when validating the growth of a block rule.
_GROWTH_CHECK_BLOCKS = 6


def tilt(p, q: float):
    """p^q / (p^q + (1 - p)^q), computed as a logistic of q * logit(p).

    Clipped to the open unit interval at floating point resolution.
    """
    p = np.asarray(p, dtype=float)
    t = expit(q * (np.log(p) - np.log1p(-p)))
    return np.clip(t, _FLOOR, _CEIL)


class BlockRule(BaseModel):
    """Block lengths l_1, l_2, ... used to splice sequences on depth ranges.

    superexponential: l_k = ceil(base^(k^2))
    geometric:        l_k = ceil(base^k)   (demo schedule, ratio does not diverge)
    explicit:         l_k = lengths[k-1]; the last listed block is open-ended
    """
    model_config = ConfigDict(frozen=True)

    kind: Literal["superexponential", "geometric", "explicit"] = "superexponential"
    base: float = Field(default=2.0, gt=1.0, le=64.0)
    lengths: tuple[PositiveInt, ...] = ()

    @model_validator(mode="after")
    def _check_growth(self):
        if self.kind == "explicit" and not self.lengths:
            raise ValueError("an explicit block rule needs at least one length")
        if self.kind == "geometric":
            logger.warning(
                "Geometric block rule (base %s): l_{k+1}/sum(l_i) tends to %.3g instead of "
                "diverging; use it for shallow demos only", self.base, self.base - 1)
            return self

        if self.kind == "explicit":
            lengths = list(self.lengths)
        else:
            lengths = [self.length(k)
                       for k in range(1, _GROWTH_CHECK_BLOCKS + 1)]
        ratios = [lengths[k + 1] / sum(lengths[:k + 1])
                  for k in range(len(lengths) - 1)]
        for k in range(len(ratios) - 1):
            if ratios[k + 1] < ratios[k]:
                raise ValueError(
                    f"block lengths {lengths[:k + 3]} do not grow superexponentially: "
                    f"ratio l_(k+1)/sum(l_i) decreases from {ratios[k]:.4g} to {ratios[k + 1]:.4g}")
        return self

    def length(self, k: int) -> Optional[int]:
        if k < 1:
            raise PreconditionError(f"block index starts at 1, got {k}")
        if self.kind == "superexponential":
            return math.ceil(self.base ** (k * k))
        if self.kind == "geometric":
            return math.ceil(self.base ** k)
        return self.lengths[k - 1] if k <= len(self.lengths) else None

    def ends(self, max_depth: int) -> tuple[int, ...]:
        """Cumulative block ends, the last one reaching at least ``max_depth``."""
        return _block_ends(self, max_depth)


@lru_cache(maxsize=256)
def _block_ends(rule: BlockRule, max_depth: int) -> tuple[int, ...]:
    ends: list[int] = []
    total = 0
    k = 1
    while total < max_depth:
        length = rule.length(k)
        if length is None:
            # explicit rule exhausted: the last block stays open
            ends[-1] = max_depth
            break
        total += length
        ends.append(total)
        k += 1
    return tuple(ends)


class _Sequence(BaseModel):
    model_config = ConfigDict(frozen=True)

    def prefix(self, n: int) -> np.ndarray:
        raise NotImplementedError


class Constant(_Sequence):
    kind: Literal["constant"] = "constant"
    p: Probability

    def prefix(self, n: int) -> np.ndarray:
        return np.full(n, self.p, dtype=float)


class Explicit(_Sequence):
    kind: Literal["explicit"] = "explicit"
    weights: tuple[Probability, ...] = Field(min_length=1)

    def prefix(self, n: int) -> np.ndarray:
        if n > len(self.weights):
            raise DepthError(
                f"explicit sequence has {len(self.weights)} weights, depth {n} requested")
        return np.array(self.weights[:n], dtype=float)


class Periodic(_Sequence):
    kind: Literal["periodic"] = "periodic"
    weights: tuple[Probability, ...] = Field(min_length=1)

    def prefix(self, n: int) -> np.ndarray:
        return np.resize(np.array(self.weights, dtype=float), n)


class Interleaved(_Sequence):
    """Deterministic interleaving of the weights with asymptotic frequencies.

    Position t goes to the component with the largest deficit
    fractions[i] * t - count_i (lowest index on ties). Deficits sum to zero and
    never drop below -1, so no count runs ahead of fractions[i] * t by more than
    one and none falls behind by more than k - 1.
    """
    kind: Literal["interleaved"] = "interleaved"
    fractions: tuple[float, ...] = Field(min_length=1)
    weights: tuple[Probability, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_fractions(self):
        if len(self.fractions) != len(self.weights):
            raise ValueError("fractions and weights must have the same length")
        if any(f <= 0.0 for f in self.fractions):
            raise ValueError("fractions must be strictly positive")
        if abs(math.fsum(self.fractions) - 1.0) > 1e-12:
            raise ValueError(
                f"fractions sum to {math.fsum(self.fractions)!r}, expected 1")
        return self

    def counts(self, n: int) -> np.ndarray:
        return np.bincount(quota_indices(self.fractions, n), minlength=len(self.fractions))

    def prefix(self, n: int) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)[quota_indices(self.fractions, n)]


class BlockSchedule(_Sequence):
    """Sequence i is active on blocks k with k = i mod m (blocks counted from 0).

    Each input keeps its own position counter across its blocks.
    """
    kind: Literal["block_schedule"] = "block_schedule"
    sequences: tuple["WeightSequence", ...] = Field(min_length=1)
    blocks: BlockRule = BlockRule()

    def block_ends(self, max_depth: int) -> list[int]:
        return [end for end in self.blocks.ends(max_depth) if end <= max_depth]

    def prefix(self, n: int) -> np.ndarray:
        m = len(self.sequences)
        counts = [0] * m
        segments = []
        start = 0
        for b, end in enumerate(self.blocks.ends(n)):
            stop = min(end, n)
            if stop <= start:
                break
            i = b % m
            segments.append((i, start, stop, counts[i]))
            counts[i] += stop - start
            start = stop

        pools = [seq.prefix(c) if c else np.empty(0)
                 for seq, c in zip(self.sequences, counts)]
        out = np.empty(n, dtype=float)
        for i, start, stop, offset in segments:
            out[start:stop] = pools[i][offset:offset + stop - start]
        return out


class Diagonal(_Sequence):
    """Block k carries the weights of stage k at the same depths; the last stage
    stays active after the stages run out."""
    kind: Literal["diagonal"] = "diagonal"
    stages: tuple["WeightSequence", ...] = Field(min_length=1)
    blocks: BlockRule = BlockRule()

    def block_ends(self, max_depth: int) -> list[int]:
        return [end for end in self.blocks.ends(max_depth) if end <= max_depth]

    def prefix(self, n: int) -> np.ndarray:
        last = len(self.stages) - 1
        segments = []
        reach = [0] * len(self.stages)
        start = 0
        for b, end in enumerate(self.blocks.ends(n)):
            stop = min(end, n)
            if stop <= start:
                break
            s = min(b, last)
            segments.append((s, start, stop))
            reach[s] = stop
            start = stop

        pools = [stage.prefix(r) if r else np.empty(0)
                 for stage, r in zip(self.stages, reach)]
        out = np.empty(n, dtype=float)
        for s, start, stop in segments:
            out[start:stop] = pools[s][start:stop]
        return out


class Gibbs(_Sequence):
    """Gibbs reweighting of ``source`` at parameter q: p' = p^q / (p^q + (1-p)^q)."""
    kind: Literal["gibbs"] = "gibbs"
    source: "WeightSequence"
    q: float = Field(allow_inf_nan=False)

    def prefix(self, n: int) -> np.ndarray:
        weights = self.source.prefix(n)
        if self.q == 1.0:
            return weights
        return tilt(weights, self.q)


WeightSequence = Annotated[
    Union[Constant, Explicit, Periodic, Interleaved,
          BlockSchedule, Diagonal, Gibbs],
    Field(discriminator="kind"),
]

BlockSchedule.model_rebuild()
Diagonal.model_rebuild()
Gibbs.model_rebuild()

SEQUENCE_ADAPTER = TypeAdapter(WeightSequence)


@lru_cache(maxsize=64)
def _quota_table(fractions: tuple[float, ...], size: int) -> np.ndarray:
    k = len(fractions)
    counts = [0] * k
    picks = np.empty(size, dtype=np.intp)
    for t in range(1, size + 1):
        best = 0
        best_deficit = fractions[0] * t - counts[0]
        for i in range(1, k):
            deficit = fractions[i] * t - counts[i]
            if deficit > best_deficit:
                best, best_deficit = i, deficit
        counts[best] += 1
        picks[t - 1] = best
    picks.flags.writeable = False
    return picks


def quota_indices(fractions: tuple[float, ...], n: int) -> np.ndarray:
    """Component index of positions 1..n of the largest-deficit interleaving."""
    size = max(1024, 1 << max(n - 1, 0).bit_length())
    return _quota_table(tuple(fractions), size)[:n]


def load_sequence(text: str) -> WeightSequence:
    try:
        return SEQUENCE_ADAPTER.validate_json(text)
    except ValidationError as exc:
        raise ConfigError(f"Invalid weight sequence: {exc}") from exc


def sequence_from_dict(data: dict) -> WeightSequence:
    try:
        return SEQUENCE_ADAPTER.validate_python(data)
    except ValidationError as exc:
        raise ConfigError(f"Invalid weight sequence: {exc}") from exc


def dump_sequence(w: WeightSequence, indent: Optional[int] = 2) -> str:
    return SEQUENCE_ADAPTER.dump_json(w, indent=indent).decode()


def block_end_depths(w: WeightSequence, max_depth: int) -> list[int]:
    if isinstance(w, (BlockSchedule, Diagonal)):
        return w.block_ends(max_depth)
    if isinstance(w, Gibbs):
        return block_end_depths(w.source, max_depth)
    raise PreconditionError(
        f"{w.kind} sequences have no block structure")


@dataclass(frozen=True, slots=True)
class CylinderPath:
    bits: tuple[int, ...] = ()

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise PreconditionError(f"cylinder digits must be 0 or 1: {self.bits}")

    @classmethod
    def from_string(cls, text: str) -> "CylinderPath":
        return cls(tuple(int(ch) for ch in text.strip()))

    @property
    def depth(self) -> int:
        return len(self.bits)

    def parent(self) -> "CylinderPath":
        if not self.bits:
            raise PreconditionError("the whole space has no parent cylinder")
        return CylinderPath(self.bits[:-1])

    def child(self, digit: int) -> "CylinderPath":
        return CylinderPath(self.bits + (digit,))

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


def weights(w: WeightSequence, n: int) -> np.ndarray:
    return w.prefix(n)


def weight_at(w: WeightSequence, n: int) -> float:
    if n < 1:
        raise PreconditionError(f"depth must be >= 1, got {n}")
    return float(w.prefix(n)[n - 1])


def cylinder_measure(w: WeightSequence, path: CylinderPath) -> float:
    mass = 1.0
    if path.depth == 0:
        return mass
    for p, bit in zip(w.prefix(path.depth).tolist(), path.bits):
        mass *= (1.0 - p) if bit else p
    return mass


def cylinder_log_mass(w: WeightSequence, path: CylinderPath) -> float:
    if path.depth == 0:
        return 0.0
    p = w.prefix(path.depth)
    bits = np.asarray(path.bits, dtype=bool)
    return float(np.where(bits, np.log1p(-p), np.log(p)).sum())


def local_exponent(w: WeightSequence, path: CylinderPath) -> float:
    """alpha_n = -log2 mu(I_n) / n, computed in the log domain."""
    if path.depth == 0:
        raise PreconditionError("the local exponent needs a path of depth >= 1")
    return -cylinder_log_mass(w, path) / (path.depth * LN2)


def _check_cap(n: int, cap: Optional[int]) -> None:
    cap = settings.ENUMERATION_CAP if cap is None else cap
    if n < 0:
        raise PreconditionError(f"depth must be >= 0, got {n}")
    if n > cap:
        raise EnumerationBudgetError(n, cap)


def cylinder_masses(w: WeightSequence, n: int, cap: Optional[int] = None) -> np.ndarray:
    """Measures of all 2^n cylinders; index i spells the path in binary, first digit
    most significant."""
    _check_cap(n, cap)
    masses = np.ones(1)
    for p in w.prefix(n).tolist():
        masses = np.column_stack((masses * p, masses * (1.0 - p))).ravel()
    return masses


def cylinder_log_masses(w: WeightSequence, n: int, cap: Optional[int] = None) -> np.ndarray:
    _check_cap(n, cap)
    logs = np.zeros(1)
    for p in w.prefix(n).tolist():
        logs = np.column_stack((logs + math.log(p), logs + math.log1p(-p))).ravel()
    return logs


def path_from_index(index: int, n: int) -> CylinderPath:
    return CylinderPath(tuple((index >> (n - 1 - j)) & 1 for j in range(n)))


def enumerate_cylinders(w: WeightSequence, n: int,
                        cap: Optional[int] = None) -> list[tuple[CylinderPath, float]]:
    masses = cylinder_masses(w, n, cap)
    return [(path_from_index(i, n), float(m)) for i, m in enumerate(masses.tolist())]


def _generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_digits(w: WeightSequence, n: int, count: int, seed) -> np.ndarray:
    """``count`` independent mu-typical paths of depth n as a (count, n) 0/1 array."""
    if n < 1:
        raise PreconditionError(f"depth must be >= 1, got {n}")
    rng = _generator(seed)
    p = w.prefix(n)
    return (rng.random((count, n)) >= p).astype(np.uint8)


def sample_path(w: WeightSequence, n: int, seed) -> CylinderPath:
    digits = sample_digits(w, n, 1, seed)[0]
    return CylinderPath(tuple(int(d) for d in digits))
