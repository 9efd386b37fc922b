"""Exact counting and exact-uniform sampling of constrained occupancies.

The admissible set M holds every occupancy vector {N_i} with
sum N_i = N and sum N_i x_i <= E over an integer level spectrum.  A
level with multiplicity q is expanded into q unit sub-levels of equal
energy, so uniform sampling over the expanded vectors realizes the
equiprobable ensemble; outputs are re-aggregated per original level.

Counting uses a lazy big-integer dynamic program over states
(level index j, remaining count n, remaining energy e) with the
two-branch recurrence

    count(j, n, e) = count(j+1, n, e) + count(j, n-1, e - x_j)

plus two closed-form cutoffs: infeasible states (e below the cheapest
completion) are zero and slack states (e at or above the dearest
completion) reduce to the stars-and-bars binomial.  The retained table
drives sequential conditional sampling, which is exactly uniform
because every branch probability is a ratio of exact counts.

State space scales like s * N * E, so a budget caps the table; callers
with report-scale instances should use the streaming batch sampler in
`negdim.concentration` instead.
"""

import hashlib
import math
import random
from dataclasses import dataclass

from .bose_model import EnsembleConstraints, LevelSpectrum
from .errors import BudgetExceededError, DomainError, ValidationError

DEFAULT_TABLE_BUDGET = 5_000_000


@dataclass(frozen=True)
class VariantSample:
    """One occupancy vector {N_i}, aggregated per spectrum level."""

    counts: tuple

    def __post_init__(self):
        if any(c < 0 or c != int(c) for c in self.counts):
            raise ValidationError("occupancies must be nonnegative integers")
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))

    @property
    def n_total(self) -> int:
        return sum(self.counts)

    def energy(self, spec: LevelSpectrum) -> float:
        if len(self.counts) != spec.s:
            raise ValidationError("sample length does not match spectrum")
        return float(sum(c * x for c, x in zip(self.counts, spec.x)))


def integer_levels(spec: LevelSpectrum):
    """(x_i, q_i) as nonnegative ints; DomainError if not representable."""
    out = []
    for x, q in zip(spec.x, spec.q):
        xi, qi = int(round(x)), int(round(q))
        if abs(x - xi) > 1e-9 or xi < 0:
            raise DomainError(
                f"counting requires nonnegative integer levels, got x={x}"
            )
        if abs(q - qi) > 1e-9 or qi < 1:
            raise DomainError(
                f"counting requires positive integer multiplicities, got q={q}"
            )
        out.append((xi, qi))
    return out


def micro_levels(spec: LevelSpectrum):
    """Expand multiplicities into unit sub-levels; map micro -> level."""
    xs, owner = [], []
    for i, (x, q) in enumerate(integer_levels(spec)):
        xs.extend([x] * q)
        owner.extend([i] * q)
    return tuple(xs), tuple(owner)


class LazyCounter:
    """Memoized exact counts over a fixed tuple of unit levels.

    `count(j, n, e)` is the number of ways to place n units on levels
    xs[j:] with energy at most e.  Levels may appear in any order; the
    feasibility and slack cutoffs use per-suffix extremes.
    """

    def __init__(self, xs, max_states=DEFAULT_TABLE_BUDGET):
        self.xs = tuple(int(x) for x in xs)
        if any(x < 0 for x in self.xs):
            raise DomainError("unit levels must be nonnegative integers")
        self.max_states = int(max_states)
        self.memo = {}
        m = len(self.xs)
        suf_min = [0] * (m + 1)
        suf_max = [0] * (m + 1)
        for j in range(m - 1, -1, -1):
            suf_min[j] = min(self.xs[j], suf_min[j + 1]) if j < m - 1 else self.xs[j]
            suf_max[j] = max(self.xs[j], suf_max[j + 1]) if j < m - 1 else self.xs[j]
        self._suf_min = tuple(suf_min)
        self._suf_max = tuple(suf_max)

    def _closed_form(self, j, n, e):
        """Closed-form count, or None for tight states."""
        if n == 0:
            return 1 if e >= 0 else 0
        if j >= len(self.xs):
            return 0
        if e < n * self._suf_min[j]:
            return 0
        if e >= n * self._suf_max[j]:
            width = len(self.xs) - j
            return math.comb(n + width - 1, width - 1)
        return None

    def _key(self, j, n, e):
        cap = n * self._suf_max[j] - 1
        return (j, n, cap if e > cap else e)

    def count(self, j, n, e):
        direct = self._closed_form(j, n, e)
        if direct is not None:
            return direct
        memo = self.memo
        root = self._key(j, n, e)
        if root in memo:
            return memo[root]
        xs = self.xs
        stack = [root]
        while stack:
            state = stack[-1]
            if state in memo:
                stack.pop()
                continue
            sj, sn, se = state
            pending = []
            total = 0
            for cj, cn, ce in ((sj + 1, sn, se), (sj, sn - 1, se - xs[sj])):
                part = self._closed_form(cj, cn, ce)
                if part is None:
                    ck = self._key(cj, cn, ce)
                    part = memo.get(ck)
                    if part is None:
                        pending.append(ck)
                        continue
                total += part
            if pending:
                stack.extend(pending)
                continue
            memo[state] = total
            stack.pop()
            if len(memo) > self.max_states:
                raise BudgetExceededError(
                    "exact count table exceeded its state budget; shrink the "
                    "instance or raise max_states",
                    states=len(memo),
                    budget=self.max_states,
                )
        return memo[root]

    @property
    def states(self) -> int:
        return len(self.memo)


class CountTable:
    """Exact counts for one (spectrum, constraints) instance.

    Wraps a `LazyCounter` over the expanded unit levels and retains the
    closure of the root state, which is exactly the set of states a
    sampling walk can visit.
    """

    def __init__(self, spec, cons, max_states=DEFAULT_TABLE_BUDGET):
        self.spec = spec
        self.cons = cons
        self.xs, self.owner = micro_levels(spec)
        self.n_total = int(cons.n_total)
        self.energy = int(math.floor(cons.energy + 1e-9))
        self.counter = LazyCounter(self.xs, max_states=max_states)
        self.total = self.counter.count(0, self.n_total, self.energy)

    def lookup(self, j, n, e):
        return self.counter.count(j, n, e)

    @property
    def states(self) -> int:
        return self.counter.states


def count_variants(spec: LevelSpectrum, cons: EnsembleConstraints,
                   max_states: int = DEFAULT_TABLE_BUDGET):
    """Exact |M| plus the retained count table for sampling."""
    table = CountTable(spec, cons, max_states=max_states)
    return table.total, table


def derive_sample_seed(seed: int, index: int, tag: str = "sample") -> int:
    """Stream seed for one unit of work; independent of any worker split."""
    digest = hashlib.sha256(f"negdim:{tag}:{seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:16], "big")


def stars_and_bars_draw(rng, n, cells):
    """Uniform composition of n into `cells` parts via random dividers."""
    if cells == 1:
        return [n]
    slots = n + cells - 1
    dividers = sorted(rng.sample(range(slots), cells - 1))
    parts = []
    prev = -1
    for d in dividers:
        parts.append(d - prev - 1)
        prev = d
    parts.append(slots - prev - 1)
    return parts


def _sample_one(table: CountTable, rng) -> VariantSample:
    xs, owner = table.xs, table.owner
    agg = [0] * table.spec.s
    j, n, e = 0, table.n_total, table.energy
    while n > 0:
        if e >= n * table.counter._suf_max[j]:
            for offset, k in enumerate(stars_and_bars_draw(rng, n, len(xs) - j)):
                agg[owner[j + offset]] += k
            return VariantSample(tuple(agg))
        here = table.lookup(j, n, e)
        close = table.lookup(j + 1, n, e)
        if rng.randrange(here) < close:
            j += 1
        else:
            agg[owner[j]] += 1
            n -= 1
            e -= xs[j]
    return VariantSample(tuple(agg))


def sample_variants(table: CountTable, cfg) -> list:
    """Exact-uniform samples from M; deterministic given cfg.seed.

    `cfg` needs `n_samples` and `seed` (a ConcentrationConfig works).
    Each sample gets its own RNG derived from (seed, sample index), so a
    worker split along sample indices cannot change the output.
    """
    if table.total <= 0:
        raise DomainError("cannot sample from an empty admissible set")
    n_samples = int(cfg.n_samples)
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    out = []
    for k in range(n_samples):
        rng = random.Random(derive_sample_seed(cfg.seed, k))
        out.append(_sample_one(table, rng))
    return out
