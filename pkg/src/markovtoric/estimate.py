"""Closed-form maximum likelihood estimation from trajectory or count data.

Nonhomogeneous models are fitted by per-time conditional frequencies,
homogeneous models by pooling window counts across time.  Both are the
exact maximizers of the multinomial path likelihood, so no iteration is
ever performed.  Everything is kept as exact rationals; rounding happens
only in the reporting layer.

A zero-visit history row has an undefined estimate (0/0).  Undefined is
not zero: such rows are tracked explicitly and surface either as flags
or as errors when a requested quantity actually depends on them.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import EstimationError, ParameterError, RelationError
from .model import ParameterPoint
from .paths import enumerate_paths

PREFIX = "prefix"
SLIDE = "slide"


@dataclass(frozen=True)
class TrajectorySet:
    """Observed state sequences with multiplicities.

    records is a tuple of (trajectory, multiplicity) pairs; all
    trajectories share one length and multiplicities are positive.
    Multiplicities stay symbolic: counting operations weight by them
    instead of materializing repeats.
    """

    records: tuple

    def __post_init__(self):
        records = tuple((tuple(t), int(m)) for t, m in self.records)
        object.__setattr__(self, "records", records)
        if not records:
            raise EstimationError("empty trajectory set")
        lengths = {len(t) for t, _ in records}
        if len(lengths) != 1:
            raise EstimationError(f"ragged trajectory lengths {sorted(lengths)}")
        if any(m < 1 for _, m in records):
            raise EstimationError("multiplicities must be positive")

    @property
    def length(self):
        return len(self.records[0][0])

    @property
    def total(self):
        return sum(m for _, m in self.records)

    def check(self, spec):
        """Validate every record against a spec, reporting the offender."""
        for num, (traj, _) in enumerate(self.records, start=1):
            try:
                spec.check_sequence(traj, require_horizon=False)
            except Exception as exc:
                raise EstimationError(f"record {num}: {exc}") from exc
        return self

    @classmethod
    def from_sequences(cls, sequences):
        """Aggregate an iterable of raw sequences, preserving first-seen order."""
        tally = {}
        for seq in sequences:
            key = tuple(seq)
            tally[key] = tally.get(key, 0) + 1
        return cls(tuple(tally.items()))

    @classmethod
    def from_counts(cls, counts):
        """Logical expansion of a CountVector into full-horizon trajectories."""
        records = [(path, c) for path, c in zip(counts.table, counts.counts) if c > 0]
        return cls(tuple(records))


@dataclass(frozen=True)
class CountVector:
    """Path counts aligned with a PathTable."""

    table: object
    counts: tuple

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "counts", counts)
        if len(counts) != len(self.table):
            raise EstimationError(
                f"count vector has length {len(counts)}, table has {len(self.table)}")
        if any(c < 0 for c in counts):
            raise EstimationError("counts must be nonnegative")

    @property
    def total(self):
        return sum(self.counts)

    def __getitem__(self, i):
        return self.counts[i]


def counts_from_trajectories(trajs, spec, n=None, table=None):
    """Count each admissible length-n prefix path of the data.

    Length-n analysis of longer trajectories deliberately reads the
    prefix window (positions 1..n), not sliding windows.  The result is
    indexed by the path table of the spec at horizon n.
    """
    n = spec.horizon if n is None else int(n)
    if n < spec.order + 1:
        raise EstimationError(f"n = {n} is shorter than order + 1")
    if n > trajs.length:
        raise EstimationError(
            f"n = {n} exceeds the trajectory length {trajs.length}")
    spec_n = spec if n == spec.horizon else spec.with_horizon(n)
    if table is None:
        table = enumerate_paths(spec_n)
    counts = [0] * len(table)
    for traj, mult in trajs.records:
        counts[table.index(traj[:n])] += mult
    return CountVector(table, tuple(counts))


@dataclass(frozen=True)
class EstimateReport:
    """Fitted parameters with provenance of how they were tallied.

    pi maps initial blocks to exact rationals; trans maps
    (level, history, next_state) with level None when pooled.  undefined
    holds (level, history) rows whose visit count was zero.  horizon is
    the prefix length the tallies used; window records whether pooled
    tallies used the prefix or every window of longer trajectories.
    """

    kind: str
    order: int
    horizon: int
    total: int
    pi: dict
    trans: dict
    undefined: frozenset
    window: str = PREFIX

    def parameter_point(self):
        return ParameterPoint(self.pi, self.trans)

    def pi_value(self, block):
        return self.pi.get(tuple(block), Fraction(0))

    def trans_value(self, level, history, nxt):
        key = (level, tuple(history), nxt)
        if (level, tuple(history)) in self.undefined:
            raise EstimationError(f"row (level={level}, history={tuple(history)}) "
                                  f"is undefined (never visited)")
        return self.trans.get(key, Fraction(0))


def _resolve_horizon(trajs, spec, n):
    n = trajs.length if n is None else int(n)
    if n < spec.order + 1:
        raise EstimationError(f"n = {n} is shorter than order + 1")
    if n > trajs.length:
        raise EstimationError(f"n = {n} exceeds the trajectory length {trajs.length}")
    return n


def mle_nonhomogeneous(trajs, spec, n=None):
    """Per-time conditional frequencies: the exact nonhomogeneous MLE.

    For each level l the estimate of a^(l)[h, s] is the number of
    trajectories showing history h at positions l-k..l-1 followed by s,
    divided by the number showing h there at all.  The initial-block
    distribution is the empirical frequency of the first k states.
    """
    if spec.homogeneous:
        raise EstimationError("spec is homogeneous; use mle_homogeneous")
    n = _resolve_horizon(trajs, spec, n)
    k = spec.order
    M = trajs.total
    pi_counts = {}
    num = {}
    den = {}
    for traj, mult in trajs.records:
        block = traj[:k]
        pi_counts[block] = pi_counts.get(block, 0) + mult
        for level in range(k + 1, n + 1):
            h = traj[level - k - 1:level - 1]
            s = traj[level - 1]
            num[(level, h, s)] = num.get((level, h, s), 0) + mult
            den[(level, h)] = den.get((level, h), 0) + mult
    pi = {b: Fraction(pi_counts.get(b, 0), M) for b in spec.initial_blocks}
    trans = {}
    undefined = set()
    for level in range(k + 1, n + 1):
        for h in spec.histories:
            d = den.get((level, h), 0)
            if d == 0:
                undefined.add((level, h))
                continue
            for s in spec.successors(h):
                trans[(level, h, s)] = Fraction(num.get((level, h, s), 0), d)
    return EstimateReport("nonhomogeneous", k, n, M, pi, trans,
                          frozenset(undefined))


def mle_homogeneous(trajs, spec, n=None, window=PREFIX):
    """Pooled window frequencies: the exact homogeneous MLE.

    Transition tallies pool every level's windows into one table.  With
    window="prefix" only windows inside the first n positions count;
    window="slide" pools over the full trajectory length regardless of
    n.  The two agree when n is the trajectory length (the default).
    """
    if not spec.homogeneous:
        raise EstimationError("spec is nonhomogeneous; use mle_nonhomogeneous")
    if window not in (PREFIX, SLIDE):
        raise EstimationError(f"unknown window mode {window!r}")
    n = _resolve_horizon(trajs, spec, n)
    k = spec.order
    M = trajs.total
    last = trajs.length if window == SLIDE else n
    pi_counts = {}
    num = {}
    den = {}
    for traj, mult in trajs.records:
        block = traj[:k]
        pi_counts[block] = pi_counts.get(block, 0) + mult
        for level in range(k + 1, last + 1):
            h = traj[level - k - 1:level - 1]
            s = traj[level - 1]
            num[(h, s)] = num.get((h, s), 0) + mult
            den[h] = den.get(h, 0) + mult
    pi = {b: Fraction(pi_counts.get(b, 0), M) for b in spec.initial_blocks}
    trans = {}
    undefined = set()
    for h in spec.histories:
        d = den.get(h, 0)
        if d == 0:
            undefined.add((None, h))
            continue
        for s in spec.successors(h):
            trans[(None, h, s)] = Fraction(num.get((h, s), 0), d)
    return EstimateReport("homogeneous", k, n, M, pi, trans,
                          frozenset(undefined), window)


def fitted_path_probabilities(report, spec, table):
    """Push fitted parameters through the parametrization: p_hat = phi(theta_hat).

    Factors are taken left to right; once a defined factor is zero the
    path's probability is zero and later undefined rows are irrelevant.
    A path that still needs an undefined row while carrying positive
    mass has no well-defined fitted probability, and that is an error.

    Returns {path index: Fraction} over the table.
    """
    hom = report.kind == "homogeneous"
    if hom != spec.homogeneous:
        raise EstimationError(
            f"report is {report.kind} but the spec is not")
    if not hom and report.horizon != spec.horizon:
        raise EstimationError(
            f"nonhomogeneous report was tallied at horizon {report.horizon}, "
            f"spec needs {spec.horizon}")
    k = spec.order
    out = {}
    blocked = []
    for j, path in enumerate(table):
        value = report.pi_value(path[:k])
        for level in range(k + 1, spec.horizon + 1):
            if value == 0:
                break
            h = path[level - k - 1:level - 1]
            lv = None if hom else level
            if (lv, h) in report.undefined:
                blocked.append(path)
                value = None
                break
            value *= report.trans.get((lv, h, path[level - 1]), Fraction(0))
        if value is not None:
            out[j] = value
    if blocked:
        labels = ", ".join("".join(p) if all(len(s) == 1 for s in p)
                           else str(p) for p in blocked[:5])
        raise EstimationError(
            f"{len(blocked)} paths with positive mass need an undefined row "
            f"(first few: {labels})")
    return out


def mle_paths_hierarchical(u, spec, table=None):
    """Closed-form path MLE from positional window marginals of the counts.

    For the nonhomogeneous model the fitted probability of a path
    factors over its windows:

        p_hat = prod_j count(window at j-k..j) /
                (M * prod_j count(window at j-k+1..j))

    with numerators over the n-k windows of length k+1 and denominators
    over the n-k-1 interior windows of length k.  Marginals are summed
    over the admissible path table.  A path whose denominator vanishes
    gets None (undefined), never zero.
    """
    if spec.homogeneous:
        raise EstimationError(
            "hierarchical path formula applies to nonhomogeneous specs; "
            "pool with mle_homogeneous instead")
    if table is None:
        table = enumerate_paths(spec)
    if u.table is not table and tuple(u.table.paths) != tuple(table.paths):
        raise EstimationError("count vector is indexed by a different table")
    k, n = spec.order, spec.horizon
    M = u.total
    if M == 0:
        raise EstimationError("empty count vector")
    marg = {}
    for path, c in zip(table, u.counts):
        if c == 0:
            continue
        for start in range(0, n - k):
            w = (start, path[start:start + k + 1])
            marg[w] = marg.get(w, 0) + c
        for start in range(1, n - k):
            w = (start, path[start:start + k])
            marg[w] = marg.get(w, 0) + c
    out = {}
    for j, path in enumerate(table):
        num = 1
        for start in range(0, n - k):
            num *= marg.get((start, path[start:start + k + 1]), 0)
        den = M
        for start in range(1, n - k):
            den *= marg.get((start, path[start:start + k]), 0)
        out[j] = Fraction(num, den) if den != 0 else None
    return out


@dataclass(frozen=True)
class Recovery:
    """Parameters recovered from a path-probability assignment.

    undefined lists (level, history) rows whose conditioning marginal
    was zero.  inconsistencies is nonempty exactly when a homogeneous
    recovery found two time windows giving different exact ratios for
    the same pooled entry, i.e. when the assignment lies outside the
    homogeneous model; each record carries both conflicting ratios.
    """

    params: ParameterPoint
    undefined: frozenset
    inconsistencies: tuple = ()

    @property
    def consistent(self):
        return not self.inconsistencies


@dataclass(frozen=True)
class RatioConflict:
    history: tuple
    next_state: str
    level_a: int
    ratio_a: Fraction
    level_b: int
    ratio_b: Fraction


def recover_parameters(p, spec, table=None):
    """Invert the parametrization by marginal ratios.

    The initial distribution is the first-k marginal of p (normalized by
    its total).  Each transition entry is the conditional marginal ratio

        a^(l)[h, s] = p(window l-k..l = h,s) / p(window l-k..l-1 = h).

    Homogeneous specs take the ratio from the first level whose history
    marginal is positive and compare it against every other level
    exactly; disagreement is reported, not averaged, because it means p
    is not in the model.  When p = phi(theta) for valid theta, the
    recovered point reproduces p under phi exactly.
    """
    if table is None:
        table = enumerate_paths(spec)
    missing = [j for j in range(len(table)) if j not in p]
    if missing:
        raise ParameterError(f"assignment missing {len(missing)} path indices "
                             f"(first: {missing[0]})")
    total = sum((p[j] for j in range(len(table))), Fraction(0))
    if total == 0:
        raise ParameterError("assignment sums to zero; nothing to recover")
    k, n = spec.order, spec.horizon

    pi = {}
    for j, path in enumerate(table):
        b = path[:k]
        pi[b] = pi.get(b, Fraction(0)) + p[j]
    pi = {b: v / total for b, v in pi.items()}
    for b in spec.initial_blocks:
        pi.setdefault(b, Fraction(0))

    hist_marg = {}
    trans_marg = {}
    for j, path in enumerate(table):
        for level in range(k + 1, n + 1):
            h = path[level - k - 1:level - 1]
            s = path[level - 1]
            hist_marg[(level, h)] = hist_marg.get((level, h), Fraction(0)) + p[j]
            trans_marg[(level, h, s)] = trans_marg.get((level, h, s), Fraction(0)) + p[j]

    trans = {}
    undefined = set()
    conflicts = []
    if spec.homogeneous:
        for h in spec.histories:
            witness = None
            for level in range(k + 1, n + 1):
                m = hist_marg.get((level, h), Fraction(0))
                if m == 0:
                    continue
                ratios = {s: trans_marg.get((level, h, s), Fraction(0)) / m
                          for s in spec.successors(h)}
                if witness is None:
                    witness = (level, ratios)
                    for s, r in ratios.items():
                        trans[(None, h, s)] = r
                else:
                    for s, r in ratios.items():
                        if r != witness[1][s]:
                            conflicts.append(RatioConflict(
                                h, s, witness[0], witness[1][s], level, r))
            if witness is None:
                undefined.add((None, h))
    else:
        for level in range(k + 1, n + 1):
            for h in spec.histories:
                m = hist_marg.get((level, h), Fraction(0))
                if m == 0:
                    undefined.add((level, h))
                    continue
                for s in spec.successors(h):
                    trans[(level, h, s)] = (
                        trans_marg.get((level, h, s), Fraction(0)) / m)
    return Recovery(ParameterPoint(pi, trans), frozenset(undefined),
                    tuple(conflicts))


def birch_residual(p, u, design):
    """Exact residual of the Birch equations: M * A p - A u.

    Zero at p exactly when the assignment matches the data's sufficient
    statistics (after scaling counts to total mass M).  One Fraction per
    design-matrix row, in row order.
    """
    m = len(design.table)
    if len(u.counts) != m:
        raise RelationError("count vector and design matrix tables differ")
    dense_p = []
    for j in range(m):
        if j not in p:
            raise RelationError(f"assignment is missing path index {j}")
        dense_p.append(p[j])
    M = u.total
    ap = design.apply(dense_p)
    au = design.apply(u.counts)
    return tuple(M * x - y for x, y in zip(ap, au))


def loglikelihood(p, u):
    """Multinomial log-likelihood sum_i u_i log p_i (natural log, float).

    Paths with zero count contribute nothing even if their fitted
    probability is zero; a positive count on a zero probability gives
    -inf.
    """
    total = 0.0
    for j, c in enumerate(u.counts):
        if c == 0:
            continue
        if j not in p:
            raise EstimationError(f"assignment is missing path index {j}")
        q = Fraction(p[j])
        if q == 0:
            return float("-inf")
        if q < 0:
            raise EstimationError(f"negative probability {q} at index {j}")
        total += c * (math.log(q.numerator) - math.log(q.denominator))
    return total
