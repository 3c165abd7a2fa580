"""Dual-route verification of candidate relations.

A binomial can be checked numerically, by evaluating it at random
rational parameter points of the model, and algebraically, by testing
its exponent difference against the integer kernel of the design
matrix.  The two routes agree on binomials supported on admissible
paths; both are kept separate on purpose so each can catch bugs in the
other.  All arithmetic is exact; a reported zero is a zero.
"""

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import ParameterError, RelationError
from .model import ParameterPoint, path_probability
from .paths import build_design_matrix, enumerate_paths

DEFAULT_TRIALS = 20
DEFAULT_DENOMINATOR_BOUND = 97

VANISHES = "vanishes-exactly"
NONZERO = "nonzero"


def sample_parameters(spec, seed, denominator_bound=DEFAULT_DENOMINATOR_BOUND):
    """Random strictly positive rational parameter point.

    Each row draws one integer weight in 1..denominator_bound per allowed
    entry and normalizes exactly, so rows sum to 1 by construction and
    every allowed entry is strictly positive.  Deterministic in seed;
    seeds may be any hashable accepted by random.Random.
    """
    if denominator_bound < 1:
        raise ParameterError("denominator_bound must be at least 1")
    widest = max((len(spec.successors(h)) for h in spec.histories), default=0)
    widest = max(widest, len(spec.initial_blocks))
    if denominator_bound < widest:
        raise ParameterError(
            f"denominator_bound {denominator_bound} is smaller than the widest "
            f"row ({widest} entries)")
    rng = random.Random(seed)
    weights = [rng.randint(1, denominator_bound) for _ in spec.initial_blocks]
    total = sum(weights)
    pi = {b: Fraction(w, total) for b, w in zip(spec.initial_blocks, weights)}
    trans = {}
    for level in spec.levels():
        for h in spec.histories:
            succ = spec.successors(h)
            if not succ:
                continue
            ws = [rng.randint(1, denominator_bound) for _ in succ]
            t = sum(ws)
            for s, w in zip(succ, ws):
                trans[(level, h, s)] = Fraction(w, t)
    return ParameterPoint(pi, trans)


def assignment_from_parameters(spec, params, table):
    """Path-probability assignment {index: Fraction} over a table."""
    return {j: path_probability(spec, params, path)
            for j, path in enumerate(table)}


def evaluate_binomial(binomial, assignment):
    """Exact residual of a binomial at a probability assignment.

    The assignment maps path indices to values; every index in the
    binomial's support must be present.
    """
    plus = Fraction(1)
    for i, e in binomial.plus:
        plus *= _lookup(assignment, i) ** e
    minus = Fraction(1)
    for i, e in binomial.minus:
        minus *= _lookup(assignment, i) ** e
    return plus - minus


def _lookup(assignment, i):
    try:
        return assignment[i]
    except KeyError:
        raise RelationError(f"assignment is missing path index {i}") from None


@dataclass(frozen=True)
class Witness:
    """Reproducible evidence of a nonzero evaluation."""
    trial: int
    residual: Fraction


@dataclass(frozen=True)
class RelationCheck:
    """Outcome of the numeric route for one binomial."""
    status: str
    trials: int
    seed: object
    relation_index: int = 0
    witness: Optional[Witness] = None

    @property
    def ok(self):
        return self.status == VANISHES


@dataclass(frozen=True)
class KernelCheck:
    """Outcome of the integer-kernel route for one binomial."""
    ok: bool
    residual: tuple


def _relation_rng_seed(seed, relation_index):
    # Streams are derived per relation so that verifying a set in any
    # order, or in parallel, reproduces the same points.
    return f"{seed}:{relation_index}"


def vanishes_on_model(binomial, spec, table=None, trials=DEFAULT_TRIALS,
                      seed=0, relation_index=0,
                      denominator_bound=DEFAULT_DENOMINATOR_BOUND):
    """Evaluate a binomial at sampled model points until one is nonzero.

    Returns a RelationCheck whose status is "vanishes-exactly" when all
    trials give an exact zero, or "nonzero" with a Witness naming the
    first failing trial and its exact residual.  This is a numeric
    certificate, not a proof: it samples strictly positive points, so a
    binomial outside the ideal fails with overwhelming probability but
    a pass is only evidence.
    """
    if table is None:
        table = enumerate_paths(spec)
    rng_seed = _relation_rng_seed(seed, relation_index)
    support = binomial.support()
    for t in range(trials):
        params = sample_parameters(spec, f"{rng_seed}:{t}", denominator_bound)
        assignment = {j: path_probability(spec, params, table[j]) for j in support}
        residual = evaluate_binomial(binomial, assignment)
        if residual != 0:
            return RelationCheck(NONZERO, trials, seed, relation_index,
                                 Witness(t, residual))
    return RelationCheck(VANISHES, trials, seed, relation_index)


def kernel_membership(binomial, design):
    """Exact integer test A(plus - minus) = 0 against a design matrix."""
    residual = design.apply_sparse(binomial.diff())
    return KernelCheck(all(r == 0 for r in residual), tuple(residual))


@dataclass(frozen=True)
class RelationEntry:
    index: int
    provenance: str
    vanish: RelationCheck
    kernel: Optional[KernelCheck]

    @property
    def ok(self):
        if not self.vanish.ok:
            return False
        return self.kernel is None or self.kernel.ok


@dataclass(frozen=True)
class VerificationReport:
    """Joint outcome of both routes over a RelationSet.

    Entries appear in relation order.  agreement is False when the two
    routes disagree on some relation, which signals a bug in one of
    them rather than a property of the model.
    """
    entries: tuple
    trials: int
    seed: object

    @property
    def all_pass(self):
        return all(e.ok for e in self.entries)

    @property
    def agreement(self):
        return all(e.kernel is None or e.kernel.ok == e.vanish.ok
                   for e in self.entries)

    def failures(self):
        return tuple(e for e in self.entries if not e.ok)

    def summary(self):
        total = len(self.entries)
        bad = len(self.failures())
        return (f"{total - bad}/{total} relations verified "
                f"(trials={self.trials}, seed={self.seed})")


def verify_relation_set(relset, spec, trials=DEFAULT_TRIALS, seed=0,
                        design=None,
                        denominator_bound=DEFAULT_DENOMINATOR_BOUND):
    """Run both verification routes over every relation of a set.

    The design matrix defaults to the spec's own; pass one explicitly
    to reuse it across calls.  Entries keep the set's order, and each
    relation gets its own random stream derived from (seed, index).
    """
    if design is None:
        design = build_design_matrix(spec, relset.table)
    entries = []
    for idx, (binomial, tag) in enumerate(relset):
        check = vanishes_on_model(binomial, spec, relset.table, trials,
                                  seed, idx, denominator_bound)
        kc = kernel_membership(binomial, design)
        entries.append(RelationEntry(idx, tag, check, kc))
    return VerificationReport(tuple(entries), trials, seed)
