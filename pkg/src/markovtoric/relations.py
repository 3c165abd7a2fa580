"""Binomial and linear relations that vanish on a model's path distribution.

Relations live in the polynomial ring with one variable per path.  A
binomial is stored as a pair of exponent vectors (plus, minus) over path
indices of a fixed PathTable.  Generation never computes Groebner bases;
every family here is emitted directly from the combinatorial shape of
the parametrization and is sound by construction.  The homogeneous
exchange family is sound but known incomplete: pooled models can satisfy
relations of higher degree that no quadratic family reaches.
"""

import itertools
from dataclasses import dataclass

from .errors import RelationError
from .paths import enumerate_paths, block_counts

PROV_NONHOM = "nonhom-exchange"
PROV_HOM = "hom-exchange"
PROV_LINEAR = "hom-linear"
PROV_SLICE = "slice"


@dataclass(frozen=True)
class Binomial:
    """Canonical binomial p^plus - p^minus over path indices.

    plus and minus are index-sorted ((index, exponent), ...) tuples with
    positive exponents, disjoint after common-factor removal, and plus
    is the lexicographically larger dense exponent vector.  Build
    instances through canonicalize().
    """

    plus: tuple
    minus: tuple

    def degree(self):
        return sum(e for _, e in self.plus)

    def support(self):
        return tuple(sorted({i for i, _ in self.plus} | {i for i, _ in self.minus}))

    def diff(self):
        """Sparse exponent difference plus - minus."""
        d = {i: e for i, e in self.plus}
        for i, e in self.minus:
            d[i] = d.get(i, 0) - e
        return d

    def text(self, table):
        """Human-readable form, e.g. p_011*p_110 - p_010*p_111."""
        def side(terms):
            parts = []
            for i, e in terms:
                var = "p_" + _label(table[i])
                parts.append(var if e == 1 else f"{var}^{e}")
            return "*".join(parts) if parts else "1"
        return f"{side(self.plus)} - {side(self.minus)}"


def _label(path):
    if all(len(s) == 1 for s in path):
        return "".join(path)
    return ",".join(path)


def _lex_larger(u, v):
    # Dense lexicographic comparison of sparse exponent vectors.
    for i in sorted(set(u) | set(v)):
        du, dv = u.get(i, 0), v.get(i, 0)
        if du != dv:
            return du > dv
    return False


def canonicalize(plus, minus):
    """Canonical form of a raw binomial given as two exponent mappings.

    Removes the common monomial factor, rejects the degenerate case
    where both sides coincide, and orients the sign so that the plus
    side is the lexicographically larger exponent vector.

    Args:
        plus, minus: mappings or (index, exponent) iterables.

    Raises:
        RelationError: if the two sides are equal after reduction.
    """
    u = _as_exponents(plus)
    v = _as_exponents(minus)
    for i in set(u) & set(v):
        c = min(u[i], v[i])
        u[i] -= c
        v[i] -= c
        if u[i] == 0:
            del u[i]
        if v[i] == 0:
            del v[i]
    if u == v:
        raise RelationError("degenerate binomial: both sides are equal")
    if not _lex_larger(u, v):
        u, v = v, u
    return Binomial(tuple(sorted(u.items())), tuple(sorted(v.items())))


def _as_exponents(side):
    items = side.items() if hasattr(side, "items") else side
    out = {}
    for i, e in items:
        if e < 0:
            raise RelationError(f"negative exponent {e} on index {i}")
        if e:
            out[i] = out.get(i, 0) + e
    return out


@dataclass(frozen=True)
class RelationSet:
    """A batch of relations bound to one PathTable.

    binomials and provenance are parallel tuples; provenance tags are
    one of the PROV_* strings.  slice_paths lists inadmissible paths of
    the unrestricted companion model whose variables are pinned to zero
    (each is a linear relation p_path = 0).
    """

    table: object
    binomials: tuple
    provenance: tuple
    slice_paths: tuple = ()

    def __len__(self):
        return len(self.binomials)

    def __iter__(self):
        return iter(zip(self.binomials, self.provenance))

    def tagged(self, tag):
        return tuple(b for b, t in self if t == tag)

    def text_lines(self):
        lines = [f"{b.text(self.table)}  [{t}]" for b, t in self]
        lines += [f"p_{_label(p)} = 0  [{PROV_SLICE}]" for p in self.slice_paths]
        return lines


def _dedup(raw, tag):
    seen = {}
    for b in raw:
        if b not in seen:
            seen[b] = tag
    return tuple(seen), tuple(seen.values())


def nonhomogeneous_generators(spec, table=None):
    """Exchange binomials generating the nonhomogeneous vanishing ideal.

    For every split position r in {1, ..., n-k-1}, every separator block
    J of length k, and admissible prefixes I != I' and suffixes S != S'
    the quadric

        p_{I J S} p_{I' J S'} - p_{I J S'} p_{I' J S}

    vanishes on the model.  The two degenerate splits r = 0 and r = n-k
    produce zero binomials and are skipped.  For restricted specs the
    family is generated over the unrestricted shape and relations
    touching any inadmissible path are dropped; those paths come back
    separately as slice_paths, each pinned to zero.

    Returns a RelationSet over the spec's own path table, deduplicated
    by canonical form.
    """
    if spec.homogeneous:
        raise RelationError("spec is homogeneous; use homogeneous_family")
    if table is None:
        table = enumerate_paths(spec)
    k, n = spec.order, spec.horizon
    raw = []
    for r in range(1, n - k):
        groups = {}
        for path in table:
            groups.setdefault(path[r:r + k], []).append((path[:r], path[r + k:]))
        for J, members in groups.items():
            for (I, S), (I2, S2) in itertools.combinations(members, 2):
                if I == I2 or S == S2:
                    continue
                cross1, cross2 = I + J + S2, I2 + J + S
                if cross1 not in table or cross2 not in table:
                    continue
                raw.append(canonicalize(
                    {table.index(I + J + S): 1, table.index(I2 + J + S2): 1},
                    {table.index(cross1): 1, table.index(cross2): 1}))
    binomials, tags = _dedup(raw, PROV_NONHOM)
    slice_paths = ()
    if len(table) != len(spec.states) ** n:
        slice_paths = slice_linear_generators(spec)
    return RelationSet(table, binomials, tags, slice_paths)


def slice_linear_generators(spec):
    """Paths of the unrestricted companion model that spec forbids.

    Each returned path is a variable pinned to zero on the restricted
    model: together with the companion's binomials these cut out the
    restricted model's ideal.  Output is lexicographic by declaration
    order.  The list has |S|^n minus (admissible count) entries, so call
    this only at small sizes.
    """
    admissible = set(enumerate_paths(spec))
    out = []
    for path in itertools.product(spec.states, repeat=spec.horizon):
        if path not in admissible:
            out.append(path)
    return tuple(out)


def homogeneous_family(spec, table=None):
    """Quadratic exchange relations for pooled (homogeneous) models.

    Two paths that share a context window around positions r1 and r2,

        path1 = I  G x D J      (x at position r1)
        path2 = I' G y D J'     (y at position r2, y != x)

    can trade x and y without changing the pooled statistics, giving

        p_path1 p_path2 - p_(x->y in path1) p_(y->x in path2).

    The context blocks G and D have length k in the interior.  Near a
    boundary they are clipped, which is sound only when both paths are
    clipped identically, so unequal positions r1 != r2 are allowed only
    with full length-k context on both sides.  Relations whose four
    paths are not all admissible are dropped.  The family is sound but
    known incomplete: it need not generate the full pooled ideal.
    """
    if not spec.homogeneous:
        raise RelationError("spec is nonhomogeneous; use nonhomogeneous_generators")
    if table is None:
        table = enumerate_paths(spec)
    k, n = spec.order, spec.horizon
    interior = range(k, n - k)  # 0-based positions with full context
    raw = []
    paths = table.paths
    for i1, p1 in enumerate(paths):
        for i2 in range(i1, len(paths)):
            p2 = paths[i2]
            for r1 in range(n):
                for r2 in range(n):
                    x, y = p1[r1], p2[r2]
                    if x == y:
                        continue
                    if r1 != r2:
                        if r1 not in interior or r2 not in interior:
                            continue
                        g = d = k
                    else:
                        g = min(k, r1)
                        d = min(k, n - 1 - r1)
                    if p1[r1 - g:r1] != p2[r2 - g:r2]:
                        continue
                    if p1[r1 + 1:r1 + 1 + d] != p2[r2 + 1:r2 + 1 + d]:
                        continue
                    m1 = p1[:r1] + (y,) + p1[r1 + 1:]
                    m2 = p2[:r2] + (x,) + p2[r2 + 1:]
                    if m1 not in table or m2 not in table:
                        continue
                    try:
                        raw.append(canonicalize(
                            {i1: 1, i2: 1} if i1 != i2 else {i1: 2},
                            _pair(table.index(m1), table.index(m2))))
                    except RelationError:
                        continue  # exchanged pair equals the original pair
    binomials, tags = _dedup(raw, PROV_HOM)
    return RelationSet(table, binomials, tags)


def _pair(i, j):
    return {i: 2} if i == j else {i: 1, j: 1}


def generators_for(spec, table=None):
    """The relation families appropriate to a spec, merged into one set.

    Nonhomogeneous specs get the exchange quadrics.  Homogeneous specs
    get the pooled exchange family plus the permutation linear
    relations; the two cannot overlap (degrees 2 and 1).  Restricted
    specs of either kind also carry their slice paths.
    """
    if table is None:
        table = enumerate_paths(spec)
    if not spec.homogeneous:
        return nonhomogeneous_generators(spec, table)
    fam = homogeneous_family(spec, table)
    lin = permutation_linear_relations(spec, table)
    slice_paths = ()
    if len(table) != len(spec.states) ** spec.horizon:
        slice_paths = slice_linear_generators(spec)
    return RelationSet(table, fam.binomials + lin.binomials,
                       fam.provenance + lin.provenance, slice_paths)


def permutation_linear_relations(spec, table=None):
    """Degree-1 relations p_a - p_b between paths with equal pooled stats.

    Homogeneous models cannot tell apart two paths whose initial block
    and window multiset coincide, so their probabilities are equal on
    the whole model.  Emits one relation per non-representative class
    member, with the lexicographically first path as representative.
    """
    if not spec.homogeneous:
        raise RelationError("permutation relations exist only for homogeneous specs")
    if table is None:
        table = enumerate_paths(spec)
    classes = {}
    for j, path in enumerate(table):
        key = frozenset(block_counts(spec, path).items())
        classes.setdefault(key, []).append(j)
    binomials = []
    for members in classes.values():
        rep = members[0]
        for other in members[1:]:
            binomials.append(canonicalize({rep: 1}, {other: 1}))
    binomials.sort(key=lambda b: b.plus)
    bs, tags = _dedup(binomials, PROV_LINEAR)
    return RelationSet(table, bs, tags)
