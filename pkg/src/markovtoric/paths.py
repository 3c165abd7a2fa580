"""Path enumeration, sufficient statistics, and the design matrix."""

from .errors import InadmissiblePathError, RelationError
from .model import format_symbol


class PathTable:
    """Immutable indexed list of admissible paths.

    Paths appear in declaration-lexicographic order and are addressed
    either by position or by the path tuple itself.
    """

    __slots__ = ("paths", "_index")

    def __init__(self, paths):
        self.paths = tuple(tuple(p) for p in paths)
        self._index = {p: i for i, p in enumerate(self.paths)}
        if len(self._index) != len(self.paths):
            raise RelationError("duplicate paths in table")

    def index(self, path):
        try:
            return self._index[tuple(path)]
        except KeyError:
            raise InadmissiblePathError(
                f"path {tuple(path)} is not in the table") from None

    def __contains__(self, path):
        return tuple(path) in self._index

    def __getitem__(self, i):
        return self.paths[i]

    def __len__(self):
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)

    def __repr__(self):
        return f"PathTable({len(self.paths)} paths)"


def enumerate_paths(spec):
    """All admissible paths of the spec, lexicographically by declaration order.

    Depth-first extension of each allowed initial block.  Initial blocks
    are visited in declaration-lexicographic order and successors in
    declaration order, so the output order needs no final sort.
    """
    out = []
    k, n = spec.order, spec.horizon

    def extend(prefix):
        if len(prefix) == n:
            out.append(prefix)
            return
        for s in spec.successors(prefix[-k:]):
            extend(prefix + (s,))

    for block in sorted(spec.initial_blocks, key=spec.block_key):
        extend(block)
    return PathTable(out)


def block_counts(spec, path):
    """Sufficient statistics of one path: occurrence count per parameter symbol.

    One unit on the initial k-block symbol, one unit per transition
    window.  Homogeneous specs pool windows across time (level None), so
    exponents above 1 appear whenever a window repeats.
    """
    path = tuple(path)
    spec.check_sequence(path)
    k = spec.order
    counts = {("pi", path[:k]): 1}
    for end in range(k, len(path)):
        window = path[end - k:end + 1]
        lv = None if spec.homogeneous else end + 1
        sym = ("a", lv, window[:k], window[k])
        counts[sym] = counts.get(sym, 0) + 1
    return counts


class DesignMatrix:
    """Integer matrix A with one row per parameter symbol and one column
    per path; column j is the sufficient-statistics vector of path j.

    A binomial p^u - p^v lies in the toric ideal of the parametrization
    exactly when A(u - v) = 0, so this matrix is the single arbiter for
    kernel-membership checks.
    """

    __slots__ = ("row_symbols", "table", "rows")

    def __init__(self, row_symbols, table, rows):
        self.row_symbols = tuple(row_symbols)
        self.table = table
        self.rows = tuple(tuple(r) for r in rows)

    @property
    def shape(self):
        return (len(self.rows), len(self.table))

    def column(self, j):
        return tuple(row[j] for row in self.rows)

    def apply(self, vector):
        """A @ vector for a dense iterable over path indices (exact)."""
        vec = list(vector)
        if len(vec) != len(self.table):
            raise RelationError(
                f"vector has length {len(vec)}, expected {len(self.table)}")
        return [sum(r * x for r, x in zip(row, vec)) for row in self.rows]

    def apply_sparse(self, coeffs):
        """A @ vector for a sparse {path index: coefficient} mapping."""
        ncols = len(self.table)
        for j in coeffs:
            if not 0 <= j < ncols:
                raise RelationError(f"path index {j} out of range 0..{ncols - 1}")
        return [sum(row[j] * c for j, c in coeffs.items()) for row in self.rows]

    def row_labels(self):
        return tuple(format_symbol(s) for s in self.row_symbols)

    def __repr__(self):
        r, c = self.shape
        return f"DesignMatrix({r} symbols x {c} paths)"


def build_design_matrix(spec, table=None):
    """Design matrix of the spec over a path table (defaults to its own)."""
    if table is None:
        table = enumerate_paths(spec)
    symbols = spec.symbols()
    pos = {sym: i for i, sym in enumerate(symbols)}
    cols = []
    for path in table:
        col = [0] * len(symbols)
        for sym, c in block_counts(spec, path).items():
            col[pos[sym]] = c
        cols.append(col)
    rows = [[col[i] for col in cols] for i in range(len(symbols))]
    return DesignMatrix(symbols, table, rows)
