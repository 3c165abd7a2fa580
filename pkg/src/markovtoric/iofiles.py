"""File formats, corpus ingestion, state collapsing, and report rendering.

Model specs and corpus configs are small YAML documents.  Trajectories
and counts are plain text, one record per line, with `#` comments.
Structured reports are JSON documents whose keys follow the package's
field names.  All exact values are serialized as rational strings like
"469/685"; rounded decimal views are provided alongside, never instead.
"""

import json
from dataclasses import dataclass
from fractions import Fraction

import yaml

from .errors import InadmissiblePathError, ParseError, SpecificationError
from .estimate import TrajectorySet
from .model import ModelSpec, format_symbol
from .relations import RelationSet, canonicalize

DEFAULT_DECIMALS = 3
DEFAULT_DROP_CHARS = "'0123456789"

MODEL_KEYS = {"states", "k", "n", "homogeneous", "forbid", "absorbing", "initial"}
CORPUS_KEYS = {"alphabet", "pad", "horizon", "min_word_length",
               "max_word_length", "overlong", "drop_chars"}


def decimal_string(value, places=DEFAULT_DECIMALS):
    """Round-half-even decimal rendering of an exact rational."""
    q = round(Fraction(value), places)
    scaled = q * 10 ** places
    num = int(scaled)
    sign = "-" if num < 0 else ""
    ip, fp = divmod(abs(num), 10 ** places)
    if places == 0:
        return f"{sign}{ip}"
    return f"{sign}{ip}.{fp:0{places}d}"


def fraction_string(value):
    f = Fraction(value)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _load_yaml(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return yaml.safe_load(fh)
    except OSError as exc:
        raise ParseError(str(exc), filename=path)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            raise ParseError(str(getattr(exc, "problem", exc)),
                             filename=path, line=mark.line + 1,
                             column=mark.column + 1)
        raise ParseError(str(exc), filename=path)


def _label(x):
    return x if isinstance(x, str) else str(x)


def parse_model_spec(path):
    """Read a model spec file.

    Keys: states (list of labels), k, n, and optionally homogeneous,
    forbid (list of [from, to] pairs), absorbing (list of states),
    initial (list of states for k = 1, or of blocks).  Unknown keys are
    rejected by name.  Structural violations (duplicate states, an
    absorbing state with a forbidden self-loop, ...) surface as
    SpecificationError from the ModelSpec constructor.
    """
    doc = _load_yaml(path)
    if not isinstance(doc, dict):
        raise ParseError("model spec must be a mapping", filename=path)
    unknown = set(doc) - MODEL_KEYS
    if unknown:
        raise ParseError(f"unknown key {sorted(unknown)[0]!r} in model spec",
                         filename=path)
    for key in ("states", "k", "n"):
        if key not in doc:
            raise ParseError(f"model spec is missing required key {key!r}",
                             filename=path)
    states = [_label(s) for s in doc["states"]]
    forbid = [(_label(a), _label(b)) for a, b in doc.get("forbid") or []]
    absorbing = [_label(s) for s in doc.get("absorbing") or []]
    initial = doc.get("initial")
    if initial is not None:
        initial = [[_label(s) for s in b] if isinstance(b, (list, tuple))
                   else _label(b) for b in initial]
    return ModelSpec(states, doc["k"], doc["n"],
                     forbidden=forbid, absorbing=absorbing, initial=initial,
                     homogeneous=bool(doc.get("homogeneous", False)))


def _data_lines(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.readlines()
    except OSError as exc:
        raise ParseError(str(exc), filename=path)
    for lineno, line in enumerate(raw, start=1):
        line = line.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def ingest_trajectories(path, spec):
    """Read a trajectory file and validate it against a spec.

    Each record is a comma-separated list of state labels, optionally
    followed by an integer multiplicity.  The multiplicity is preferred
    as a whitespace-separated final column; a final comma-separated
    token is also accepted as a multiplicity when it is an integer that
    is not a state label.
    """
    records = []
    for lineno, line in _data_lines(path):
        fields = line.split()
        if len(fields) > 2:
            raise ParseError("expected 'path' or 'path count'",
                             filename=path, line=lineno)
        tokens = [t.strip() for t in fields[0].split(",")]
        if any(not t for t in tokens):
            raise ParseError("empty state label", filename=path, line=lineno)
        mult = 1
        if len(fields) == 2:
            try:
                mult = int(fields[1])
            except ValueError:
                raise ParseError(f"multiplicity {fields[1]!r} is not an integer",
                                 filename=path, line=lineno)
        elif tokens[-1] not in spec.states and _is_int(tokens[-1]):
            mult = int(tokens[-1])
            tokens = tokens[:-1]
        if mult < 1:
            raise ParseError(f"multiplicity must be positive, got {mult}",
                             filename=path, line=lineno)
        records.append((tuple(tokens), mult))
    if not records:
        raise ParseError("no trajectory records found", filename=path)
    return TrajectorySet(tuple(records)).check(spec)


def _is_int(token):
    try:
        int(token)
    except ValueError:
        return False
    return True


def write_trajectories(trajs, path):
    with open(path, "w", encoding="utf-8") as fh:
        for traj, mult in trajs.records:
            fh.write(",".join(traj) + f" {mult}\n")


def read_counts(path, table):
    """Read a counts file: 'comma,separated,path count' per line.

    Paths absent from the file count zero; a path listed twice is an
    error rather than a silent sum.
    """
    from .estimate import CountVector

    counts = [0] * len(table)
    seen = set()
    for lineno, line in _data_lines(path):
        fields = line.split()
        if len(fields) != 2:
            raise ParseError("expected 'path count'", filename=path, line=lineno)
        path_tuple = tuple(t.strip() for t in fields[0].split(","))
        try:
            j = table.index(path_tuple)
        except InadmissiblePathError as exc:
            raise ParseError(str(exc), filename=path, line=lineno)
        if j in seen:
            raise ParseError(f"duplicate count for path {fields[0]}",
                             filename=path, line=lineno)
        seen.add(j)
        try:
            counts[j] = int(fields[1])
        except ValueError:
            raise ParseError(f"count {fields[1]!r} is not an integer",
                             filename=path, line=lineno)
    return CountVector(table, tuple(counts))


def write_counts(counts, path):
    with open(path, "w", encoding="utf-8") as fh:
        for p, c in zip(counts.table, counts.counts):
            fh.write(",".join(p) + f" {c}\n")


def read_probabilities(path, table):
    """Read 'path value' lines into an assignment over the table.

    Values may be rationals like 469/685 or decimal strings; both are
    read exactly.  Paths absent from the file get probability zero.
    """
    out = {j: Fraction(0) for j in range(len(table))}
    for lineno, line in _data_lines(path):
        fields = line.split()
        if len(fields) != 2:
            raise ParseError("expected 'path value'", filename=path, line=lineno)
        path_tuple = tuple(t.strip() for t in fields[0].split(","))
        try:
            j = table.index(path_tuple)
        except InadmissiblePathError as exc:
            raise ParseError(str(exc), filename=path, line=lineno)
        try:
            out[j] = Fraction(fields[1])
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"value {fields[1]!r} is not a rational",
                             filename=path, line=lineno)
    return out


def write_probabilities(assignment, table, path, decimals=None):
    with open(path, "w", encoding="utf-8") as fh:
        for j, p in enumerate(table):
            value = assignment[j]
            text = (fraction_string(value) if decimals is None
                    else decimal_string(value, decimals))
            fh.write(",".join(p) + f" {text}\n")


# ---------------------------------------------------------------------------
# Corpus pipeline


@dataclass(frozen=True)
class CorpusSpec:
    """How to turn raw text into padded trajectories.

    alphabet maps characters to state labels; pad is the absorbing pad
    state appended after each word.  horizon fixes L, or None takes the
    longest surviving word.  Words shorter than min_word_length are
    dropped; with max_word_length set, longer words are excluded before
    L is chosen.  overlong says what to do with words longer than a
    fixed horizon: "error" or "drop".  drop_chars are removed from words
    before mapping (case is always lowered first).
    """

    alphabet: dict
    pad: str
    horizon: object = None
    min_word_length: int = 1
    max_word_length: object = None
    overlong: str = "error"
    drop_chars: str = DEFAULT_DROP_CHARS

    def __post_init__(self):
        if self.overlong not in ("error", "drop"):
            raise SpecificationError(
                f"overlong policy must be 'error' or 'drop', got {self.overlong!r}")
        if self.horizon is not None and int(self.horizon) < 1:
            raise SpecificationError("horizon must be positive")


def letters_alphabet():
    """Identity map on the 26 lowercase letters."""
    return {c: c for c in "abcdefghijklmnopqrstuvwxyz"}


def tokenize_corpus(text, cs):
    """Lowercase, strip dropped characters, split on whitespace.

    Any remaining unmapped character is an error naming the character,
    so nothing is ever silently reinterpreted.
    """
    words = []
    for raw in text.lower().split():
        word = "".join(ch for ch in raw if ch not in cs.drop_chars)
        if not word:
            continue
        for ch in word:
            if ch not in cs.alphabet:
                raise ParseError(
                    f"character {ch!r} in word {raw!r} is neither mapped nor dropped")
        words.append(word)
    return words


def corpus_to_trajectories(text, cs, spec=None):
    """Words to pad-completed trajectories of common length L + 1.

    Each surviving word contributes its mapped characters followed by
    pad symbols up to length L + 1, so a word of length exactly L still
    ends with one pad.  Per-word occurrence counts become multiplicities
    in first-seen order.  When a target spec is given, the pad symbol
    must be one of its absorbing states and every trajectory must be
    admissible.
    """
    words = tokenize_corpus(text, cs)
    words = [w for w in words if len(w) >= cs.min_word_length]
    if cs.max_word_length is not None:
        words = [w for w in words if len(w) <= int(cs.max_word_length)]
    if cs.horizon is None:
        if not words:
            raise ParseError("corpus contains no usable words")
        L = max(len(w) for w in words)
    else:
        L = int(cs.horizon)
        over = [w for w in words if len(w) > L]
        if over and cs.overlong == "error":
            raise ParseError(
                f"word {over[0]!r} has length {len(over[0])}, horizon is {L}")
        words = [w for w in words if len(w) <= L]
    if not words:
        raise ParseError("corpus contains no usable words")
    tally = {}
    for w in words:
        tally[w] = tally.get(w, 0) + 1
    records = []
    for w, mult in tally.items():
        traj = tuple(cs.alphabet[ch] for ch in w)
        traj += (cs.pad,) * (L + 1 - len(traj))
        records.append((traj, mult))
    trajs = TrajectorySet(tuple(records))
    if spec is not None:
        if cs.pad not in spec.absorbing:
            raise SpecificationError(
                f"pad symbol {cs.pad!r} is not an absorbing state of the target spec")
        trajs.check(spec)
    return trajs


@dataclass(frozen=True)
class CollapseMap:
    """A surjective relabeling of fine states onto coarse states."""

    mapping: dict

    def apply(self, seq):
        try:
            return tuple(self.mapping[s] for s in seq)
        except KeyError as exc:
            raise SpecificationError(f"collapse map has no image for state {exc}")

    def validate(self, fine_spec, coarse_spec):
        """Check the map against both specs.

        Every fine state needs an image, the image set must cover the
        coarse states, absorbing fine states must land on absorbing
        coarse states, and no allowed fine transition may map onto a
        forbidden coarse one.
        """
        for s in fine_spec.states:
            if s not in self.mapping:
                raise SpecificationError(f"fine state {s!r} has no image")
        image = set(self.mapping.values())
        missing = [s for s in coarse_spec.states if s not in image]
        if missing:
            raise SpecificationError(
                f"collapse map is not surjective: coarse state {missing[0]!r} "
                f"has no preimage")
        for s in fine_spec.absorbing:
            if self.mapping[s] not in coarse_spec.absorbing:
                raise SpecificationError(
                    f"absorbing fine state {s!r} maps to non-absorbing "
                    f"{self.mapping[s]!r}")
        for a, b in sorted(fine_spec.transition_pairs):
            if (self.mapping[a], self.mapping[b]) not in coarse_spec.transition_pairs:
                raise SpecificationError(
                    f"allowed fine transition {a!r} -> {b!r} maps onto forbidden "
                    f"coarse transition {self.mapping[a]!r} -> {self.mapping[b]!r}")


def collapse_states(trajs, cm, coarse_spec, fine_spec=None):
    """Relabel a TrajectorySet through a collapse map.

    With a fine spec supplied, the map is validated against both specs
    first.  Trajectories that collapse to the same sequence merge their
    multiplicities (first-seen order).  The result must be admissible
    under the coarse spec.
    """
    if fine_spec is not None:
        cm.validate(fine_spec, coarse_spec)
    tally = {}
    for traj, mult in trajs.records:
        image = cm.apply(traj)
        tally[image] = tally.get(image, 0) + mult
    return TrajectorySet(tuple(tally.items())).check(coarse_spec)


def read_corpus_spec(path):
    doc = _load_yaml(path)
    if not isinstance(doc, dict):
        raise ParseError("corpus spec must be a mapping", filename=path)
    unknown = set(doc) - CORPUS_KEYS
    if unknown:
        raise ParseError(f"unknown key {sorted(unknown)[0]!r} in corpus spec",
                         filename=path)
    if "pad" not in doc:
        raise ParseError("corpus spec is missing required key 'pad'",
                         filename=path)
    alphabet = doc.get("alphabet", "letters")
    if alphabet == "letters":
        alphabet = letters_alphabet()
    elif isinstance(alphabet, dict):
        alphabet = {_label(c): _label(s) for c, s in alphabet.items()}
    else:
        raise ParseError("alphabet must be a mapping or the word 'letters'",
                         filename=path)
    horizon = doc.get("horizon")
    if horizon in ("max", None):
        horizon = None
    return CorpusSpec(alphabet=alphabet, pad=_label(doc["pad"]),
                      horizon=horizon,
                      min_word_length=int(doc.get("min_word_length", 1)),
                      max_word_length=doc.get("max_word_length"),
                      overlong=doc.get("overlong", "error"),
                      drop_chars=doc.get("drop_chars", DEFAULT_DROP_CHARS))


def read_collapse_map(path):
    doc = _load_yaml(path)
    if not isinstance(doc, dict):
        raise ParseError("collapse map must be a mapping", filename=path)
    return CollapseMap({_label(a): _label(b) for a, b in doc.items()})


# ---------------------------------------------------------------------------
# Relation files and structured reports


def relations_to_jsonable(relset):
    def side(terms):
        return [{"path": list(relset.table[i]), "power": e} for i, e in terms]
    return {
        "relations": [
            {"plus": side(b.plus), "minus": side(b.minus),
             "provenance": tag, "text": b.text(relset.table)}
            for b, tag in relset
        ],
        "slice": [list(p) for p in relset.slice_paths],
    }


def write_relations(relset, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(relations_to_jsonable(relset), fh, indent=2)
        fh.write("\n")


def read_relations(path, table):
    """Load a relation file back against a path table.

    Binomials are re-canonicalized on the way in, so a hand-edited file
    cannot smuggle in a non-canonical or degenerate relation.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(str(exc), filename=path)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, filename=path, line=exc.lineno,
                         column=exc.colno)
    if not isinstance(doc, dict) or "relations" not in doc:
        raise ParseError("relation file must contain a 'relations' list",
                         filename=path)

    def side(terms):
        out = {}
        for term in terms:
            j = table.index(tuple(term["path"]))
            out[j] = out.get(j, 0) + int(term.get("power", 1))
        return out

    binomials, tags = [], []
    for rec in doc["relations"]:
        binomials.append(canonicalize(side(rec["plus"]), side(rec["minus"])))
        tags.append(rec.get("provenance", "file"))
    slice_paths = tuple(tuple(p) for p in doc.get("slice", []))
    return RelationSet(table, tuple(binomials), tuple(tags), slice_paths)


def _value_pair(value, decimals):
    return {"value": fraction_string(value),
            "decimal": float(decimal_string(value, decimals))}


def estimate_to_jsonable(report, decimals=DEFAULT_DECIMALS):
    pi = [{"block": list(b), **_value_pair(v, decimals)}
          for b, v in sorted(report.pi.items())]
    trans = []
    for (level, h, s), v in sorted(report.trans.items(),
                                   key=lambda kv: (kv[0][0] or 0, kv[0][1], kv[0][2])):
        trans.append({"level": level, "history": list(h), "next": s,
                      **_value_pair(v, decimals)})
    return {
        "kind": report.kind,
        "order": report.order,
        "horizon": report.horizon,
        "window": report.window,
        "total": report.total,
        "pi": pi,
        "transitions": trans,
        "undefined": [{"level": lv, "history": list(h)}
                      for lv, h in sorted(report.undefined,
                                          key=lambda x: (x[0] or 0, x[1]))],
    }


def assignment_to_jsonable(assignment, table, decimals=DEFAULT_DECIMALS):
    out = []
    for j, p in enumerate(table):
        v = assignment[j]
        if v is None:
            out.append({"path": list(p), "value": None, "decimal": None})
        else:
            out.append({"path": list(p), **_value_pair(v, decimals)})
    return out


def verification_to_jsonable(vr, relset):
    entries = []
    for entry in vr.entries:
        binomial = relset.binomials[entry.index]
        rec = {
            "index": entry.index,
            "provenance": entry.provenance,
            "text": binomial.text(relset.table),
            "status": entry.vanish.status,
            "trials": entry.vanish.trials,
        }
        if entry.vanish.witness is not None:
            rec["witness"] = {
                "trial": entry.vanish.witness.trial,
                "residual": fraction_string(entry.vanish.witness.residual),
            }
        if entry.kernel is not None:
            rec["kernel_ok"] = entry.kernel.ok
        entries.append(rec)
    return {
        "trials": vr.trials,
        "seed": vr.seed,
        "all_pass": vr.all_pass,
        "agreement": vr.agreement,
        "relations": entries,
        "slice": [list(p) for p in relset.slice_paths],
    }


def recovery_to_jsonable(rec, decimals=DEFAULT_DECIMALS):
    params = rec.params
    return {
        "pi": [{"block": list(b), **_value_pair(v, decimals)}
               for b, v in sorted(params.pi.items())],
        "transitions": [
            {"level": level, "history": list(h), "next": s,
             **_value_pair(v, decimals)}
            for (level, h, s), v in sorted(
                params.trans.items(),
                key=lambda kv: (kv[0][0] or 0, kv[0][1], kv[0][2]))],
        "undefined": [{"level": lv, "history": list(h)}
                      for lv, h in sorted(rec.undefined,
                                          key=lambda x: (x[0] or 0, x[1]))],
        "consistent": rec.consistent,
        "inconsistencies": [
            {"history": list(c.history), "next": c.next_state,
             "level_a": c.level_a, "ratio_a": fraction_string(c.ratio_a),
             "level_b": c.level_b, "ratio_b": fraction_string(c.ratio_b)}
            for c in rec.inconsistencies],
    }


def birch_to_jsonable(residual, design, decimals=DEFAULT_DECIMALS):
    return {
        "rows": [
            {"symbol": format_symbol(sym), **_value_pair(r, decimals)}
            for sym, r in zip(design.row_symbols, residual)],
        "max_abs": fraction_string(max((abs(r) for r in residual),
                                       default=Fraction(0))),
    }


def dump_json(obj, fh):
    json.dump(obj, fh, indent=2)
    fh.write("\n")
