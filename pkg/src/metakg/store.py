"""Embedded triple store: integer-id dictionary, SPO/POS/OSP indexes,
basic-graph-pattern queries, derived-relation reports and DOT export.

The store is built once and then read concurrently; rule mining performs
millions of pattern probes, so matches are O(log n + k) bisect range scans.
"""

from __future__ import annotations

import logging
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from . import vocab
from .errors import ValidationError
from .rdf import Term, Triple, ntriples_term

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self):
        return f"?{self.name}"


PatternElem = Union[Term, Var]


@dataclass(frozen=True)
class TriplePattern:
    subject: PatternElem
    predicate: PatternElem
    object: PatternElem

    def bound_count(self, bound_vars=()):
        n = 0
        for elem in (self.subject, self.predicate, self.object):
            if isinstance(elem, Term) or elem.name in bound_vars:
                n += 1
        return n

    def variables(self):
        return [e.name for e in (self.subject, self.predicate, self.object)
                if isinstance(e, Var)]


@dataclass
class BGPQuery:
    patterns: list[TriplePattern]
    select: list[str]
    distinct_pairs: list[tuple[str, str]] = field(default_factory=list)

    def validate(self):
        seen = set()
        for p in self.patterns:
            seen.update(p.variables())
        for v in self.select:
            if v not in seen:
                raise ValidationError(f"projected variable ?{v} occurs in no pattern")
        for a, b in self.distinct_pairs:
            if a not in seen or b not in seen:
                raise ValidationError(f"distinct pair ({a},{b}) names unknown variables")


@dataclass
class BindingSet:
    variables: list[str]
    rows: list[tuple[Term, ...]]


def _range_of(index, prefix):
    """Half-open [lo, hi) range of index entries starting with prefix."""
    lo = bisect_left(index, prefix)
    hi = bisect_left(index, prefix[:-1] + (prefix[-1] + 1,)) if prefix else len(index)
    return lo, hi


class TripleStore:
    def __init__(self):
        self._term_to_id: dict[Term, int] = {}
        self._id_to_term: list[Term] = []
        self._spo: list[tuple[int, int, int]] = []
        self._pos: list[tuple[int, int, int]] = []
        self._osp: list[tuple[int, int, int]] = []
        self._triples: set[tuple[int, int, int]] = set()

    # --- construction ---------------------------------------------------

    def _intern(self, term: Term) -> int:
        tid = self._term_to_id.get(term)
        if tid is None:
            tid = len(self._id_to_term)
            self._term_to_id[term] = tid
            self._id_to_term.append(term)
        return tid

    def add(self, triple: Triple) -> bool:
        key = (self._intern(triple.subject),
               self._intern(triple.predicate),
               self._intern(triple.object))
        if key in self._triples:
            return False
        self._triples.add(key)
        return True

    def seal(self):
        """Sort the indexes; call once after the last add()."""
        s = sorted(self._triples)
        self._spo = s
        self._pos = sorted((p, o, s_) for s_, p, o in self._triples)
        self._osp = sorted((o, s_, p) for s_, p, o in self._triples)
        return self

    @classmethod
    def load(cls, triples: Iterable[Triple]) -> "TripleStore":
        store = cls()
        for t in triples:
            store.add(t)
        return store.seal()

    def __len__(self):
        return len(self._triples)

    def __contains__(self, triple: Triple):
        key = (self._term_to_id.get(triple.subject),
               self._term_to_id.get(triple.predicate),
               self._term_to_id.get(triple.object))
        return None not in key and key in self._triples

    def term_id(self, term: Term) -> Optional[int]:
        return self._term_to_id.get(term)

    def term(self, tid: int) -> Term:
        return self._id_to_term[tid]

    def triples(self) -> list[Triple]:
        return [self._to_triple(k) for k in self._spo]

    def _to_triple(self, key):
        s, p, o = key
        return Triple(self._id_to_term[s], self._id_to_term[p], self._id_to_term[o])

    # --- pattern matching -------------------------------------------------

    def _elem_id(self, elem):
        """Term id for a bound element; None for a variable; -1 if the term
        is absent from the dictionary (pattern can match nothing)."""
        if isinstance(elem, Var):
            return None
        tid = self._term_to_id.get(elem)
        return -1 if tid is None else tid

    def match_ids(self, s=None, p=None, o=None):
        """Iterate stored (s,p,o) id-triples matching the given bound ids.

        Picks the index from the bound positions: subject bound uses SPO,
        else predicate bound uses POS, else object bound uses OSP. Results
        come out in ascending id order of the chosen index.
        """
        if s is not None:
            lo, hi = _range_of(self._spo, (s, p) if p is not None else (s,))
            for key in self._spo[lo:hi]:
                if o is None or key[2] == o:
                    yield key
        elif p is not None:
            lo, hi = _range_of(self._pos, (p, o) if o is not None else (p,))
            for p_, o_, s_ in self._pos[lo:hi]:
                yield (s_, p_, o_)
        elif o is not None:
            lo, hi = _range_of(self._osp, (o,))
            for o_, s_, p_ in self._osp[lo:hi]:
                yield (s_, p_, o_)
        else:
            yield from self._spo

    def match_count(self, s=None, p=None, o=None):
        if s is None and p is None and o is None:
            return len(self._triples)
        return sum(1 for _ in self.match_ids(s, p, o))

    def match(self, pattern: TriplePattern):
        """Triples unifying with the pattern, in deterministic id order."""
        ids = [self._elem_id(e) for e in
               (pattern.subject, pattern.predicate, pattern.object)]
        if -1 in ids:
            return
        s, p, o = ids
        for key in self.match_ids(s, p, o):
            yield self._to_triple(key)

    def _match_via(self, index_name, pattern: TriplePattern):
        """Scan one specific index for the pattern (index-agreement tests)."""
        ids = [self._elem_id(e) for e in
               (pattern.subject, pattern.predicate, pattern.object)]
        if -1 in ids:
            return []
        s, p, o = ids
        index = {"spo": self._spo, "pos": self._pos, "osp": self._osp}[index_name]
        perm = {"spo": (0, 1, 2), "pos": (1, 2, 0), "osp": (2, 0, 1)}[index_name]
        want = (s, p, o)
        out = []
        for entry in index:
            key = tuple(entry[perm.index(i)] for i in range(3))
            if all(w is None or w == k for w, k in zip(want, key)):
                out.append(key)
        return sorted(out)

    # --- BGP evaluation ---------------------------------------------------

    def evaluate_bgp(self, query: BGPQuery) -> BindingSet:
        """Natural join of the patterns' solutions, projected and deduplicated.

        Patterns are joined most-bound-first (greedy selectivity estimate);
        the result set does not depend on that order.
        """
        query.validate()
        remaining = list(range(len(query.patterns)))
        rows = [dict()]
        bound: set[str] = set()
        while remaining:
            best = min(
                remaining,
                key=lambda i: (3 - query.patterns[i].bound_count(bound), i),
            )
            remaining.remove(best)
            pattern = query.patterns[best]
            new_rows = []
            for binding in rows:
                new_rows.extend(self._solutions(pattern, binding))
            rows = new_rows
            bound.update(pattern.variables())
            if not rows:
                break
        out = set()
        for binding in rows:
            if any(binding[a] == binding[b] for a, b in query.distinct_pairs):
                continue
            out.add(tuple(binding[v] for v in query.select))
        id_rows = sorted(out)
        variables = list(query.select)
        return BindingSet(
            variables,
            [tuple(self._id_to_term[tid] for tid in row) for row in id_rows],
        )

    def _solutions(self, pattern: TriplePattern, binding):
        """Extend one binding (var name -> term id) over a pattern's matches."""
        spec = []
        for elem in (pattern.subject, pattern.predicate, pattern.object):
            if isinstance(elem, Var):
                spec.append(binding.get(elem.name))
            else:
                tid = self._term_to_id.get(elem)
                if tid is None:
                    return
                spec.append(tid)
        for key in self.match_ids(*spec):
            new = dict(binding)
            ok = True
            for elem, tid in zip((pattern.subject, pattern.predicate, pattern.object), key):
                if isinstance(elem, Var):
                    prev = new.get(elem.name)
                    if prev is None:
                        new[elem.name] = tid
                    elif prev != tid:
                        ok = False
                        break
            if ok:
                yield new

    # --- derived-relation reports ------------------------------------------

    def shared_variable_report(self, local_ns=None):
        """Pairs of distinct datasets that declare a variable with the same
        name, with the shared names; each pair reported once, in
        lexicographic order."""
        local_ns = local_ns or vocab.LocalNamespace()
        by_name: dict[str, set[str]] = {}
        for t in self.match(TriplePattern(Var("v"), vocab.RDF_TYPE,
                                          local_ns.variable_class)):
            var_node = t.subject
            names = [x.object.value for x in
                     self.match(TriplePattern(var_node, vocab.DCT_IDENTIFIER, Var("n")))
                     if x.object.is_literal()]
            datasets = [x.object.value for x in
                        self.match(TriplePattern(var_node, vocab.DCT_IS_PART_OF, Var("d")))
                        if x.object.is_iri()]
            for name in names:
                by_name.setdefault(name, set()).update(datasets)
        pair_shares: dict[tuple[str, str], set[str]] = {}
        for name, datasets in by_name.items():
            ordered = sorted(datasets)
            for i in range(len(ordered)):
                for j in range(i + 1, len(ordered)):
                    pair_shares.setdefault((ordered[i], ordered[j]), set()).add(name)
        return [(a, b, sorted(names)) for (a, b), names in sorted(pair_shares.items())]

    def multi_category_report(self):
        """Datasets with two or more category memberships, with the count."""
        catalogs = {self._term_to_id[t.subject]
                    for t in self.match(TriplePattern(Var("c"), vocab.RDF_TYPE,
                                                      vocab.DCAT_CATALOG))}
        counts: dict[str, int] = {}
        pid = self._term_to_id.get(vocab.DCT_IS_PART_OF)
        if pid is None:
            return {}
        for s, _, o in self.match_ids(p=pid):
            if o in catalogs:
                dataset = self._id_to_term[s].value
                counts[dataset] = counts.get(dataset, 0) + 1
        return {d: n for d, n in sorted(counts.items()) if n >= 2}

    # --- DOT export ----------------------------------------------------------

    def export_dot(self, focus: Optional[Term] = None, radius: int = 2,
                   local_ns=None) -> str:
        """Graphviz digraph of the neighbourhood around focus (whole graph
        when focus is None), with prefixed predicate edge labels."""
        if radius < 0:
            raise ValidationError("radius must be >= 0")
        local_ns = local_ns or vocab.LocalNamespace()
        if focus is not None:
            fid = self._term_to_id.get(focus)
            if fid is None:
                log.warning("DOT focus %s not present in the graph", focus)
                return "digraph metakg {\n}\n"
            frontier = {fid}
            keep = {fid}
            for _ in range(radius):
                nxt = set()
                for s, p, o in self._spo:
                    if s in frontier and o not in keep:
                        nxt.add(o)
                    if o in frontier and s not in keep:
                        nxt.add(s)
                keep.update(nxt)
                frontier = nxt
            edges = [(s, p, o) for s, p, o in self._spo if s in keep and o in keep]
            nodes = keep
        else:
            edges = list(self._spo)
            nodes = {s for s, _, _ in edges} | {o for _, _, o in edges}

        def node_label(tid):
            term = self._id_to_term[tid]
            if term.is_iri():
                return vocab.curie(term.value, local_ns)
            if term.is_blank():
                return "_:" + term.value
            return term.value

        ordered = sorted(nodes, key=lambda tid: ntriples_term(self._id_to_term[tid]))
        names = {tid: f"n{i}" for i, tid in enumerate(ordered)}
        lines = ["digraph metakg {"]
        for tid in ordered:
            label = node_label(tid).replace('"', '\\"')
            shape = "box" if self._id_to_term[tid].is_literal() else "ellipse"
            lines.append(f'  {names[tid]} [label="{label}" shape={shape}];')
        for s, p, o in sorted(edges, key=lambda e: (names[e[0]], names[e[2]],
                                                    ntriples_term(self._id_to_term[e[1]]))):
            plabel = vocab.curie(self._id_to_term[p].value, local_ns).replace('"', '\\"')
            lines.append(f'  {names[s]} -> {names[o]} [label="{plabel}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


# --- pattern JSON (CLI and HTTP API share this encoding) -----------------


def term_to_json(term: Term):
    if term.is_iri():
        return {"type": "iri", "value": term.value}
    if term.is_blank():
        return {"type": "bnode", "value": term.value}
    out = {"type": "literal", "value": term.value}
    if term.lang:
        out["lang"] = term.lang
    if term.datatype:
        out["datatype"] = term.datatype
    return out


def term_from_json(obj) -> PatternElem:
    from .rdf import make_blank, make_iri, make_literal

    if not isinstance(obj, dict) or "type" not in obj:
        raise ValidationError(f"bad term encoding: {obj!r}")
    kind = obj["type"]
    if kind == "var":
        name = obj.get("name", "")
        if not isinstance(name, str) or not name or not name.replace("_", "").isalnum():
            raise ValidationError(f"bad variable name: {name!r}")
        return Var(name)
    if kind == "iri":
        return make_iri(obj["value"])
    if kind == "bnode":
        return make_blank(obj["value"])
    if kind == "literal":
        return make_literal(obj["value"], lang=obj.get("lang"),
                            datatype=obj.get("datatype"))
    raise ValidationError(f"unknown term type: {kind!r}")


def query_from_json(obj) -> BGPQuery:
    if not isinstance(obj, dict):
        raise ValidationError("query body must be a JSON object")
    where = obj.get("where")
    if not isinstance(where, list) or not where:
        raise ValidationError("query needs a non-empty 'where' list")
    patterns = []
    for row in where:
        if not isinstance(row, list) or len(row) != 3:
            raise ValidationError(f"each pattern is a [s, p, o] triple: {row!r}")
        patterns.append(TriplePattern(*[term_from_json(x) for x in row]))
    select = obj.get("select")
    if select is None:
        seen = []
        for p in patterns:
            for v in p.variables():
                if v not in seen:
                    seen.append(v)
        select = seen
    if not isinstance(select, list) or not all(isinstance(v, str) for v in select):
        raise ValidationError("'select' must be a list of variable names")
    distinct = [tuple(pair) for pair in obj.get("distinct", [])]
    for pair in distinct:
        if len(pair) != 2:
            raise ValidationError(f"'distinct' entries are [a, b] pairs: {pair!r}")
    query = BGPQuery(patterns, select, distinct)
    query.validate()
    return query


def bindings_to_json(result: BindingSet):
    return {
        "vars": result.variables,
        "rows": [[term_to_json(t) for t in row] for row in result.rows],
    }
