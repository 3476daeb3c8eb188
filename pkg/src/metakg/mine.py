"""Horn-rule mining over the triple store.

Mines closed, connected rules body => head by refinement search: the queue
is seeded with every relation as a bare head and grows by adding either a
dangling atom (one fresh variable) or a closing atom (two existing
variables). Rules are scored by support, head coverage, standard
confidence and PCA confidence (partial completeness on the subject side:
only body instantiations whose subject has at least one known head fact
count against the rule).

Triples with literal objects carry no relational signal for this search
and are skipped (the count is reported).
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from itertools import permutations

from .errors import ValidationError
from .rdf import Term, Triple, make_iri
from .store import TripleStore

log = logging.getLogger(__name__)

_VAR_NAMES = "abcdefghijklmnop"


@dataclass(frozen=True)
class Atom:
    relation: str
    subject: str
    object: str

    def __post_init__(self):
        if self.subject == self.object:
            raise ValidationError("atom subject and object variables must differ")

    def text(self, names=None):
        s = names[self.subject] if names else self.subject
        o = names[self.object] if names else self.object
        return f"?{s} <{self.relation}> ?{o}"


@dataclass(frozen=True)
class RuleScores:
    support: int = 0
    head_coverage: float = 0.0
    std_confidence: float = 0.0
    pca_confidence: float = 0.0


@dataclass(frozen=True)
class HornRule:
    body: tuple[Atom, ...]
    head: Atom
    scores: RuleScores = field(default=RuleScores())

    def variables(self):
        out = []
        for atom in self.body + (self.head,):
            for v in (atom.subject, atom.object):
                if v not in out:
                    out.append(v)
        return out

    def is_closed(self):
        counts: dict[str, int] = {}
        for atom in self.body + (self.head,):
            counts[atom.subject] = counts.get(atom.subject, 0) + 1
            counts[atom.object] = counts.get(atom.object, 0) + 1
        return bool(self.body) and all(n >= 2 for n in counts.values())

    def canonical_text(self):
        """Canonical rendering: head variables are named first (subject 'a',
        object 'b'), body atom order minimizes the final text, so any
        renaming of the same rule prints identically."""
        best = None
        for perm in permutations(self.body):
            names: dict[str, str] = {}

            def name(v):
                if v not in names:
                    names[v] = _VAR_NAMES[len(names)]
                return names[v]

            head_txt = f"?{name(self.head.subject)} <{self.head.relation}> " \
                       f"?{name(self.head.object)}"
            body_txt = " & ".join(
                f"?{name(a.subject)} <{a.relation}> ?{name(a.object)}"
                for a in perm
            )
            text = f"{body_txt} => {head_txt}" if perm else f" => {head_txt}"
            if best is None or text < best:
                best = text
        return best


@dataclass
class MiningConfig:
    max_len: int = 3
    min_head_coverage: float = 0.01
    min_std_confidence: float = 0.1
    min_support: int = 2
    apply_threshold: float = 0.9

    def __post_init__(self):
        if self.max_len < 2:
            raise ValidationError("max_len must be at least 2 atoms")
        for name in ("min_head_coverage", "min_std_confidence", "apply_threshold"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.1:
                raise ValidationError(f"{name} out of range: {v}")


class KnowledgeGraphView:
    """Id-space fact indexes over the store's IRI-object triples."""

    def __init__(self, store: TripleStore):
        self.store = store
        self.facts: dict[int, list[tuple[int, int]]] = {}
        self.by_subject: dict[int, dict[int, list[int]]] = {}
        self.by_object: dict[int, dict[int, list[int]]] = {}
        self.pair_sets: dict[int, set[tuple[int, int]]] = {}
        self.subjects: dict[int, set[int]] = {}
        self.rel_terms: dict[int, Term] = {}
        self.literal_objects_skipped = 0
        for s, p, o in store.match_ids():
            if store.term(o).is_literal():
                self.literal_objects_skipped += 1
                continue
            self.facts.setdefault(p, []).append((s, o))
            self.by_subject.setdefault(p, {}).setdefault(s, []).append(o)
            self.by_object.setdefault(p, {}).setdefault(o, []).append(s)
            self.pair_sets.setdefault(p, set()).add((s, o))
            self.subjects.setdefault(p, set()).add(s)
            self.rel_terms[p] = store.term(p)
        if self.literal_objects_skipped:
            log.info("mining skips %d literal-object triples",
                     self.literal_objects_skipped)

    def relations(self):
        """Relation ids in deterministic IRI order."""
        return sorted(self.facts, key=lambda rid: self.rel_terms[rid].value)

    def rel_id(self, iri_value):
        for rid, term in self.rel_terms.items():
            if term.value == iri_value:
                return rid
        return None

    # --- body evaluation -------------------------------------------------

    def _atom_order(self, atoms, bound):
        """Most-bound-first atom ordering for the recursive join."""
        remaining = list(atoms)
        ordered = []
        seen = set(bound)
        while remaining:
            best = max(
                remaining,
                key=lambda a: ((a.subject in seen) + (a.object in seen),
                               -len(self.facts.get(int(a.relation), []))),
            )
            remaining.remove(best)
            ordered.append(best)
            seen.update((best.subject, best.object))
        return ordered

    def _extend(self, atom, binding):
        """Consistent extensions of a binding over one atom's facts.

        Distinct variables may bind the same entity; only the variable
        names inside an atom are required to differ.
        """
        rel = int(atom.relation)
        if rel not in self.facts:
            return
        s = binding.get(atom.subject)
        o = binding.get(atom.object)
        if s is not None and o is not None:
            if (s, o) in self.pair_sets[rel]:
                yield binding
            return
        if s is not None:
            for obj in self.by_subject[rel].get(s, []):
                yield {**binding, atom.object: obj}
            return
        if o is not None:
            for subj in self.by_object[rel].get(o, []):
                yield {**binding, atom.subject: subj}
            return
        for subj, obj in self.facts[rel]:
            yield {**binding, atom.subject: subj, atom.object: obj}

    def body_satisfiable(self, atoms, binding):
        """True when the body has at least one instantiation extending binding."""
        if not atoms:
            return True
        ordered = self._atom_order(atoms, binding.keys())

        def recurse(i, b):
            if i == len(ordered):
                return True
            for nxt in self._extend(ordered[i], b):
                if recurse(i + 1, nxt):
                    return True
            return False

        return recurse(0, binding)

    def body_bindings(self, atoms, binding=None):
        """All full body instantiations (dicts var -> entity id)."""
        ordered = self._atom_order(atoms, binding.keys() if binding else ())

        def recurse(i, b):
            if i == len(ordered):
                yield b
                return
            for nxt in self._extend(ordered[i], b):
                yield from recurse(i + 1, nxt)

        yield from recurse(0, binding or {})

    def head_pairs_of_body(self, atoms, x, y):
        """Distinct (x, y) projections of the body instantiations."""
        return {(b[x], b[y]) for b in self.body_bindings(atoms)}


def _rel_atoms_to_ids(view: KnowledgeGraphView, rule: HornRule):
    """Rewrite a rule's relation IRIs into view relation ids; None when the
    head relation is absent from the graph."""
    def convert(atom):
        rid = view.rel_id(atom.relation)
        return None if rid is None else Atom(str(rid), atom.subject, atom.object)
    head = convert(rule.head)
    body = tuple(convert(a) for a in rule.body)
    return head, body


class RuleMiner:
    def __init__(self, store: TripleStore, config: MiningConfig = None):
        self.view = KnowledgeGraphView(store)
        self.config = config or MiningConfig()

    # --- scoring ----------------------------------------------------------

    def _support(self, head: Atom, body):
        """Count head facts whose (subject, object) pair extends to a full
        body instantiation. With an empty body this is the head size."""
        rel = int(head.relation)
        facts = self.view.facts.get(rel, [])
        if not body:
            return len(facts)
        n = 0
        for s, o in facts:
            if self.view.body_satisfiable(body, {head.subject: s, head.object: o}):
                n += 1
        return n

    def _score_closed(self, head: Atom, body) -> RuleScores:
        rel = int(head.relation)
        head_facts = self.view.pair_sets.get(rel, set())
        head_size = len(head_facts)
        body_pairs = self.view.head_pairs_of_body(body, head.subject, head.object)
        support = sum(1 for pair in body_pairs if pair in head_facts)
        head_subjects = self.view.subjects.get(rel, set())
        pca_denom = sum(1 for a, _ in body_pairs if a in head_subjects)
        return RuleScores(
            support=support,
            head_coverage=support / head_size if head_size else 0.0,
            std_confidence=support / len(body_pairs) if body_pairs else 0.0,
            pca_confidence=support / pca_denom if pca_denom else 0.0,
        )

    def score(self, rule: HornRule) -> RuleScores:
        if not rule.is_closed():
            raise ValidationError("only closed rules are scored")
        head, body = _rel_atoms_to_ids(self.view, rule)
        if head is None or any(a is None for a in body):
            return RuleScores()
        return self._score_closed(head, body)

    # --- search -------------------------------------------------------------

    def _fresh_var(self, rule_vars):
        for name in _VAR_NAMES:
            if name not in rule_vars:
                return name
        raise ValidationError("rule exceeds supported variable count")

    def _refinements(self, head: Atom, body):
        rule_vars = []
        for atom in (head,) + tuple(body):
            for v in (atom.subject, atom.object):
                if v not in rule_vars:
                    rule_vars.append(v)
        existing_atoms = set(body)
        fresh = self._fresh_var(rule_vars)
        for rel in self.view.relations():
            rel_name = str(rel)
            # dangling: one existing variable, one fresh
            for v in rule_vars:
                for atom in (Atom(rel_name, v, fresh), Atom(rel_name, fresh, v)):
                    if atom not in existing_atoms:
                        yield body + (atom,)
            # closing: two existing variables
            for u in rule_vars:
                for v in rule_vars:
                    if u == v:
                        continue
                    atom = Atom(rel_name, u, v)
                    if atom != head and atom not in existing_atoms:
                        yield body + (atom,)

    def mine(self) -> list[HornRule]:
        cfg = self.config
        results: dict[str, HornRule] = {}
        visited: set[str] = set()
        queue: list[tuple[Atom, tuple[Atom, ...]]] = []
        for rel in self.view.relations():
            head = Atom(str(rel), "x", "y")
            seed = HornRule((), head)
            key = seed.canonical_text()
            if key not in visited:
                visited.add(key)
                queue.append((head, ()))

        while queue:
            head, body = queue.pop()
            head_size = len(self.view.facts.get(int(head.relation), []))
            support = self._support(head, body)
            if support < max(cfg.min_support, cfg.min_head_coverage * head_size):
                continue
            rule = HornRule(body, head)
            if rule.is_closed() and head not in body:
                scores = self._score_closed(head, body)
                if (scores.support >= cfg.min_support
                        and scores.head_coverage >= cfg.min_head_coverage
                        and scores.std_confidence >= cfg.min_std_confidence):
                    scored = HornRule(body, head, scores)
                    results.setdefault(scored.canonical_text(), scored)
            if len(body) + 1 < cfg.max_len:
                for new_body in self._refinements(head, body):
                    key = HornRule(new_body, head).canonical_text()
                    if key not in visited:
                        visited.add(key)
                        queue.append((head, new_body))

        externalized = [self._externalize(rule) for rule in results.values()]
        return sorted(
            externalized,
            key=lambda r: (-r.scores.pca_confidence, -r.scores.support,
                           r.canonical_text()),
        )

    def _externalize(self, rule: HornRule) -> HornRule:
        """Translate relation ids back to IRIs and renumber variables into
        canonical names."""
        def convert(atom):
            return Atom(self.view.rel_terms[int(atom.relation)].value,
                        atom.subject, atom.object)
        converted = HornRule(tuple(convert(a) for a in rule.body),
                             convert(rule.head), rule.scores)
        return canonicalize(converted)


def canonicalize(rule: HornRule) -> HornRule:
    """Rebuild a rule with canonical variable names and body order."""
    text = rule.canonical_text()
    parsed = parse_rule_text(text)
    return HornRule(parsed.body, parsed.head, rule.scores)


def mine_rules(store: TripleStore, config: MiningConfig = None) -> list[HornRule]:
    return RuleMiner(store, config).mine()


def score_rule(store: TripleStore, rule: HornRule,
               miner: RuleMiner = None) -> RuleScores:
    miner = miner or RuleMiner(store)
    return miner.score(rule)


# --- inference -----------------------------------------------------------------


def apply_rules(store: TripleStore, rules, apply_threshold: float = 0.9,
                fixpoint: bool = False):
    """Materialize head triples of every rule at or above the PCA threshold.

    Returns a sorted list of (triple, rule_text) pairs: new triples absent
    from the store, each tagged with the canonical text of the first rule
    that produced it. Single pass over the original store by default; with
    fixpoint=True inference reruns on the enlarged graph until nothing new
    appears.
    """
    selected = [r for r in rules if r.scores.pca_confidence >= apply_threshold]
    current = store
    inferred: dict[Triple, str] = {}
    while True:
        view = KnowledgeGraphView(current)
        new_this_round: dict[Triple, str] = {}
        for rule in selected:
            body = []
            missing = False
            for atom in rule.body:
                rid = view.rel_id(atom.relation)
                if rid is None:
                    missing = True
                    break
                body.append(Atom(str(rid), atom.subject, atom.object))
            if missing:
                continue
            head_rel = make_iri(rule.head.relation)
            for a, b in view.head_pairs_of_body(tuple(body), rule.head.subject,
                                                rule.head.object):
                triple = Triple(view.store.term(a), head_rel, view.store.term(b))
                if triple in current or triple in inferred or triple in new_this_round:
                    continue
                new_this_round[triple] = rule.canonical_text()
        inferred.update(new_this_round)
        if not fixpoint or not new_this_round:
            break
        merged = current.triples() + list(new_this_round)
        current = TripleStore.load(merged)
    return sorted(inferred.items(),
                  key=lambda kv: (kv[0].subject.value, kv[0].predicate.value,
                                  kv[0].object.value))


# --- rules file ------------------------------------------------------------------


_ATOM_RE = re.compile(r"\?([a-z])\s+<([^>]+)>\s+\?([a-z])")


def parse_rule_text(text: str) -> HornRule:
    if "=>" not in text:
        raise ValidationError(f"rule text lacks '=>': {text!r}")
    body_part, head_part = text.split("=>", 1)
    head_match = _ATOM_RE.search(head_part)
    if not head_match:
        raise ValidationError(f"unparseable rule head: {head_part!r}")
    head = Atom(head_match.group(2), head_match.group(1), head_match.group(3))
    body = []
    for chunk in body_part.split("&"):
        chunk = chunk.strip()
        if not chunk:
            continue
        m = _ATOM_RE.search(chunk)
        if not m:
            raise ValidationError(f"unparseable body atom: {chunk!r}")
        body.append(Atom(m.group(2), m.group(1), m.group(3)))
    return HornRule(tuple(body), head)


def format_rules(rules) -> str:
    lines = []
    for rule in rules:
        s = rule.scores
        lines.append(
            f"{rule.canonical_text()}\t{s.support}\t{s.head_coverage:.6f}"
            f"\t{s.std_confidence:.6f}\t{s.pca_confidence:.6f}\n"
        )
    return "".join(lines)


def parse_rules_file(text: str) -> list[HornRule]:
    rules = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise ValidationError(f"rules file line {lineno}: expected 5 fields")
        rule = parse_rule_text(parts[0])
        scores = RuleScores(int(parts[1]), float(parts[2]), float(parts[3]),
                            float(parts[4]))
        rules.append(HornRule(rule.body, rule.head, scores))
    return rules
