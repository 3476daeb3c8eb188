"""Independent reference implementations used as test oracles.

Everything here is deliberately written from scratch against the stated
semantics, without reusing the production join or search code, so a bug
on either side shows up as a disagreement.
"""

from itertools import product

from metakg.store import TriplePattern, Var

# --- nested-loop BGP join ---------------------------------------------------


def _unify(pattern: TriplePattern, triple, binding):
    new = dict(binding)
    for elem, term in ((pattern.subject, triple.subject),
                       (pattern.predicate, triple.predicate),
                       (pattern.object, triple.object)):
        if isinstance(elem, Var):
            bound = new.get(elem.name)
            if bound is None:
                new[elem.name] = term
            elif bound != term:
                return None
        elif elem != term:
            return None
    return new


def nested_loop_bgp(triples, patterns, select, distinct_pairs=(),
                    max_intermediate=None):
    """Join solutions pattern by pattern, scanning all triples each time.

    Returns the projected row set, or None when max_intermediate is set
    and an intermediate result exceeds it (generator should retry).
    """
    rows = [dict()]
    for pattern in patterns:
        new_rows = []
        for binding in rows:
            for triple in triples:
                extended = _unify(pattern, triple, binding)
                if extended is not None:
                    new_rows.append(extended)
        rows = new_rows
        if max_intermediate is not None and len(rows) > max_intermediate:
            return None
    out = set()
    for binding in rows:
        if any(binding[a] == binding[b] for a, b in distinct_pairs):
            continue
        out.add(tuple(binding[v] for v in select))
    return out


# --- brute-force rule enumeration and scoring ---------------------------------


def kg_facts(triples):
    """Relation IRI -> list of (subject value, object value); literal
    objects are skipped, mirroring the miner's graph view."""
    facts = {}
    for t in triples:
        if t.object.is_literal():
            continue
        facts.setdefault(t.predicate.value, []).append(
            (t.subject.value, t.object.value))
    return {rel: sorted(set(pairs)) for rel, pairs in facts.items()}


def _enumerate_bindings(facts, body):
    bindings = [dict()]
    for rel, s_var, o_var in body:
        rel_facts = facts.get(rel, [])
        new = []
        for binding in bindings:
            for s, o in rel_facts:
                if binding.get(s_var, s) != s:
                    continue
                if binding.get(o_var, o) != o:
                    continue
                extended = dict(binding)
                extended[s_var] = s
                extended[o_var] = o
                new.append(extended)
        bindings = new
    return bindings


def score_rule_bruteforce(facts, head_rel, body):
    """The four metrics, computed by plain enumeration.

    head is head_rel(x, y); body atoms are (relation, subject_var,
    object_var) tuples over variables x, y, z.
    """
    head_facts = set(facts.get(head_rel, []))
    pairs = {(b["x"], b["y"]) for b in _enumerate_bindings(facts, body)}
    support = len(pairs & head_facts)
    head_subjects = {s for s, _ in head_facts}
    pca_den = sum(1 for a, _ in pairs if a in head_subjects)
    return {
        "support": support,
        "head_coverage": support / len(head_facts) if head_facts else 0.0,
        "std_confidence": support / len(pairs) if pairs else 0.0,
        "pca_confidence": support / pca_den if pca_den else 0.0,
    }


_VAR_PAIRS = [("x", "y"), ("y", "x"), ("x", "z"), ("z", "x"),
              ("y", "z"), ("z", "y")]


def _closed(body):
    counts = {"x": 1, "y": 1}
    for _, s, o in body:
        counts[s] = counts.get(s, 0) + 1
        counts[o] = counts.get(o, 0) + 1
    return all(n >= 2 for n in counts.values())


def _connected(body):
    if len(body) <= 1:
        return True
    groups = []
    for _, s, o in body:
        groups.append({s, o})
    merged = groups[0] | {"x", "y"}
    return all(g & merged for g in groups[1:])


def enumerate_rules_bruteforce(triples, max_len=3, min_support=2,
                               min_head_coverage=0.01, min_std_confidence=0.1):
    """All closed connected rules up to max_len atoms, scored and
    thresholded; keyed by (head relation, frozenset of body atoms)."""
    facts = kg_facts(triples)
    relations = sorted(facts)
    out = {}
    for head_rel in relations:
        head_atom = (head_rel, "x", "y")
        bodies = []
        for rel in relations:
            for pair in (("x", "y"), ("y", "x")):
                atom = (rel,) + pair
                if atom != head_atom:
                    bodies.append([atom])
        if max_len >= 3:
            for rel1, rel2 in product(relations, repeat=2):
                for p1 in _VAR_PAIRS:
                    for p2 in _VAR_PAIRS:
                        a1 = (rel1,) + p1
                        a2 = (rel2,) + p2
                        if a1 == a2 or head_atom in (a1, a2):
                            continue
                        body = [a1, a2]
                        if not _closed(body) or not _connected(body):
                            continue
                        bodies.append(body)
        seen = set()
        for body in bodies:
            key = (head_rel, frozenset(body))
            if key in seen:
                continue
            seen.add(key)
            scores = score_rule_bruteforce(facts, head_rel, body)
            if (scores["support"] >= min_support
                    and scores["head_coverage"] >= min_head_coverage
                    and scores["std_confidence"] >= min_std_confidence):
                out[key] = scores
    return out


def mined_rule_key(rule):
    """Translate a mined HornRule into the enumerator's key space: head
    subject -> x, head object -> y, the remaining variable -> z."""
    names = {rule.head.subject: "x", rule.head.object: "y"}
    body = []
    for atom in rule.body:
        s = names.setdefault(atom.subject, "z")
        o = names.setdefault(atom.object, "z")
        body.append((atom.relation, s, o))
    return (rule.head.relation, frozenset(body))
