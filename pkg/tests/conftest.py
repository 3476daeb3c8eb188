import os
import random

import pytest

from metakg import pipeline
from metakg.config import load_config
from metakg.rdf import Triple, make_blank, make_iri, make_literal

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = os.path.join(REPO_ROOT, "fixtures")


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def fixture_workdir(tmp_path_factory):
    """Run the whole pipeline once over the bundled corpus; many tests
    read from this workdir."""
    workdir = tmp_path_factory.mktemp("fixture-work")
    cfg = load_config(os.path.join(FIXTURES, "fixture.toml"))
    cfg.workdir = str(workdir)
    code = pipeline.run_all(cfg)
    assert code == 0
    return workdir


# --- random term/triple generators (seeded, shared by property tests) ---

LANGS = ["en", "nl", "de", "fr-be", "nl-x-dialect"]
DATATYPES = [
    "http://www.w3.org/2001/XMLSchema#date",
    "http://www.w3.org/2001/XMLSchema#integer",
    "http://www.w3.org/2001/XMLSchema#string",
]
TRICKY_TEXT = ['say "hi"', "back\\slash", "tab\there", "line\nbreak",
               "unicode: leeftijd bij overlijden € é",
               "carriage\rreturn", "plain words", ""]


def random_iri(rng: random.Random):
    return make_iri(f"http://example.org/{rng.choice('abcdef')}{rng.randrange(50)}")


def random_literal(rng: random.Random):
    text = rng.choice(TRICKY_TEXT) + str(rng.randrange(10))
    kind = rng.randrange(3)
    if kind == 0:
        return make_literal(text)
    if kind == 1:
        return make_literal(text, lang=rng.choice(LANGS))
    return make_literal(text, datatype=rng.choice(DATATYPES))


def random_term(rng: random.Random, allow_literal=True, allow_blank=True):
    choices = ["iri"]
    if allow_literal:
        choices.append("literal")
    if allow_blank:
        choices.append("blank")
    kind = rng.choice(choices)
    if kind == "iri":
        return random_iri(rng)
    if kind == "blank":
        return make_blank(f"b{rng.randrange(30)}")
    return random_literal(rng)


def random_triple(rng: random.Random):
    return Triple(
        random_term(rng, allow_literal=False),
        random_iri(rng),
        random_term(rng),
    )


def random_triples(rng: random.Random, n):
    return [random_triple(rng) for _ in range(n)]
