#!/usr/bin/env python3
"""Freeze golden outputs for the fixture corpus.

Runs the pipeline into a scratch directory and copies selected outputs
into fixtures/golden/: the mapped graph, one translated document and a
DOT neighbourhood export. Tests compare against these bytes, so rerun
this script (and review the diff) after any intentional behaviour change.
"""

import os
import shutil
import sys
import tempfile

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from metakg import pipeline  # noqa: E402
from metakg.config import load_config  # noqa: E402
from metakg.rdf import read_ntriples  # noqa: E402
from metakg.store import TripleStore  # noqa: E402
from metakg.vocab import LocalNamespace  # noqa: E402

FIXTURES = os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "fixtures"))


def main():
    golden_dir = os.path.join(FIXTURES, "golden")
    os.makedirs(golden_dir, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        cfg = load_config(os.path.join(FIXTURES, "fixture.toml"))
        cfg.workdir = tmp
        code = pipeline.run_all(cfg)
        if code != 0:
            raise SystemExit(f"pipeline failed with exit code {code}")
        shutil.copy(os.path.join(tmp, "graph.nt"),
                    os.path.join(golden_dir, "graph.nt"))
        shutil.copy(os.path.join(tmp, "rules.txt"),
                    os.path.join(golden_dir, "rules.txt"))
        doc_src = os.path.join(tmp, "docs", "age-at-death.doc.json")
        shutil.copy(doc_src, os.path.join(golden_dir, "age-at-death.doc.json"))

        store = TripleStore.load(read_ntriples(os.path.join(tmp, "graph.nt")))
        ns = LocalNamespace()
        dot = store.export_dot(focus=ns.dataset("age-at-death"), radius=1,
                               local_ns=ns)
        with open(os.path.join(golden_dir, "age-at-death.dot"), "w",
                  encoding="utf-8", newline="\n") as fh:
            fh.write(dot)
    print(f"golden files written to {golden_dir}")


if __name__ == "__main__":
    main()
