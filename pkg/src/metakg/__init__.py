"""metakg: build, enrich and explore a metadata knowledge graph.

Pipeline stages: ingest description documents, translate them, extract
entities and keywords, map the staging tables to RDF, load a queryable
store, mine Horn rules, train node embeddings, and serve the result.
"""

__version__ = "0.1.0"
