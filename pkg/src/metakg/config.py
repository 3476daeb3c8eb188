"""Pipeline configuration: TOML file plus command-line overrides.

Paths in the file resolve against the file's own directory, so a config
can travel with its fixture data.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .errors import ValidationError
from .mine import MiningConfig


@dataclass
class PipelineConfig:
    base_dir: str = "."
    workdir: str = "work"
    seed: int = 1

    manifest: str = None
    delay_min: float = 1.0
    delay_max: float = 5.0

    translate_backend: str = "dict"
    lexicon: str = None
    mt_endpoint: str = None

    gazetteer: str = None
    stoplist: str = None
    keywords_per_doc: int = 8

    mapping_file: str = None
    namespace: str = "http://data.example.org/cbs/"

    mining: MiningConfig = field(default_factory=MiningConfig)

    walks_per_node: int = 10
    walk_length: int = 8
    window: int = 2
    dims: int = 32
    negatives: int = 5
    epochs: int = 5
    alpha0: float = 0.025
    embed_seed: int = None

    host: str = "127.0.0.1"
    port: int = 8080
    cors_origin: str = "*"

    def resolve(self, path):
        if path is None:
            return None
        if os.path.isabs(path):
            return path
        return os.path.normpath(os.path.join(self.base_dir, path))

    @property
    def workdir_path(self):
        return self.resolve(self.workdir)

    def require(self, attr, stage):
        path = self.resolve(getattr(self, attr))
        if path is None:
            raise ValidationError(f"{stage}: no {attr} configured")
        if not os.path.exists(path):
            raise ValidationError(f"{stage}: {attr} file not found: {path}")
        return path


def load_config(path) -> PipelineConfig:
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    cfg = PipelineConfig(base_dir=os.path.dirname(os.path.abspath(path)))

    pipeline = raw.get("pipeline", {})
    cfg.workdir = pipeline.get("workdir", cfg.workdir)
    cfg.seed = pipeline.get("seed", cfg.seed)

    ingest = raw.get("ingest", {})
    cfg.manifest = ingest.get("manifest", cfg.manifest)
    cfg.delay_min = ingest.get("delay_min", cfg.delay_min)
    cfg.delay_max = ingest.get("delay_max", cfg.delay_max)

    translate = raw.get("translate", {})
    cfg.translate_backend = translate.get("backend", cfg.translate_backend)
    cfg.lexicon = translate.get("lexicon", cfg.lexicon)
    cfg.mt_endpoint = translate.get("endpoint", cfg.mt_endpoint)

    extract = raw.get("extract", {})
    cfg.gazetteer = extract.get("gazetteer", cfg.gazetteer)
    cfg.stoplist = extract.get("stoplist", cfg.stoplist)
    cfg.keywords_per_doc = extract.get("keywords_per_doc", cfg.keywords_per_doc)

    mapping = raw.get("mapping", {})
    cfg.mapping_file = mapping.get("file", cfg.mapping_file)

    namespace = raw.get("namespace", {})
    cfg.namespace = namespace.get("base", cfg.namespace)

    mine = raw.get("mine", {})
    cfg.mining = MiningConfig(
        max_len=mine.get("max_len", 3),
        min_head_coverage=mine.get("min_head_coverage", 0.01),
        min_std_confidence=mine.get("min_std_confidence", 0.1),
        min_support=mine.get("min_support", 2),
        apply_threshold=mine.get("apply_threshold", 0.9),
    )

    embed = raw.get("embed", {})
    cfg.walks_per_node = embed.get("walks_per_node", cfg.walks_per_node)
    cfg.walk_length = embed.get("walk_length", cfg.walk_length)
    cfg.window = embed.get("window", cfg.window)
    cfg.dims = embed.get("dims", cfg.dims)
    cfg.negatives = embed.get("negatives", cfg.negatives)
    cfg.epochs = embed.get("epochs", cfg.epochs)
    cfg.alpha0 = embed.get("alpha0", cfg.alpha0)
    cfg.embed_seed = embed.get("seed", cfg.embed_seed)

    service = raw.get("service", {})
    cfg.host = service.get("host", cfg.host)
    cfg.port = service.get("port", cfg.port)
    cfg.cors_origin = service.get("cors_origin", cfg.cors_origin)
    return cfg
