"""Random-walk node embeddings over the entity graph.

The IRI-to-IRI triples of the store are treated as an undirected graph
(literal objects excluded). A corpus of uniform random walks feeds a
skip-gram model trained with negative sampling; cosine similarity over the
input vectors surfaces related nodes. Everything is seeded, so a given
(graph, config) pair always produces the same table.
"""

from __future__ import annotations

import hashlib
import logging
import random
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .store import TripleStore

log = logging.getLogger(__name__)


@dataclass
class WalkConfig:
    walks_per_node: int = 10
    walk_length: int = 8
    window: int = 2
    seed: int = 1

    def __post_init__(self):
        if min(self.walks_per_node, self.walk_length, self.window) <= 0:
            raise ValidationError("walk parameters must be positive")
        if self.window >= self.walk_length:
            raise ValidationError("window must be smaller than walk_length")


@dataclass
class SGNSConfig:
    dims: int = 32
    negatives: int = 5
    epochs: int = 5
    alpha0: float = 0.025
    seed: int = 1

    def __post_init__(self):
        if self.dims < 2:
            raise ValidationError("dims must be at least 2")
        if self.negatives < 1:
            raise ValidationError("need at least one negative sample")


def entity_graph(store: TripleStore) -> dict[str, list[str]]:
    """Undirected adjacency over non-literal terms, sorted for determinism."""
    adjacency: dict[str, set[str]] = {}
    for t in store.triples():
        if t.object.is_literal():
            continue
        s = t.subject.value
        o = t.object.value
        adjacency.setdefault(s, set())
        adjacency.setdefault(o, set())
        if s != o:
            adjacency[s].add(o)
            adjacency[o].add(s)
    return {node: sorted(neigh) for node, neigh in sorted(adjacency.items())}


def _node_rng(seed, node):
    digest = hashlib.sha256(f"{seed}:{node}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def build_walk_corpus(store: TripleStore, config: WalkConfig) -> list[list[str]]:
    """Uniform random walks, walks_per_node per node.

    Isolated nodes yield single-node walks. Each node draws from its own
    PRNG stream derived from (seed, node), so the corpus is reproducible
    and independent of node processing order.
    """
    adjacency = entity_graph(store)
    corpus = []
    for node in adjacency:
        rng = _node_rng(config.seed, node)
        for _ in range(config.walks_per_node):
            walk = [node]
            while len(walk) < config.walk_length:
                neighbours = adjacency[walk[-1]]
                if not neighbours:
                    break
                walk.append(neighbours[rng.randrange(len(neighbours))])
            corpus.append(walk)
    return corpus


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def sgns_step(v_c, u_o, u_negs, alpha):
    """One skip-gram negative-sampling SGD step.

    Pure function: returns (new_v_c, new_u_o, new_u_negs, loss) without
    touching the inputs. Gradients are evaluated at the incoming vectors
    (simultaneous update).
    """
    v_c = np.asarray(v_c, dtype=float)
    u_o = np.asarray(u_o, dtype=float)
    u_negs = np.asarray(u_negs, dtype=float)
    pos_sig = sigmoid(u_o @ v_c)
    neg_sig = sigmoid(u_negs @ v_c)
    loss = -np.log(pos_sig) - np.sum(np.log(sigmoid(-(u_negs @ v_c))))
    grad_v = (pos_sig - 1.0) * u_o + neg_sig @ u_negs
    new_v_c = v_c - alpha * grad_v
    new_u_o = u_o - alpha * (pos_sig - 1.0) * v_c
    new_u_negs = u_negs - alpha * np.outer(neg_sig, v_c)
    return new_v_c, new_u_o, new_u_negs, float(loss)


class EmbeddingTable:
    def __init__(self, nodes, input_vectors, output_vectors):
        self.nodes = list(nodes)
        self.index = {n: i for i, n in enumerate(self.nodes)}
        self.input_vectors = np.asarray(input_vectors, dtype=float)
        self.output_vectors = np.asarray(output_vectors, dtype=float)

    @property
    def dims(self):
        return self.input_vectors.shape[1]

    def vector(self, node):
        if node not in self.index:
            raise ValidationError(f"unknown node: {node}")
        return self.input_vectors[self.index[node]]

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{len(self.nodes)} {self.dims}\n")
            for i, node in enumerate(self.nodes):
                coords = " ".join(repr(float(x)) for x in self.input_vectors[i])
                fh.write(f"{node} {coords}\n")

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().split()
            if len(header) != 2:
                raise ValidationError(f"{path}: bad embedding file header")
            n, dims = int(header[0]), int(header[1])
            nodes = []
            vectors = np.zeros((n, dims))
            for i in range(n):
                parts = fh.readline().rstrip("\n").split(" ")
                if len(parts) != dims + 1:
                    raise ValidationError(f"{path}: bad row {i + 1}")
                nodes.append(parts[0])
                vectors[i] = [float(x) for x in parts[1:]]
        return cls(nodes, vectors, np.zeros_like(vectors))


def _window_pairs(corpus, window):
    for walk in corpus:
        for i, center in enumerate(walk):
            lo = max(0, i - window)
            hi = min(len(walk), i + window + 1)
            for j in range(lo, hi):
                if j != i:
                    yield center, walk[j]


def train(corpus, config: SGNSConfig, window: int = 2,
          epoch_losses=None) -> EmbeddingTable:
    """Train skip-gram embeddings with negative sampling over a walk corpus.

    Pairs come from a symmetric window over each walk. Negatives are drawn
    proportional to frequency^0.75; the learning rate decays linearly per
    processed pair down to alpha0/100. Input vectors start uniform in
    [-0.5/dims, 0.5/dims], output vectors at zero. Training is
    single-threaded on purpose: pair order defines the result.
    """
    freq: dict[str, int] = {}
    for walk in corpus:
        for node in walk:
            freq[node] = freq.get(node, 0) + 1
    if not freq:
        raise ValidationError("empty walk corpus: nothing to train on")
    nodes = sorted(freq)
    index = {n: i for i, n in enumerate(nodes)}

    rng = np.random.Generator(np.random.PCG64(config.seed))
    dims = config.dims
    v = rng.uniform(-0.5 / dims, 0.5 / dims, size=(len(nodes), dims))
    u = np.zeros((len(nodes), dims))

    weights = np.array([freq[n] ** 0.75 for n in nodes])
    cumulative = np.cumsum(weights / weights.sum())

    pairs_per_epoch = sum(1 for _ in _window_pairs(corpus, window))
    total = pairs_per_epoch * config.epochs
    if total == 0:
        raise ValidationError("walk corpus yields no training pairs")

    processed = 0
    floor = config.alpha0 / 100.0
    for _ in range(config.epochs):
        epoch_loss = 0.0
        for center, context in _window_pairs(corpus, window):
            alpha = max(config.alpha0 * (1.0 - processed / total), floor)
            ci = index[center]
            oi = index[context]
            negs = np.searchsorted(cumulative, rng.random(config.negatives))
            new_v, new_u_o, new_u_negs, loss = sgns_step(
                v[ci], u[oi], u[negs], alpha
            )
            v[ci] = new_v
            u[oi] = new_u_o
            for slot, ni in enumerate(negs):
                u[ni] = new_u_negs[slot]
            epoch_loss += loss
            processed += 1
        if epoch_losses is not None:
            epoch_losses.append(epoch_loss / pairs_per_epoch)
    return EmbeddingTable(nodes, v, u)


def cosine(a, b):
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a @ b / (na * nb))


def similar(table: EmbeddingTable, node, k):
    """Top-k neighbours of node by cosine over input vectors; the node
    itself is excluded and ties break on node id."""
    base = table.vector(node)
    scored = []
    for other in table.nodes:
        if other == node:
            continue
        scored.append((cosine(base, table.vector(other)), other))
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    return [(other, score) for score, other in scored[:max(k, 0)]]
