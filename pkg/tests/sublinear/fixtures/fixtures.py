from dataclasses import dataclass
import random
from typing import Dict, List, Tuple

from vcstack.api.interface import HomomorphicProof, HomomorphicScheme, HomomorphicTree
from vcstack.schemas import BackendId, NodePath, UpdateBatch


class LinearScheme(HomomorphicScheme):
    """Integer nodes: node(b) = sum of m_i * weight(i, b) over i under b's anchor."""

    backend_id = BackendId.AMT

    def __init__(self, height: int, locality: int):
        self.height = height
        self.locality = locality

    def weight(self, index: int, path: NodePath) -> int:
        return (index + 1) * (path.depth + 1) + int(path.bits or "0", 2)

    def identity(self):
        return 0

    def combine(self, a, b):
        return a + b

    def partial_delta(self, index, path, old, new, counter=None):
        if counter is not None:
            counter.exp()
        return (new - old) * self.weight(index, path)

    def encode_node(self, value) -> bytes:
        return str(value).encode()

    def decode_node(self, data: bytes):
        return int(data.decode())


def all_paths(height: int) -> List[NodePath]:
    level = [NodePath.root()]
    out = list(level)
    for _ in range(height):
        level = [c for p in level for c in p.children()]
        out.extend(level)
    return out


@dataclass(frozen=True)
class LinearTree(HomomorphicTree):
    scheme: LinearScheme
    messages: Tuple[int, ...]
    nodes: Dict[NodePath, int]

    @classmethod
    def build(cls, scheme: LinearScheme, messages) -> "LinearTree":
        nodes = {}
        for path in all_paths(scheme.height):
            anchor = path.ancestor(scheme.locality)
            nodes[path] = sum(
                messages[i] * scheme.weight(i, path)
                for i in anchor.range(scheme.height)
            )
        return cls(scheme, tuple(messages), nodes)

    @property
    def commitment(self):
        return self.nodes[NodePath.root()]

    def node(self, path):
        return self.nodes[path]

    def with_updates(self, nodes, batch: UpdateBatch) -> "LinearTree":
        merged = dict(self.nodes)
        merged.update(nodes)
        return LinearTree(self.scheme, tuple(batch.apply(self.messages)), merged)


@dataclass(frozen=True)
class LinearProof(HomomorphicProof):
    index: int
    paths: Tuple[NodePath, ...]
    values: Tuple[int, ...]

    def node_paths(self):
        return list(self.paths)

    def node_values(self):
        return list(self.values)

    def with_values(self, values):
        return LinearProof(self.index, self.paths, tuple(values))


def open_linear(tree: LinearTree, index: int) -> LinearProof:
    # p=1 proofs hold the path prefixes, p=0 proofs both children of each prefix
    h = tree.scheme.height
    leaf = NodePath.from_index(index, h)
    if tree.scheme.locality == 1:
        paths = [leaf.prefix(j) for j in range(h + 1)]
    else:
        paths = [c for j in range(h) for c in leaf.prefix(j).children()]
    return LinearProof(index, tuple(paths), tuple(tree.node(p) for p in paths))


def random_instance(rng: random.Random, height: int, k: int):
    n = 2**height
    messages = [rng.randrange(-50, 50) for _ in range(n)]
    indices = rng.sample(range(n), k)
    batch = UpdateBatch.of(
        [(i, messages[i], messages[i] + rng.randrange(1, 20)) for i in indices]
    )
    return messages, batch


def hand_batch() -> UpdateBatch:
    # N=8, updates at 0, 1 and 5
    return UpdateBatch.of([(0, 0, 1), (1, 0, 2), (5, 0, 3)])
