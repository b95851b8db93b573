from dataclasses import dataclass
import hashlib
import logging
from typing import Dict, List, Optional, Sequence, Tuple

from vcstack.api.exceptions import IndexOutOfRangeException
from vcstack.api.interface import VectorCommitment
from vcstack.schemas import (
    BackendId,
    NodePath,
    OpCounter,
    UpdateBatch,
    UpdateInfo,
    tree_height,
)

logger = logging.getLogger(__name__)

HASH_BYTES = 32


def H(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


@dataclass(frozen=True)
class MerkleTree:
    height: int
    messages: Tuple[bytes, ...]
    nodes: Dict[NodePath, bytes]

    @property
    def root(self) -> bytes:
        return self.nodes[NodePath.root()]

    @property
    def n(self) -> int:
        return len(self.messages)


@dataclass(frozen=True)
class MerkleProof:
    index: int
    # (u_{!b1}, u_{b1 !b2}, ...) from the top down
    siblings: Tuple[bytes, ...]


def _sibling_paths(index: int, height: int) -> List[NodePath]:
    leaf = NodePath.from_index(index, height)
    return [leaf.prefix(j).sibling() for j in range(1, height + 1)]


def commit(messages: Sequence[bytes]) -> Tuple[bytes, MerkleTree]:
    height = tree_height(len(messages))
    nodes: Dict[NodePath, bytes] = {}
    for i, m in enumerate(messages):
        nodes[NodePath.from_index(i, height)] = H(m)
    for depth in range(height - 1, -1, -1):
        for i in range(2**depth):
            path = NodePath.from_index(i, depth)
            nodes[path] = H(nodes[path.child(0)] + nodes[path.child(1)])
    tree = MerkleTree(height, tuple(messages), nodes)
    return tree.root, tree


def open(tree: MerkleTree, index: int) -> MerkleProof:
    if not 0 <= index < tree.n:
        raise IndexOutOfRangeException(f"Index {index} out of range for N={tree.n}")
    return MerkleProof(
        index, tuple(tree.nodes[p] for p in _sibling_paths(index, tree.height))
    )


def verify(root: bytes, message: bytes, index: int, proof: MerkleProof) -> bool:
    height = len(proof.siblings)
    if index != proof.index or not 0 <= index < 2**height:
        return False
    leaf = NodePath.from_index(index, height)
    acc = H(message)
    for depth in range(height, 0, -1):
        sibling = proof.siblings[depth - 1]
        if leaf.digits[depth - 1] == 0:
            acc = H(acc + sibling)
        else:
            acc = H(sibling + acc)
    return acc == root


def update(
    tree: MerkleTree, batch: UpdateBatch
) -> Tuple[bytes, UpdateInfo, MerkleTree]:
    """Recomputes the path union of the batch and publishes every node on it."""
    batch.validate(tree.n)
    height = tree.height
    nodes = dict(tree.nodes)
    touched: Dict[NodePath, bytes] = {}
    for u in batch:
        leaf = NodePath.from_index(u.index, height)
        nodes[leaf] = touched[leaf] = H(u.new)
    frontier = set(touched)
    for _ in range(height):
        parents = {p.parent() for p in frontier}
        for p in parents:
            nodes[p] = touched[p] = H(nodes[p.child(0)] + nodes[p.child(1)])
        frontier = parents

    update_info = UpdateInfo.from_nodes(BackendId.MERKLE, height, touched)
    new_tree = MerkleTree(height, tuple(batch.apply(tree.messages)), nodes)
    logger.debug(f"Merkle update of {batch.k} leaves published {len(touched)} nodes")
    return new_tree.root, update_info, new_tree


def proof_update(
    proof: MerkleProof,
    update_info: UpdateInfo,
    counter: Optional[OpCounter] = None,
) -> MerkleProof:
    """Replace every sibling found in U. Each lookup is a binary search."""
    height = len(proof.siblings)
    siblings = list(proof.siblings)
    for j, path in enumerate(_sibling_paths(proof.index, height)):
        value = update_info.lookup(path)
        if value is not None:
            siblings[j] = value
    return MerkleProof(proof.index, tuple(siblings))


class MerkleVC(VectorCommitment):
    name = "merkle"

    def commit(self, messages):
        return commit(messages)

    def open(self, aux, index):
        return open(aux, index)

    def verify(self, commitment, message, index, proof):
        return verify(commitment, message, index, proof)

    def update(self, aux, batch):
        return update(aux, batch)

    def proof_update(self, proof, index, batch, update_info, counter=None):
        return proof_update(proof, update_info, counter)

    def random_message(self, rng) -> bytes:
        return rng.getrandbits(8 * HASH_BYTES).to_bytes(HASH_BYTES, "big")
