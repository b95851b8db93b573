"""Lattice-based homomorphic Merkle tree.

Hashes are SIS-style linear maps f(x) = Mx and f~(x, y) = Lx + Ry over Z_q.
Nodes are non-negative digit vectors: the leaf node of i is b(f(m_i)), and a
node at depth j is the sum of the partial digests h_{i,j}(m_i) of the leaves
below it, where h_{i,j} = b(L . h_{i,j+1}) or b(R . h_{i,j+1}) depending on
which side of the path i lies. Only the digit-recombining map g^-1 is ever
computed, and g^-1(u_parent) = f~(u_left, u_right) holds for every inner node.
"""

from dataclasses import dataclass
import logging
import math
import struct
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from vcstack.api.exceptions import (
    DimensionMismatchException,
    InvalidParameterException,
    MalformedEncodingException,
)
from vcstack.api.interface import (
    HomomorphicProof,
    HomomorphicScheme,
    HomomorphicTree,
    VectorCommitment,
)
from vcstack.schemas import (
    BackendId,
    NodePath,
    OpCounter,
    UpdateBatch,
    tree_height,
)
from vcstack.sublinear import engine

logger = logging.getLogger(__name__)

PARAMS_MAGIC = b"SVCLAT01"

DEFAULT_K_DIM = 8
DEFAULT_Q = 12289
# Leaves beyond this make digit sums ambiguous against q at the default modulus.
MAX_LEAVES = 256


class LatticeParams(HomomorphicScheme):
    """Matrix M in Z_q^(k x 2d) with L = M[:, :d] and R = M[:, d:].

    d = k * ceil(log2 q) is the length of a digit vector.
    """

    backend_id = BackendId.LATTICE
    locality = 0
    arity = 2

    def __init__(self, matrix: np.ndarray, q: int, height: int = 0):
        k_dim, cols = matrix.shape
        self.k_dim = k_dim
        self.q = q
        self.log_q = math.ceil(math.log2(q))
        self.d = k_dim * self.log_q
        if cols != 2 * self.d:
            raise DimensionMismatchException(
                f"M must have {2 * self.d} columns, got {cols}"
            )
        self.M = np.asarray(matrix, dtype=np.int64) % q
        self.L = self.M[:, : self.d]
        self.R = self.M[:, self.d :]
        self.height = height
        self._weights = np.array([1 << b for b in range(self.log_q)], dtype=np.int64)

    @classmethod
    def generate(
        cls,
        seed: int,
        k_dim: int = DEFAULT_K_DIM,
        q: int = DEFAULT_Q,
        height: int = 0,
    ) -> "LatticeParams":
        rng = np.random.default_rng(seed)
        d = k_dim * math.ceil(math.log2(q))
        return cls(rng.integers(0, q, size=(k_dim, 2 * d), dtype=np.int64), q, height)

    def for_height(self, height: int) -> "LatticeParams":
        return LatticeParams(self.M, self.q, height)

    @property
    def message_bits(self) -> int:
        return 2 * self.d

    def message_vector(self, message: int) -> np.ndarray:
        """b(m): the message as 2d bits, least significant first."""
        if not 0 <= message < (1 << self.message_bits):
            raise InvalidParameterException(
                f"Message must fit in {self.message_bits} bits"
            )
        return np.array(
            [(message >> b) & 1 for b in range(self.message_bits)], dtype=np.int64
        )

    def to_digits(self, vector: np.ndarray) -> np.ndarray:
        """b(v): each coordinate of v in Z_q as log2(q) bits, blockwise."""
        v = np.asarray(vector, dtype=np.int64) % self.q
        bits = (v[:, None] >> np.arange(self.log_q, dtype=np.int64)) & 1
        return bits.reshape(-1)

    def g_inverse(self, node: np.ndarray) -> np.ndarray:
        """Recombine digit blocks: sum of digit * 2^position, mod q."""
        node = np.asarray(node, dtype=np.int64)
        if node.shape != (self.d,):
            raise DimensionMismatchException(
                f"Node vectors have length {self.d}, got {node.shape}"
            )
        blocks = node.reshape(self.k_dim, self.log_q)
        return (blocks @ self._weights) % self.q

    def hash_leaf(self, message) -> np.ndarray:
        """f(x) = Mx for a bit vector x, or for the bits of an integer message."""
        x = message if isinstance(message, np.ndarray) else self.message_vector(message)
        if x.shape != (self.message_bits,):
            raise DimensionMismatchException(
                f"f takes vectors of length {self.message_bits}, got {x.shape}"
            )
        return (self.M @ x) % self.q

    def hash_pair(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """f~(x, y) = Lx + Ry."""
        if x.shape != (self.d,) or y.shape != (self.d,):
            raise DimensionMismatchException(
                f"f~ takes two vectors of length {self.d}"
            )
        return (self.L @ x + self.R @ y) % self.q

    def digest_chain(
        self, index: int, message: int, counter: Optional[OpCounter] = None
    ) -> List[np.ndarray]:
        """[h_{i,0}(m), ..., h_{i,h}(m)] in h compositions."""
        path = NodePath.from_index(index, self.height)
        chain = [self.to_digits(self.hash_leaf(message))]
        for depth in range(self.height - 1, -1, -1):
            side = self.L if path.digits[depth] == 0 else self.R
            chain.append(self.to_digits(side @ chain[-1]))
            if counter is not None:
                counter.compose()
        chain.reverse()
        return chain

    def partial_digest(
        self,
        index: int,
        depth: int,
        message: int,
        counter: Optional[OpCounter] = None,
    ) -> np.ndarray:
        """h_{i,j}(m), evaluated with exactly h - j compositions."""
        if not 0 <= index < 2**self.height:
            raise InvalidParameterException(f"Index {index} out of range")
        if not 0 <= depth <= self.height:
            raise InvalidParameterException(f"Depth {depth} out of range")
        path = NodePath.from_index(index, self.height)
        node = self.to_digits(self.hash_leaf(message))
        for level in range(self.height - 1, depth - 1, -1):
            side = self.L if path.digits[level] == 0 else self.R
            node = self.to_digits(side @ node)
            if counter is not None:
                counter.compose()
        return node

    def node_update(
        self,
        node: np.ndarray,
        index: int,
        depth: int,
        old: int,
        new: int,
        counter: Optional[OpCounter] = None,
    ) -> np.ndarray:
        """u + h_{i,j}(m') - h_{i,j}(m)."""
        if old == new:
            return node
        return (
            node
            + self.partial_digest(index, depth, new, counter)
            - self.partial_digest(index, depth, old, counter)
        )

    # HomomorphicScheme

    def identity(self):
        return np.zeros(self.d, dtype=np.int64)

    def combine(self, a, b):
        return a + b

    def partial_delta(self, index, path, old, new, counter=None):
        return self.node_update(self.identity(), index, path.depth, old, new, counter)

    def encode_node(self, value) -> bytes:
        return np.asarray(value, dtype="<u4").tobytes()

    def decode_node(self, data: bytes) -> np.ndarray:
        if len(data) != 4 * self.d:
            raise MalformedEncodingException(
                f"Node vectors are {4 * self.d} bytes, got {len(data)}"
            )
        return np.frombuffer(data, dtype="<u4").astype(np.int64)


@dataclass(frozen=True)
class HmtTree(HomomorphicTree):
    scheme: LatticeParams
    messages: Tuple[int, ...]
    nodes: Dict[NodePath, np.ndarray]

    @property
    def height(self) -> int:
        return self.scheme.height

    @property
    def commitment(self) -> np.ndarray:
        return self.scheme.g_inverse(self.nodes[NodePath.root()])

    def node(self, path: NodePath) -> np.ndarray:
        return self.nodes[path]

    def with_updates(self, nodes, batch: UpdateBatch) -> "HmtTree":
        merged = dict(self.nodes)
        merged.update(nodes)
        return HmtTree(self.scheme, tuple(batch.apply(self.messages)), merged)


@dataclass(frozen=True)
class HmtProof(HomomorphicProof):
    n: int
    index: int
    # (u_{..,0}, u_{..,1}) under the path node at each depth 0..h-1
    pairs: Tuple[Tuple[np.ndarray, np.ndarray], ...]

    @property
    def height(self) -> int:
        return len(self.pairs)

    def node_paths(self) -> List[NodePath]:
        leaf = NodePath.from_index(self.index, self.height)
        return [c for j in range(self.height) for c in leaf.prefix(j).children()]

    def node_values(self) -> List[np.ndarray]:
        return [v for pair in self.pairs for v in pair]

    def with_values(self, values) -> "HmtProof":
        pairs = tuple(
            (values[2 * j], values[2 * j + 1]) for j in range(len(values) // 2)
        )
        return HmtProof(self.n, self.index, pairs)

    def equals(self, other: "HmtProof") -> bool:
        return (
            self.n == other.n
            and self.index == other.index
            and len(self.pairs) == len(other.pairs)
            and all(
                np.array_equal(a, b)
                for a, b in zip(self.node_values(), other.node_values())
            )
        )


def commit(
    messages: Sequence[int], params: LatticeParams
) -> Tuple[np.ndarray, HmtTree]:
    n = len(messages)
    height = tree_height(n)
    if n > MAX_LEAVES:
        raise InvalidParameterException(f"At most {MAX_LEAVES} leaves, got {n}")
    if params.height != height:
        params = params.for_height(height)
    nodes: Dict[NodePath, np.ndarray] = {}
    for i, m in enumerate(messages):
        leaf = NodePath.from_index(i, height)
        for depth, digest in enumerate(params.digest_chain(i, m)):
            path = leaf.prefix(depth)
            nodes[path] = nodes[path] + digest if path in nodes else digest
    tree = HmtTree(params, tuple(messages), nodes)
    logger.debug(f"Lattice tree over N={n}, {len(nodes)} nodes")
    return tree.commitment, tree


def open(tree: HmtTree, index: int) -> HmtProof:
    n = len(tree.messages)
    if not 0 <= index < n:
        raise InvalidParameterException(f"Index {index} out of range for N={n}")
    leaf = NodePath.from_index(index, tree.height)
    pairs = tuple(
        (tree.nodes[leaf.prefix(j).child(0)], tree.nodes[leaf.prefix(j).child(1)])
        for j in range(tree.height)
    )
    return HmtProof(n, index, pairs)


def verify(
    root_digest: np.ndarray, message: int, proof: HmtProof, params: LatticeParams
) -> bool:
    """Walk the g^-1 chain from the leaf node to the root digest."""
    h = proof.height
    if proof.n != 2**h or not 0 <= proof.index < proof.n:
        return False
    try:
        leaf_hash = params.hash_leaf(message)
    except InvalidParameterException:
        return False
    if h == 0:
        return bool(np.array_equal(root_digest, leaf_hash))

    path = NodePath.from_index(proof.index, h)
    for depth, (left, right) in enumerate(proof.pairs, start=1):
        bound = 2 ** (h - depth)
        for v in (left, right):
            if v.shape != (params.d,) or v.min() < 0 or v.max() > bound:
                return False

    on_path = proof.pairs[h - 1][path.digits[h - 1]]
    if not np.array_equal(params.g_inverse(on_path), leaf_hash):
        return False
    for depth in range(h - 1, 0, -1):
        parent = proof.pairs[depth - 1][path.digits[depth - 1]]
        left, right = proof.pairs[depth]
        if not np.array_equal(params.g_inverse(parent), params.hash_pair(left, right)):
            return False
    left, right = proof.pairs[0]
    return bool(np.array_equal(root_digest, params.hash_pair(left, right)))


def encode_params(params: LatticeParams) -> bytes:
    out = bytearray(PARAMS_MAGIC)
    out += struct.pack("<HI", params.k_dim, params.q)
    out += params.M.astype("<u4").tobytes()
    return bytes(out)


def decode_params(data: bytes) -> LatticeParams:
    header = len(PARAMS_MAGIC) + 6
    if len(data) < header or data[: len(PARAMS_MAGIC)] != PARAMS_MAGIC:
        raise MalformedEncodingException("Bad lattice params magic")
    k_dim, q = struct.unpack_from("<HI", data, len(PARAMS_MAGIC))
    if q < 2 or k_dim < 1:
        raise MalformedEncodingException("Invalid lattice dimensions")
    d = k_dim * math.ceil(math.log2(q))
    expected = header + 4 * k_dim * 2 * d
    if len(data) != expected:
        raise MalformedEncodingException(
            f"Lattice params must be {expected} bytes, got {len(data)}"
        )
    matrix = np.frombuffer(data[header:], dtype="<u4").astype(np.int64)
    return LatticeParams(matrix.reshape(k_dim, 2 * d), q)


class LatticeVC(VectorCommitment):
    """Lattice tree behind the common interface.

    ``mode`` "no-info" publishes nothing; holders recompute every changed
    proof node from the batch.
    """

    name = "lattice"

    def __init__(self, params: LatticeParams, nu=0.5, mode: str = "structured"):
        if mode not in ("structured", "no-info"):
            raise InvalidParameterException(f"Unknown lattice update mode {mode}")
        self.params = params
        self.nu = nu
        self.mode = mode
        self.last_counters = None

    @classmethod
    def setup(cls, n: int, seed: int, **kwargs):
        return cls(LatticeParams.generate(seed, height=tree_height(n)), **kwargs)

    def commit(self, messages):
        return commit(messages, self.params)

    def open(self, aux, index):
        return open(aux, index)

    def verify(self, commitment, message, index, proof):
        return proof.index == index and verify(commitment, message, proof, self.params)

    def update(self, aux, batch):
        nu = 0 if self.mode == "no-info" else self.nu
        root, update_info, new_tree, counters = engine.structure_update_info(
            aux, batch, nu
        )
        self.last_counters = counters
        return root, update_info, new_tree

    def proof_update(self, proof, index, batch, update_info, counter=None):
        nu = 0 if self.mode == "no-info" else self.nu
        return engine.proof_update(
            self.params, proof, batch, update_info, nu, counter=counter
        )

    def proof_equal(self, a, b) -> bool:
        return a.equals(b)

    def random_message(self, rng) -> int:
        return rng.getrandbits(self.params.message_bits)
