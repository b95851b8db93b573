"""c-ary Verkle tree with KZG nodes and an aggregated path proof.

Each inner node commits to the hashes of its c children: the child
commitment hash for inner levels, the message hash at the last level. A
proof for leaf x is the h-1 commitments below the root on x's path plus a
two-element multiproof (D, pi') aggregating the per-level openings.

U carries the changed inner commitments, root included. Leaves are not
published; holders rehash changed messages from the batch. A batch of k
updates publishes at most k * h entries: c=2, N=4, k=1 gives the
root and one bottom node.
"""

from dataclasses import dataclass
import logging
import struct
from typing import Dict, List, Optional, Sequence, Tuple

from py_ecc.optimized_bls12_381 import G1, G2, Z1, add, eq, neg

from vcstack.api.exceptions import (
    IndexOutOfRangeException,
    InvalidParameterException,
    InvalidShapeException,
    MalformedEncodingException,
)
from vcstack.api.interface import VectorCommitment
from vcstack.backends.kzg import LagrangeTable
from vcstack.crypto.pairing import (
    G1_BYTES,
    Srs,
    g1_from_bytes,
    g1_to_bytes,
    mul,
    pairing_check,
    trusted_setup,
)
from vcstack.crypto.polynomial import P, Scalar, inv
from vcstack.crypto.transcript import Transcript, hash_message, hash_point
from vcstack.schemas import (
    BackendId,
    NodePath,
    OpCounter,
    UpdateBatch,
    UpdateInfo,
    tree_height,
)

logger = logging.getLogger(__name__)

SUPPORTED_ARITIES = (2, 4, 16, 64, 256)
# Larger arities compute pi_{i,j} on demand.
TABLE_LIMIT = 16


class VerkleParams:
    def __init__(self, arity: int, srs: Srs, table_limit: int = TABLE_LIMIT):
        if arity < 2 or arity & (arity - 1):
            raise InvalidParameterException(
                f"Arity must be a power of two, got {arity}"
            )
        self.arity = arity
        self.srs = srs
        self.table = LagrangeTable(srs, arity, table_limit)

    @property
    def backend_id(self) -> int:
        return BackendId.verkle(self.arity)

    @classmethod
    def setup(cls, arity: int, seed: bytes, insecure_debug: bool = False):
        srs = trusted_setup(arity - 1, seed, insecure_debug=insecure_debug)
        return cls(arity, srs)


@dataclass(frozen=True)
class VerkleTree:
    arity: int
    height: int
    messages: Tuple[int, ...]
    # Inner node commitments, depths 0..h-1.
    commitments: Dict[NodePath, tuple]

    @property
    def root(self) -> tuple:
        return self.commitments[NodePath.root(self.arity)]

    @property
    def n(self) -> int:
        return len(self.messages)

    def child_hash(self, path: NodePath) -> Scalar:
        """H(C) of an inner child, H(m) of a leaf."""
        if path.depth == self.height:
            return hash_message(self.messages[path.range(self.height).start])
        return hash_point(self.commitments[path])

    def child_hashes(self, path: NodePath) -> List[Scalar]:
        return [self.child_hash(c) for c in path.children()]


def _points_equal(a: Sequence[tuple], b: Sequence[tuple]) -> bool:
    return len(a) == len(b) and all(eq(x, y) for x, y in zip(a, b))


@dataclass(frozen=True)
class VerkleProof:
    """(C_1 .. C_{h-1}, D, pi') for one leaf."""

    height: int
    path_commitments: Tuple[tuple, ...]
    d: tuple
    pi: tuple

    def equals(self, other: "VerkleProof") -> bool:
        return (
            self.height == other.height
            and len(self.path_commitments) == len(other.path_commitments)
            and _points_equal(self.path_commitments, other.path_commitments)
            and eq(self.d, other.d)
            and eq(self.pi, other.pi)
        )


@dataclass(frozen=True)
class ProofContext:
    """What a proof holder keeps beside the proof to refresh it.

    ``level_proofs[j]`` opens the depth-j node on x's path at x's digit.
    ``siblings[j]`` are the c child commitments of that node for j < h-1.
    """

    index: int
    message: int
    root: tuple
    level_proofs: Tuple[tuple, ...]
    siblings: Tuple[Tuple[tuple, ...], ...]

    def equals(self, other: "ProofContext") -> bool:
        return (
            self.index == other.index
            and self.message == other.message
            and eq(self.root, other.root)
            and _points_equal(self.level_proofs, other.level_proofs)
            and len(self.siblings) == len(other.siblings)
            and all(_points_equal(a, b) for a, b in zip(self.siblings, other.siblings))
        )


@dataclass(frozen=True)
class VerkleOpening:
    proof: VerkleProof
    context: ProofContext


def _leaf(arity: int, index: int, height: int) -> NodePath:
    return NodePath.from_index(index, height, arity)


def _challenges(
    commitments: Sequence[tuple], ys: Sequence[Scalar], digits: Sequence[int]
) -> Scalar:
    transcript = Transcript()
    for c in commitments:
        transcript.append_point(c)
    for y in ys:
        transcript.append_scalar(y)
    for b in digits:
        transcript.append_scalar(b)
    return transcript.challenge()


def _evaluation_point(r: Scalar, d: tuple) -> Scalar:
    return Transcript().append_scalar(r).append_point(d).challenge()


def _weights(r: Scalar, t: Scalar, digits: Sequence[int]) -> List[Scalar]:
    """r^j / (t - b_j) for every level j."""
    out = []
    power = 1
    for b in digits:
        if (t - b) % P == 0:
            raise InvalidParameterException("Evaluation point collides with a digit")
        out.append(power * inv(t - b) % P)
        power = power * r % P
    return out


def _aggregate(
    commitments: Sequence[tuple],
    ys: Sequence[Scalar],
    digits: Sequence[int],
    level_proofs: Sequence[tuple],
    counter: Optional[OpCounter] = None,
) -> Tuple[tuple, tuple]:
    """Multiproof (D, pi') from the per-level openings. 2h exponentiations."""
    r = _challenges(commitments, ys, digits)
    d = Z1
    power = 1
    for proof in level_proofs:
        d = add(d, mul(proof, power))
        power = power * r % P
    t = _evaluation_point(r, d)
    pi = Z1
    for w, proof in zip(_weights(r, t, digits), level_proofs):
        pi = add(pi, mul(proof, w))
    if counter is not None:
        counter.exp(2 * len(level_proofs))
    return d, pi


def commit(messages: Sequence[int], params: VerkleParams) -> Tuple[tuple, VerkleTree]:
    c = params.arity
    h = tree_height(len(messages), c)
    if h < 1:
        raise InvalidShapeException(f"A Verkle tree needs at least {c} messages")
    values = tuple(m % P for m in messages)
    tree = VerkleTree(c, h, values, {})
    for depth in range(h - 1, -1, -1):
        for start in range(c**depth):
            path = NodePath.from_index(start, depth, c)
            values_at = tree.child_hashes(path)
            tree.commitments[path] = params.table.commit_values(values_at)
    logger.debug(f"Committed Verkle tree c={c}, h={h}, {len(tree.commitments)} nodes")
    return tree.root, tree


def open(tree: VerkleTree, index: int, params: VerkleParams) -> VerkleOpening:
    if not 0 <= index < tree.n:
        raise IndexOutOfRangeException(f"Index {index} out of range for N={tree.n}")
    h = tree.height
    leaf = _leaf(tree.arity, index, h)
    level_proofs = []
    for j in range(h):
        node = leaf.prefix(j)
        level_proofs.append(
            params.table.open_values(tree.child_hashes(node), leaf.digits[j])
        )
    siblings = tuple(
        tuple(tree.commitments[c] for c in leaf.prefix(j).children())
        for j in range(h - 1)
    )
    context = ProofContext(
        index, tree.messages[index], tree.root, tuple(level_proofs), siblings
    )
    return VerkleOpening(_assemble(context, params), context)


def _assemble(
    context: ProofContext, params: VerkleParams, counter: Optional[OpCounter] = None
) -> VerkleProof:
    h = len(context.level_proofs)
    digits = _leaf(params.arity, context.index, h).digits
    path = tuple(context.siblings[j][digits[j]] for j in range(h - 1))
    ys = [hash_point(c) for c in path] + [hash_message(context.message)]
    d, pi = _aggregate(
        (context.root,) + path, ys, digits, context.level_proofs, counter
    )
    return VerkleProof(h, path, d, pi)


def verify(
    root: tuple,
    message: int,
    index: int,
    proof: VerkleProof,
    params: VerkleParams,
    counter: Optional[OpCounter] = None,
) -> bool:
    h = proof.height
    c = params.arity
    if h < 1 or len(proof.path_commitments) != h - 1 or not 0 <= index < c**h:
        return False
    digits = _leaf(c, index, h).digits
    commitments = (root,) + tuple(proof.path_commitments)
    ys = [hash_point(p) for p in proof.path_commitments] + [hash_message(message)]
    r = _challenges(commitments, ys, digits)
    t = _evaluation_point(r, proof.d)
    try:
        weights = _weights(r, t, digits)
    except InvalidParameterException:
        return False
    e = Z1
    y = 0
    for w, commitment, value in zip(weights, commitments, ys):
        e = add(e, mul(commitment, w))
        y = (y + w * value) % P
    if counter is not None:
        counter.exp(h + 1)
    lhs = add(add(e, neg(proof.d)), neg(mul(G1, y)))
    shifted = add(params.srs.g2_power(1), neg(mul(G2, t)))
    return pairing_check([(lhs, G2), (neg(proof.pi), shifted)])


def update(
    tree: VerkleTree,
    batch: UpdateBatch,
    params: VerkleParams,
    counter: Optional[OpCounter] = None,
) -> Tuple[tuple, UpdateInfo, VerkleTree]:
    """Refresh every inner node over an updated leaf; U holds all of them."""
    batch.validate(tree.n)
    c, h = tree.arity, tree.height
    new_messages = tuple(m % P for m in batch.apply(tree.messages))
    new_tree = VerkleTree(c, h, new_messages, dict(tree.commitments))

    # delta of each changed child hash, keyed by child path
    deltas: Dict[NodePath, Scalar] = {}
    for u in batch:
        deltas[_leaf(c, u.index, h)] = (hash_message(u.new) - hash_message(u.old)) % P

    published: Dict[NodePath, bytes] = {}
    for depth in range(h - 1, -1, -1):
        parents: Dict[NodePath, tuple] = {}
        for child, delta in sorted(deltas.items()):
            if delta == 0:
                continue
            parent = child.parent()
            base = parents.get(parent, new_tree.commitments[parent])
            basis = params.table.commitment(child.digits[-1])
            parents[parent] = add(base, mul(basis, delta))
            if counter is not None:
                counter.exp()
        deltas = {}
        for parent, value in parents.items():
            old = new_tree.commitments[parent]
            new_tree.commitments[parent] = value
            published[parent] = g1_to_bytes(value)
            deltas[parent] = (hash_point(value) - hash_point(old)) % P

    update_info = UpdateInfo.from_nodes(params.backend_id, h, published)
    logger.debug(f"Verkle update of k={batch.k}: {len(published)} nodes published")
    return new_tree.root, update_info, new_tree


def proof_update(
    opening: VerkleOpening,
    batch: UpdateBatch,
    update_info: UpdateInfo,
    params: VerkleParams,
    counter: Optional[OpCounter] = None,
) -> VerkleOpening:
    """Refresh a proof and its context from U and the batch.

    Each changed child of a path node adds (H(C') - H(C)) * pi_{i,b} to that
    level's opening; the last level uses message hashes from the batch.
    """
    ctx = opening.context
    c = params.arity
    h = len(ctx.level_proofs)
    leaf = _leaf(c, ctx.index, h)

    def published(path: NodePath, old: tuple) -> tuple:
        data = update_info.lookup(path)
        return old if data is None else g1_from_bytes(data)

    level_proofs = list(ctx.level_proofs)
    siblings = []
    for j in range(h - 1):
        node = leaf.prefix(j)
        row = []
        for i, child in enumerate(node.children()):
            old = ctx.siblings[j][i]
            new = published(child, old)
            row.append(new)
            delta = (hash_point(new) - hash_point(old)) % P
            if delta:
                level_proofs[j] = add(
                    level_proofs[j], mul(params.table.proof(i, leaf.digits[j]), delta)
                )
                if counter is not None:
                    counter.exp()
        siblings.append(tuple(row))

    last = leaf.prefix(h - 1)
    for u in batch.under(last, h):
        delta = (hash_message(u.new) - hash_message(u.old)) % P
        if delta == 0:
            continue
        i = u.index % c
        level_proofs[h - 1] = add(
            level_proofs[h - 1], mul(params.table.proof(i, leaf.digits[h - 1]), delta)
        )
        if counter is not None:
            counter.exp()

    update = batch.get(ctx.index)
    context = ProofContext(
        ctx.index,
        ctx.message if update is None else update.new % P,
        published(NodePath.root(c), ctx.root),
        tuple(level_proofs),
        tuple(siblings),
    )
    return VerkleOpening(_assemble(context, params, counter), context)


def proof_size(height: int) -> int:
    """Encoded proof bytes: a height byte and h+1 group elements."""
    return 1 + (height + 1) * G1_BYTES


def proof_size_with_message(height: int) -> int:
    """Group elements plus the leaf message (32 B) and its hash (48 B)."""
    return (height + 1) * G1_BYTES + 32 + G1_BYTES


def encode_proof(proof: VerkleProof) -> bytes:
    out = bytearray(struct.pack("<B", proof.height))
    for point in proof.path_commitments + (proof.d, proof.pi):
        out += g1_to_bytes(point)
    return bytes(out)


def decode_proof(data: bytes) -> VerkleProof:
    if not data:
        raise MalformedEncodingException("Empty Verkle proof")
    height = data[0]
    if height < 1 or len(data) != proof_size(height):
        raise MalformedEncodingException(
            f"Verkle proof of {len(data)} bytes does not match height {height}"
        )
    points = [
        g1_from_bytes(data[1 + i * G1_BYTES : 1 + (i + 1) * G1_BYTES])
        for i in range(height + 1)
    ]
    return VerkleProof(height, tuple(points[:-2]), points[-2], points[-1])


class VerkleVC(VectorCommitment):
    name = "verkle"

    def __init__(self, params: VerkleParams):
        self.params = params

    @classmethod
    def setup(cls, n: int, seed: bytes, arity: int = 16, insecure_debug: bool = False):
        tree_height(n, arity)
        return cls(VerkleParams.setup(arity, seed, insecure_debug))

    def commit(self, messages):
        return commit(messages, self.params)

    def open(self, aux, index):
        return open(aux, index, self.params)

    def verify(self, commitment, message, index, proof):
        if isinstance(proof, VerkleOpening):
            proof = proof.proof
        return verify(commitment, message, index, proof, self.params)

    def update(self, aux, batch):
        return update(aux, batch, self.params)

    def proof_update(self, proof, index, batch, update_info, counter=None):
        if proof.context.index != index:
            raise InvalidParameterException(
                f"Proof context is for index {proof.context.index}, not {index}"
            )
        return proof_update(proof, batch, update_info, self.params, counter)

    def proof_equal(self, a, b) -> bool:
        return a.proof.equals(b.proof) and a.context.equals(b.context)

    def random_message(self, rng) -> int:
        return rng.randrange(P)
