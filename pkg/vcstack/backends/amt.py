"""Authenticated multipoint evaluation tree (AMT).

Each node at path b holds [q_b(X)], the quotient of dividing the parent's
remainder by the vanishing polynomial V_b of range(b). Leaf remainders are the
messages, so phi(X) = sum_j q_j(X) V_j(X) + m_i along the path of i. Nodes are
linear in the messages: u_b = prod_i (u^i_b)^(m_i), where u^i is the AMT of
the Lagrange basis L_i. Those per-basis trees are the public parameters.
"""

from dataclasses import dataclass
import logging
import struct
import threading
from typing import Dict, List, Optional, Sequence, Tuple

from py_ecc.optimized_bls12_381 import G1, G2, Z1, add, eq, is_inf, neg

from vcstack.api.exceptions import (
    InvalidParameterException,
    MalformedEncodingException,
)
from vcstack.api.interface import (
    HomomorphicProof,
    HomomorphicScheme,
    HomomorphicTree,
    VectorCommitment,
)
from vcstack.crypto.pairing import (
    G1_BYTES,
    G2_BYTES,
    Srs,
    commit_poly,
    commit_poly_g2,
    g1_from_bytes,
    g1_to_bytes,
    g2_from_bytes,
    g2_to_bytes,
    mul,
    pairing_check,
    trusted_setup,
)
from vcstack.crypto.polynomial import (
    P,
    DensePolynomial,
    Scalar,
    batch_inverse,
    interpolate,
    inv,
    lagrange_basis,
    range_denominator,
)
from vcstack.schemas import (
    BackendId,
    NodePath,
    OpCounter,
    UpdateBatch,
    UpdateInfo,
    tree_height,
)
from vcstack.schemas.update_info import pack_digits, unpack_digits
from vcstack.sublinear import engine

logger = logging.getLogger(__name__)

PARAMS_MAGIC = b"SVCAMT01"


def amt_setup(n: int, seed: bytes, insecure_debug: bool = False) -> Srs:
    """SRS with G1 powers for phi and G2 powers for every vanishing polynomial."""
    tree_height(n)
    return trusted_setup(max(n, 1), seed, g2_degree=n, insecure_debug=insecure_debug)


def all_paths(height: int) -> List[NodePath]:
    return [
        NodePath.from_index(pos, depth)
        for depth in range(height + 1)
        for pos in range(2**depth)
    ]


def _position(path: NodePath) -> int:
    pos = 0
    for d in path.digits:
        pos = pos * 2 + d
    return pos


class LagrangeAmtParams(HomomorphicScheme):
    """Sparse AMTs of every Lagrange basis L_i plus [V_b]_2 for every path.

    Per-basis trees are built on first use and cached. With a trapdoor SRS the
    quotients are evaluated at tau in closed form; otherwise they come from
    polynomial division and a multi-scalar multiplication.
    """

    backend_id = BackendId.AMT
    locality = 1
    arity = 2

    def __init__(self, n: int, srs: Optional[Srs] = None):
        self.n = n
        self.height = tree_height(n)
        self.srs = srs
        if srs is not None and (srs.degree < max(n - 1, 1) or srs.g2_degree < n):
            raise InvalidParameterException(
                f"SRS (G1 degree {srs.degree}, G2 degree {srs.g2_degree}) "
                f"too small for an AMT over N={n}"
            )
        self._lock = threading.Lock()
        self._basis: Dict[int, Dict[NodePath, tuple]] = {}
        self._vanishing_g2: Dict[NodePath, tuple] = {}
        self._lagrange: Dict[int, tuple] = {}
        self._v_tau: Optional[List[List[Scalar]]] = None
        if srs is not None and srs.tau is not None:
            self._v_tau = self._vanishing_at_tau(srs.tau)

    @property
    def trapdoor(self) -> Optional[int]:
        return self.srs.tau if self.srs is not None else None

    def _vanishing_at_tau(self, tau: int) -> List[List[Scalar]]:
        # levels[j][pos] = V_b(tau) for the node at depth j, position pos
        levels = [[(tau - i) % P for i in range(self.n)]]
        for _ in range(self.height):
            below = levels[0]
            levels.insert(
                0,
                [below[2 * k] * below[2 * k + 1] % P for k in range(len(below) // 2)],
            )
        return levels

    def vanishing_at_tau(self, path: NodePath) -> Scalar:
        return self._v_tau[path.depth][_position(path)]

    def vanishing_poly(self, path: NodePath) -> DensePolynomial:
        return DensePolynomial.vanishing(path.range(self.height))

    def vanishing_commitment(self, path: NodePath):
        """[V_b(X)] in G2."""
        cached = self._vanishing_g2.get(path)
        if cached is not None:
            return cached
        if self.srs is None:
            raise InvalidParameterException(f"No vanishing commitment for {path}")
        if self._v_tau is not None:
            value = mul(G2, self.vanishing_at_tau(path))
        else:
            value = commit_poly_g2(self.srs, self.vanishing_poly(path))
        self._vanishing_g2[path] = value
        return value

    def lagrange_commitment(self, index: int):
        """[L_i(X)] in G1."""
        cached = self._lagrange.get(index)
        if cached is not None:
            return cached
        if self.srs is None:
            raise InvalidParameterException(f"No Lagrange commitment for {index}")
        if self._v_tau is not None:
            tau = self.srs.tau
            denominator = (tau - index) * range_denominator(0, self.n, index)
            point = mul(G1, self._v_tau[0][0] * inv(denominator))
        else:
            point = commit_poly(self.srs, lagrange_basis(self.n, index))
        self._lagrange[index] = point
        return point

    def basis_nodes(self, index: int) -> Dict[NodePath, tuple]:
        """Non-identity nodes of the AMT of L_index (at most 2h of them)."""
        nodes = self._basis.get(index)
        if nodes is not None:
            return nodes
        if not 0 <= index < self.n:
            raise InvalidParameterException(f"Basis index {index} out of range")
        if self.srs is None:
            raise InvalidParameterException(f"Basis tree {index} was not loaded")
        if self._v_tau is not None:
            nodes = self._basis_at_tau(index)
        else:
            unit = [0] * self.n
            unit[index] = 1
            quotients = _quotient_polynomials(unit, self.height)
            nodes = _commit_quotients(self.srs, quotients)
        with self._lock:
            self._basis[index] = nodes
        return nodes

    def _basis_at_tau(self, index: int) -> Dict[NodePath, tuple]:
        tau = self.srs.tau
        leaf = NodePath.from_index(index, self.height)
        inv_ti = inv(tau - index)

        def local_lagrange(path: NodePath) -> Scalar:
            r = path.range(self.height)
            denominator = range_denominator(r.start, r.stop, index)
            return self.vanishing_at_tau(path) * inv_ti * inv(denominator) % P

        nodes = {}
        r_parent = local_lagrange(leaf.prefix(0))
        for depth in range(self.height):
            parent = leaf.prefix(depth)
            r_next = r_parent
            for digit in (0, 1):
                child = parent.child(digit)
                r_child = local_lagrange(child) if digit == leaf.digits[depth] else 0
                q = (r_parent - r_child) * inv(self.vanishing_at_tau(child)) % P
                if q:
                    nodes[child] = mul(G1, q)
                if digit == leaf.digits[depth]:
                    r_next = r_child
            r_parent = r_next
        return nodes

    def basis_node(self, index: int, path: NodePath):
        return self.basis_nodes(index).get(path, Z1)

    def precompute(self) -> "LagrangeAmtParams":
        for i in range(self.n):
            self.basis_nodes(i)
            self.lagrange_commitment(i)
        for path in all_paths(self.height):
            self.vanishing_commitment(path)
        return self

    # HomomorphicScheme

    def identity(self):
        return Z1

    def combine(self, a, b):
        return add(a, b)

    def partial_delta(self, index, path, old, new, counter=None):
        base = self.basis_node(index, path)
        delta = (new - old) % P
        if delta == 0 or is_inf(base):
            return Z1
        if counter is not None:
            counter.exp()
        return mul(base, delta)

    def encode_node(self, value) -> bytes:
        return g1_to_bytes(value)

    def decode_node(self, data: bytes):
        return g1_from_bytes(data)


def _quotient_polynomials(
    values: Sequence[int], height: int
) -> Dict[NodePath, DensePolynomial]:
    """Recursive division of the interpolant of ``values``."""
    phi = interpolate(values)
    quotients: Dict[NodePath, DensePolynomial] = {}
    remainders = {NodePath.root(): phi}
    root_v = DensePolynomial.vanishing(range(len(values)))
    quotients[NodePath.root()], remainders[NodePath.root()] = phi.divmod(root_v)
    for depth in range(height):
        for pos in range(2**depth):
            parent = NodePath.from_index(pos, depth)
            r_parent = remainders.pop(parent)
            for child in parent.children():
                v = DensePolynomial.vanishing(child.range(height))
                quotients[child], remainders[child] = r_parent.divmod(v)
    return quotients


def _commit_quotients(
    srs: Srs, quotients: Dict[NodePath, DensePolynomial]
) -> Dict[NodePath, tuple]:
    return {
        path: commit_poly(srs, q, use_trapdoor=False)
        for path, q in quotients.items()
        if not q.is_zero()
    }


@dataclass(frozen=True)
class AmtTree(HomomorphicTree):
    scheme: LagrangeAmtParams
    vc: tuple
    messages: Tuple[Scalar, ...]
    # missing paths hold the identity
    nodes: Dict[NodePath, tuple]

    @property
    def height(self) -> int:
        return self.scheme.height

    @property
    def commitment(self):
        return self.vc

    def node(self, path: NodePath):
        return self.nodes.get(path, Z1)

    def with_updates(self, nodes, batch: UpdateBatch) -> "AmtTree":
        merged = dict(self.nodes)
        for path, value in nodes.items():
            if eq(value, Z1):
                merged.pop(path, None)
            else:
                merged[path] = value
        vc = self.vc
        for u in batch:
            vc = add(vc, mul(self.scheme.lagrange_commitment(u.index), u.new - u.old))
        messages = tuple(m % P for m in batch.apply(self.messages))
        return AmtTree(self.scheme, vc, messages, merged)


@dataclass(frozen=True)
class AmtProof(HomomorphicProof):
    n: int
    index: int
    # u at depths 0..h along the path of index
    nodes: Tuple[tuple, ...]

    @property
    def height(self) -> int:
        return len(self.nodes) - 1

    def node_paths(self) -> List[NodePath]:
        leaf = NodePath.from_index(self.index, self.height)
        return [leaf.prefix(j) for j in range(self.height + 1)]

    def node_values(self) -> List[tuple]:
        return list(self.nodes)

    def with_values(self, values) -> "AmtProof":
        return AmtProof(self.n, self.index, tuple(values))

    def equals(self, other: "AmtProof") -> bool:
        return (
            self.n == other.n
            and self.index == other.index
            and len(self.nodes) == len(other.nodes)
            and all(eq(a, b) for a, b in zip(self.nodes, other.nodes))
        )


def build(messages: Sequence[int], params: LagrangeAmtParams) -> AmtTree:
    if len(messages) != params.n:
        raise InvalidParameterException(
            f"Expected {params.n} messages, got {len(messages)}"
        )
    values = tuple(m % P for m in messages)
    if not any(values):
        return AmtTree(params, Z1, values, {})
    if params.srs is None:
        return _build_homomorphic(values, params)
    if params.trapdoor is not None:
        return _build_at_tau(values, params)
    quotients = _quotient_polynomials(values, params.height)
    nodes = _commit_quotients(params.srs, quotients)
    vc = commit_poly(params.srs, interpolate(values), use_trapdoor=False)
    return AmtTree(params, vc, values, nodes)


def _build_at_tau(values: Tuple[Scalar, ...], params: LagrangeAmtParams) -> AmtTree:
    tau = params.trapdoor
    h = params.height
    inv_t = batch_inverse([(tau - i) % P for i in range(params.n)])
    # remainders[depth][pos] = r_b(tau)
    remainders: List[List[Scalar]] = []
    for depth in range(h + 1):
        size = 2 ** (h - depth)
        level = []
        for pos in range(2**depth):
            start = pos * size
            acc = 0
            for i in range(start, start + size):
                if values[i]:
                    acc += (
                        values[i]
                        * inv_t[i]
                        * inv(range_denominator(start, start + size, i))
                    )
            level.append(params._v_tau[depth][pos] * acc % P)
        remainders.append(level)
    nodes = {}
    for depth in range(1, h + 1):
        for pos in range(2**depth):
            q = (remainders[depth - 1][pos // 2] - remainders[depth][pos]) % P
            q = q * inv(params._v_tau[depth][pos]) % P
            if q:
                nodes[NodePath.from_index(pos, depth)] = mul(G1, q)
    vc = mul(G1, remainders[0][0])
    return AmtTree(params, vc, values, nodes)


def _build_homomorphic(
    values: Tuple[Scalar, ...], params: LagrangeAmtParams
) -> AmtTree:
    nodes: Dict[NodePath, tuple] = {}
    vc = Z1
    for i, m in enumerate(values):
        if not m:
            continue
        vc = add(vc, mul(params.lagrange_commitment(i), m))
        for path, base in params.basis_nodes(i).items():
            nodes[path] = add(nodes.get(path, Z1), mul(base, m))
    return AmtTree(params, vc, values, nodes)


def open(tree: AmtTree, index: int) -> AmtProof:
    if not 0 <= index < tree.scheme.n:
        raise InvalidParameterException(f"Index {index} out of range")
    leaf = NodePath.from_index(index, tree.height)
    return AmtProof(
        tree.scheme.n,
        index,
        tuple(tree.node(leaf.prefix(j)) for j in range(tree.height + 1)),
    )


def verify(
    commitment, message: int, proof: AmtProof, params: LagrangeAmtParams
) -> bool:
    """e(C, g) == e(g^m, g) * prod_j e(u_j, [V_j])."""
    if proof.n != params.n or len(proof.nodes) != params.height + 1:
        return False
    if not 0 <= proof.index < params.n:
        return False
    pairs = [(add(commitment, neg(mul(G1, message))), G2)]
    for path, node in zip(proof.node_paths(), proof.nodes):
        pairs.append((neg(node), params.vanishing_commitment(path)))
    return pairing_check(pairs)


def partial_digest(
    params: LagrangeAmtParams,
    index: int,
    depth: int,
    child: Optional[int],
    delta: int,
    counter: Optional[OpCounter] = None,
):
    """h_{i,j,c}(delta): the contribution of message i to node (path(i)[:j-1], c)."""
    if not 0 <= index < params.n:
        raise InvalidParameterException(f"Index {index} out of range")
    if not 0 <= depth <= params.height:
        raise InvalidParameterException(f"Depth {depth} out of range")
    if depth == 0:
        if child is not None:
            raise InvalidParameterException("The root takes no child bit")
        return Z1
    if child not in (0, 1):
        raise InvalidParameterException(f"Child bit must be 0 or 1, got {child}")
    path = NodePath.from_index(index, params.height).prefix(depth - 1).child(child)
    return params.partial_delta(index, path, 0, delta, counter)


def proof_update_no_info(
    proof: AmtProof,
    batch: UpdateBatch,
    params: LagrangeAmtParams,
    counter: Optional[OpCounter] = None,
) -> AmtProof:
    """Refresh a proof from the batch alone. U is empty in this mode."""
    values = list(proof.nodes)
    for j, path in enumerate(proof.node_paths()):
        for u in batch.under(path.parent(), params.height):
            values[j] = add(
                values[j], params.partial_delta(u.index, path, u.old, u.new, counter)
            )
            if counter is not None:
                counter.digest()
    return AmtProof(proof.n, proof.index, tuple(values))


def encode_params(params: LagrangeAmtParams) -> bytes:
    params.precompute()
    out = bytearray(PARAMS_MAGIC)
    out += struct.pack("<I", params.n)
    for i in range(params.n):
        nodes = params.basis_nodes(i)
        out += struct.pack("<H", len(nodes))
        for path in sorted(nodes):
            out += struct.pack("<B", path.depth)
            out += pack_digits(path.digits, 1)
            out += g1_to_bytes(nodes[path])
    for path in all_paths(params.height):
        out += g2_to_bytes(params.vanishing_commitment(path))
    for i in range(params.n):
        out += g1_to_bytes(params.lagrange_commitment(i))
    return bytes(out)


def decode_params(data: bytes) -> LagrangeAmtParams:
    if data[: len(PARAMS_MAGIC)] != PARAMS_MAGIC:
        raise MalformedEncodingException("Bad AMT params magic")
    offset = len(PARAMS_MAGIC)
    try:
        (n,) = struct.unpack_from("<I", data, offset)
        offset += 4
        params = LagrangeAmtParams(n)
        for i in range(n):
            (count,) = struct.unpack_from("<H", data, offset)
            offset += 2
            nodes = {}
            for _ in range(count):
                (depth,) = struct.unpack_from("<B", data, offset)
                offset += 1
                nbytes = (depth + 7) // 8
                digits = unpack_digits(data[offset : offset + nbytes], depth, 1)
                offset += nbytes
                nodes[NodePath(digits)] = g1_from_bytes(
                    data[offset : offset + G1_BYTES]
                )
                offset += G1_BYTES
            params._basis[i] = nodes
        for path in all_paths(params.height):
            params._vanishing_g2[path] = g2_from_bytes(data[offset : offset + G2_BYTES])
            offset += G2_BYTES
        for i in range(n):
            params._lagrange[i] = g1_from_bytes(data[offset : offset + G1_BYTES])
            offset += G1_BYTES
    except struct.error as e:
        raise MalformedEncodingException(f"Truncated AMT params: {e}")
    if offset != len(data):
        raise MalformedEncodingException("Trailing bytes after AMT params")
    return params


class AmtVC(VectorCommitment):
    """AMT behind the common interface.

    ``mode`` is "structured" (U shaped by ``nu``) or "no-info" (U empty, every
    proof node refreshed from partial digests).
    """

    name = "amt"

    def __init__(self, params: LagrangeAmtParams, nu=0.5, mode: str = "structured"):
        if mode not in ("structured", "no-info"):
            raise InvalidParameterException(f"Unknown AMT update mode {mode}")
        self.params = params
        self.nu = nu
        self.mode = mode
        self.last_counters = None

    @classmethod
    def setup(cls, n: int, seed: bytes, insecure_debug: bool = False, **kwargs):
        return cls(LagrangeAmtParams(n, amt_setup(n, seed, insecure_debug)), **kwargs)

    def commit(self, messages):
        tree = build(messages, self.params)
        return tree.vc, tree

    def open(self, aux, index):
        return open(aux, index)

    def verify(self, commitment, message, index, proof):
        return proof.index == index and verify(commitment, message, proof, self.params)

    def update(self, aux, batch):
        if self.mode == "no-info":
            batch.validate(self.params.n)
            new_tree = aux.with_updates(engine.updated_nodes(aux, batch), batch)
            self.last_counters = None
            return new_tree.vc, UpdateInfo(BackendId.AMT, self.params.height), new_tree
        vc, update_info, new_tree, counters = engine.structure_update_info(
            aux, batch, self.nu
        )
        self.last_counters = counters
        return vc, update_info, new_tree

    def proof_update(self, proof, index, batch, update_info, counter=None):
        if self.mode == "no-info":
            return proof_update_no_info(proof, batch, self.params, counter)
        return engine.proof_update(
            self.params, proof, batch, update_info, self.nu, counter=counter
        )

    def proof_equal(self, a, b) -> bool:
        return a.equals(b)

    def random_message(self, rng) -> int:
        return rng.randrange(P)
