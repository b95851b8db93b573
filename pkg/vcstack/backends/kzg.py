from dataclasses import dataclass
import logging
from typing import List, Optional, Sequence, Tuple

from py_ecc.optimized_bls12_381 import G1, add, eq

from vcstack.api.exceptions import IndexOutOfRangeException, InvalidParameterException
from vcstack.api.interface import VectorCommitment
from vcstack.crypto.pairing import (
    Srs,
    commit_poly,
    msm,
    mul,
    open_poly,
    trusted_setup,
    verify_kzg,
)
from vcstack.crypto.polynomial import (
    P,
    Scalar,
    inv,
    lagrange_basis,
    lagrange_evaluations,
)
from vcstack.schemas import BackendId, OpCounter, UpdateBatch, UpdateInfo

logger = logging.getLogger(__name__)

DEFAULT_TABLE_LIMIT = 2**10


class LagrangeTable:
    """Commitments [L_i] and opening proofs pi_{i,j} of the Lagrange basis.

    The N x N proof matrix is materialized only up to ``table_limit``;
    larger domains compute pi_{i,j} on demand.
    """

    def __init__(self, srs: Srs, n: int, table_limit: int = DEFAULT_TABLE_LIMIT):
        if n < 1:
            raise InvalidParameterException("Domain size must be positive")
        if srs.degree < n - 1:
            raise InvalidParameterException(
                f"SRS degree {srs.degree} too small for domain size {n}"
            )
        self.srs = srs
        self.n = n
        self._basis_at_tau: Optional[List[Scalar]] = None
        if srs.tau is not None:
            self._basis_at_tau = lagrange_evaluations(0, n, srs.tau)
        self.commitments = [self._commit_basis(i) for i in range(n)]
        self.proofs: Optional[List[List[tuple]]] = None
        if n <= table_limit:
            self.proofs = [
                [self._compute_proof(i, j) for j in range(n)] for i in range(n)
            ]
        logger.debug(
            f"Lagrange table for N={n}, proof matrix "
            f"{'materialized' if self.proofs is not None else 'on demand'}"
        )

    @property
    def materialized(self) -> bool:
        return self.proofs is not None

    def _commit_basis(self, i: int):
        if self._basis_at_tau is not None:
            return mul(G1, self._basis_at_tau[i])
        return commit_poly(self.srs, lagrange_basis(self.n, i))

    def _compute_proof(self, i: int, j: int):
        if self._basis_at_tau is not None:
            value = self._basis_at_tau[i] - (1 if i == j else 0)
            return mul(G1, value * inv(self.srs.tau - j))
        _, proof = open_poly(self.srs, lagrange_basis(self.n, i), j)
        return proof

    def _check(self, i: int):
        if not 0 <= i < self.n:
            raise IndexOutOfRangeException(f"Index {i} out of range for N={self.n}")

    def commitment(self, i: int):
        self._check(i)
        return self.commitments[i]

    def proof(self, i: int, j: int):
        """pi_{i,j} = [(L_i(X) - L_i(j)) / (X - j)]."""
        self._check(i)
        self._check(j)
        if self.proofs is not None:
            return self.proofs[i][j]
        return self._compute_proof(i, j)

    def commit_values(self, values: Sequence[int]):
        """[sum_i v_i L_i(X)]."""
        if self._basis_at_tau is not None:
            acc = sum(v * b for v, b in zip(values, self._basis_at_tau)) % P
            return mul(G1, acc)
        return msm(self.commitments, values)

    def open_values(self, values: Sequence[int], j: int):
        """Opening proof of the interpolant of ``values`` at point j."""
        self._check(j)
        if self._basis_at_tau is not None:
            phi_tau = sum(v * b for v, b in zip(values, self._basis_at_tau))
            return mul(G1, (phi_tau - values[j]) * inv(self.srs.tau - j))
        return msm([self.proof(i, j) for i in range(self.n)], values)


def keygen(
    n: int,
    seed: bytes,
    insecure_debug: bool = False,
    table_limit: int = DEFAULT_TABLE_LIMIT,
) -> Tuple[Srs, LagrangeTable]:
    srs = trusted_setup(max(n - 1, 1), seed, insecure_debug=insecure_debug)
    return srs, LagrangeTable(srs, n, table_limit)


@dataclass(frozen=True)
class KzgVcState:
    commitment: tuple
    messages: Tuple[Scalar, ...]


def commit(messages: Sequence[int], table: LagrangeTable) -> Tuple[tuple, KzgVcState]:
    if len(messages) != table.n:
        raise InvalidParameterException(
            f"Expected {table.n} messages, got {len(messages)}"
        )
    values = tuple(m % P for m in messages)
    c = table.commit_values(values)
    return c, KzgVcState(c, values)


def open(state: KzgVcState, index: int, table: LagrangeTable):
    return table.open_values(state.messages, index)


def verify(srs: Srs, commitment, message: int, index: int, proof) -> bool:
    return verify_kzg(srs, commitment, index, message, proof)


def update(
    state: KzgVcState,
    batch: UpdateBatch,
    table: LagrangeTable,
    counter: Optional[OpCounter] = None,
) -> Tuple[tuple, UpdateInfo, KzgVcState]:
    """C' = C * prod [L_i]^(m'_i - m_i). No update information is produced."""
    batch.validate(table.n)
    c = state.commitment
    for u in batch:
        c = add(c, mul(table.commitment(u.index), u.new - u.old))
        if counter is not None:
            counter.exp()
    messages = tuple(m % P for m in batch.apply(state.messages))
    return c, UpdateInfo(BackendId.KZG, 0), KzgVcState(c, messages)


def proof_update(
    proof,
    index: int,
    batch: UpdateBatch,
    table: LagrangeTable,
    counter: Optional[OpCounter] = None,
):
    """pi'_x = pi_x * prod pi_{i,x}^(m'_i - m_i)."""
    acc = proof
    for u in batch:
        delta = (u.new - u.old) % P
        if delta == 0:
            continue
        acc = add(acc, mul(table.proof(u.index, index), delta))
        if counter is not None:
            counter.exp()
    return acc


class KzgVC(VectorCommitment):
    name = "kzg"

    def __init__(self, srs: Srs, table: LagrangeTable):
        self.srs = srs
        self.table = table

    @classmethod
    def setup(cls, n: int, seed: bytes, insecure_debug: bool = False, **kwargs):
        return cls(*keygen(n, seed, insecure_debug, **kwargs))

    def commit(self, messages):
        return commit(messages, self.table)

    def open(self, aux, index):
        return open(aux, index, self.table)

    def verify(self, commitment, message, index, proof):
        return verify(self.srs, commitment, message, index, proof)

    def update(self, aux, batch):
        return update(aux, batch, self.table)

    def proof_update(self, proof, index, batch, update_info, counter=None):
        return proof_update(proof, index, batch, self.table, counter)

    def proof_equal(self, a, b) -> bool:
        return eq(a, b)

    def random_message(self, rng) -> int:
        return rng.randrange(P)
