from dataclasses import dataclass, field
from functools import lru_cache
import random
from typing import Any, Dict, List, Optional

from vcstack.api.interface import VectorCommitment
from vcstack.backends.amt import LagrangeAmtParams, amt_setup
from vcstack.backends.kzg import keygen
from vcstack.backends.lattice import LatticeParams
from vcstack.backends.verkle import VerkleParams
from vcstack.crypto.polynomial import P
from vcstack.schemas import OpCounter, UpdateBatch, tree_height

SEED = b"backend-tests"

NU_CHOICES = ("0", "1/4", "1/3", "1/2", "2/3", "3/4", "1")


@lru_cache
def amt_params(n: int, trapdoor: bool = True) -> LagrangeAmtParams:
    srs = amt_setup(n, SEED, insecure_debug=True)
    if not trapdoor:
        srs = srs.without_trapdoor()
    return LagrangeAmtParams(n, srs)


@lru_cache
def kzg_setup(n: int):
    return keygen(n, SEED, insecure_debug=True)


@lru_cache
def verkle_params(arity: int) -> VerkleParams:
    return VerkleParams.setup(arity, SEED, insecure_debug=True)


def lattice_params(n: int) -> LatticeParams:
    return LatticeParams.generate(seed=1, height=tree_height(n))


def scalars(n: int, seed: int):
    rng = random.Random(seed)
    return [rng.randrange(P) for _ in range(n)]


def scalar_batch(messages, indices, seed: int) -> UpdateBatch:
    rng = random.Random(seed)
    return UpdateBatch.of([(i, messages[i], rng.randrange(P)) for i in indices])


@dataclass
class UpdateRound:
    """One random batch applied to a committed vector, with refreshed proofs."""

    batch: UpdateBatch
    update_info: Any
    commitment: Any
    new_messages: List[Any]
    refreshed: Dict[int, Any] = field(default_factory=dict)
    fresh: Dict[int, Any] = field(default_factory=dict)
    counters: Dict[int, OpCounter] = field(default_factory=dict)


def random_update_round(
    vc: VectorCommitment,
    n: int,
    rng: random.Random,
    users: int = 3,
    messages: Optional[List[Any]] = None,
) -> UpdateRound:
    if messages is None:
        messages = [vc.random_message(rng) for _ in range(n)]
    _, aux = vc.commit(messages)
    k = rng.randint(1, n)
    indices = sorted(rng.sample(range(n), k))
    batch = UpdateBatch.of((i, messages[i], vc.random_message(rng)) for i in indices)
    commitment, update_info, new_aux = vc.update(aux, batch)

    out = UpdateRound(batch, update_info, commitment, batch.apply(messages))
    # at least one holder whose own message changed
    holders = set(rng.sample(range(n), min(users, n))) | {indices[0]}
    for index in sorted(holders):
        counter = OpCounter()
        out.refreshed[index] = vc.proof_update(
            vc.open(aux, index), index, batch, update_info, counter
        )
        out.fresh[index] = vc.open(new_aux, index)
        out.counters[index] = counter
    return out
