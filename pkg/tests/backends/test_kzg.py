import random

from py_ecc.optimized_bls12_381 import G1, add, eq
import pytest

from vcstack.api.exceptions import IndexOutOfRangeException, InvalidParameterException
from vcstack.backends import kzg
from vcstack.backends.kzg import KzgVC, LagrangeTable
from vcstack.crypto.pairing import commit_poly
from vcstack.crypto.polynomial import interpolate
from tests.backends.fixtures.fixtures import (
    kzg_setup,
    random_update_round,
    scalar_batch,
    scalars,
)


def test_commitment_is_the_interpolant():
    srs, table = kzg_setup(4)
    messages = scalars(4, 1)
    commitment, _ = kzg.commit(messages, table)
    assert eq(commitment, commit_poly(srs, interpolate(messages)))

    slow = LagrangeTable(srs.without_trapdoor(), 4)
    slow_commitment, slow_state = kzg.commit(messages, slow)
    _, state = kzg.commit(messages, table)
    assert eq(slow_commitment, commitment)
    assert eq(kzg.open(slow_state, 2, slow), kzg.open(state, 2, table))


def test_open_and_verify():
    srs, table = kzg_setup(4)
    messages = scalars(4, 2)
    commitment, state = kzg.commit(messages, table)
    proof = kzg.open(state, 3, table)
    assert kzg.verify(srs, commitment, messages[3], 3, proof)
    assert not kzg.verify(srs, commitment, messages[3], 2, proof)
    assert not kzg.verify(srs, commitment, messages[3] + 1, 3, proof)


def test_update_and_proof_update():
    vc = KzgVC(*kzg_setup(8))
    messages = scalars(8, 3)
    _, state = vc.commit(messages)
    batch = scalar_batch(messages, [1, 4, 6], 4)

    commitment, update_info, new_state = vc.update(state, batch)
    assert len(update_info) == 0
    assert eq(commitment, vc.commit(batch.apply(messages))[0])

    new_messages = batch.apply(messages)
    for index in (1, 2):
        updated = vc.proof_update(vc.open(state, index), index, batch, update_info)
        assert vc.proof_equal(updated, vc.open(new_state, index))
        assert vc.verify(commitment, new_messages[index], index, updated)


def test_table_limit_computes_proofs_on_demand():
    srs, table = kzg_setup(4)
    lazy = LagrangeTable(srs, 4, table_limit=2)
    assert table.materialized
    assert not lazy.materialized
    assert eq(lazy.proof(1, 3), table.proof(1, 3))


def test_errors():
    srs, table = kzg_setup(4)
    with pytest.raises(InvalidParameterException):
        kzg.commit([1, 2, 3], table)
    with pytest.raises(IndexOutOfRangeException):
        table.proof(0, 4)
    with pytest.raises(InvalidParameterException):
        LagrangeTable(srs, 8)


def check_random_update(rng, trial):
    n = rng.choice((2, 4, 8))
    vc = KzgVC(*kzg_setup(n))
    update = random_update_round(vc, n, rng)
    assert len(update.update_info) == 0
    for index, proof in update.refreshed.items():
        context = f"trial {trial}: N={n} k={update.batch.k} index={index}"
        assert vc.proof_equal(proof, update.fresh[index]), context
        # one exponentiation per update, whatever N is
        assert update.counters[index].exps == update.batch.k, context


def check_random_tamper(rng, trial):
    n = rng.choice((2, 4, 8))
    vc = KzgVC(*kzg_setup(n))
    messages = scalars(n, rng.randrange(2**32))
    commitment, state = vc.commit(messages)
    index = rng.randrange(n)
    proof = add(vc.open(state, index), G1)
    assert not vc.verify(commitment, messages[index], index, proof), trial


def test_random_proof_updates():
    rng = random.Random(51)
    for trial in range(5):
        check_random_update(rng, trial)


def test_random_tampered_proofs():
    rng = random.Random(52)
    for trial in range(2):
        check_random_tamper(rng, trial)


@pytest.mark.slow
def test_random_proof_updates_at_scale():
    rng = random.Random(53)
    for trial in range(200):
        check_random_update(rng, trial)


@pytest.mark.slow
def test_random_tampered_proofs_at_scale():
    rng = random.Random(54)
    for trial in range(100):
        check_random_tamper(rng, trial)
