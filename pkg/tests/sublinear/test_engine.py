from fractions import Fraction
import logging
import random

import pytest

from vcstack.api.exceptions import InvalidParameterException
from vcstack.schemas import NodePath, OpCounter, UpdateBatch, UpdateCounters
from vcstack.sublinear import engine
from vcstack.sublinear.engine import Threshold, TradeoffParam
from tests.sublinear.fixtures.fixtures import (
    LinearScheme,
    LinearTree,
    hand_batch,
    open_linear,
    random_instance,
)


def paths(*names):
    return [NodePath(tuple(int(c) for c in name)) for name in names]


def structure(height, locality, messages, batch, nu):
    tree = LinearTree.build(LinearScheme(height, locality), messages)
    return tree, engine.structure_update_info(tree, batch, nu)


def test_threshold_is_strict_and_exact():
    theta = Threshold(4, Fraction(1, 2))
    assert not theta.exceeds(2), "2 is not above sqrt(4)"
    assert theta.exceeds(3)

    theta = Threshold(460, Fraction(1, 2))
    assert not theta.exceeds(21)
    assert theta.exceeds(22)

    assert Threshold(0, Fraction(1, 2)).exceeds(1)
    assert not Threshold(0, Fraction(1, 2)).exceeds(0)


def test_tradeoff_param_parsing():
    assert TradeoffParam.of("1/2").nu == Fraction(1, 2)
    assert TradeoffParam.of(0.25).nu == Fraction(1, 4)
    assert TradeoffParam.of(0).nu == 0

    with pytest.raises(InvalidParameterException):
        TradeoffParam.of("3/2")
    with pytest.raises(InvalidParameterException):
        TradeoffParam.of(-0.1)


def test_hand_vector_locality_zero():
    _, (_, update_info, _, counters) = structure(
        3, 0, [0] * 8, hand_batch(), "1/2"
    )
    assert update_info.paths() == paths("", "0", "00")
    assert counters.published == 3
    assert counters.max_unpublished_count == 1


def test_hand_vector_locality_one():
    _, (_, update_info, _, _) = structure(3, 1, [0] * 8, hand_batch(), "1/2")
    assert update_info.paths() == paths(
        "", "0", "1", "00", "01", "000", "001"
    )


def test_hand_vector_proof_update_at_leaf_five():
    tree, (_, update_info, new_tree, _) = structure(
        3, 0, [0] * 8, hand_batch(), "1/2"
    )
    proof = open_linear(tree, 5)
    counters = UpdateCounters()
    updated = engine.proof_update(
        tree.scheme, proof, hand_batch(), update_info, "1/2", counters
    )

    assert updated == open_linear(new_tree, 5)
    # ⊥0 comes from U; ⊥1, ⊥10 and ⊥101 take one digest each
    assert counters.proof_digests[5] == 3
    assert counters.proof_lookups[5] == 4


def test_nu_zero_publishes_nothing():
    rng = random.Random(7)
    messages, batch = random_instance(rng, 4, 6)
    tree, (_, update_info, new_tree, counters) = structure(
        4, 1, messages, batch, 0
    )
    assert len(update_info) == 0
    assert counters.published == 0

    for index in batch.indices:
        updated = engine.proof_update(
            tree.scheme, open_linear(tree, index), batch, update_info, 0
        )
        assert updated == open_linear(new_tree, index)


def test_nu_one_leaves_single_update_nodes_out():
    rng = random.Random(11)
    messages, batch = random_instance(rng, 4, 5)
    _, (_, update_info, _, counters) = structure(4, 0, messages, batch, 1)

    for path, _ in update_info:
        assert len(batch.under(path, 4)) > 1
    assert counters.max_unpublished_count <= 1


def test_empty_batch():
    tree, (commitment, update_info, new_tree, counters) = structure(
        3, 1, list(range(8)), UpdateBatch(), "1/2"
    )
    assert len(update_info) == 0
    assert commitment == tree.commitment
    assert new_tree.nodes == tree.nodes
    assert engine.verify_counters(counters, 0, "1/2", 8, 1)


def test_commitment_matches_rebuilt_tree():
    rng = random.Random(3)
    for locality in (0, 1):
        messages, batch = random_instance(rng, 5, 9)
        _, (commitment, _, new_tree, _) = structure(
            5, locality, messages, batch, "1/3"
        )
        rebuilt = LinearTree.build(new_tree.scheme, batch.apply(messages))
        assert commitment == rebuilt.commitment
        assert new_tree.nodes == rebuilt.nodes


def check_random_trial(rng, trial, max_height):
    height = rng.randint(2, max_height)
    locality = rng.choice((0, 1))
    k = rng.randint(1, 2**height)
    nu = rng.choice(("0", "1/4", "1/3", "1/2", "2/3", "3/4", "1"))
    messages, batch = random_instance(rng, height, k)
    tree, (_, update_info, new_tree, counters) = structure(
        height, locality, messages, batch, nu
    )
    context = f"trial {trial}: h={height} p={locality} k={k} nu={nu}"

    users = set(rng.sample(range(2**height), min(4, 2**height)))
    users.add(batch.indices[0])
    for index in users:
        counter = OpCounter()
        updated = engine.proof_update(
            tree.scheme,
            open_linear(tree, index),
            batch,
            update_info,
            nu,
            counters,
            counter,
        )
        assert updated == open_linear(new_tree, index), f"{context} index={index}"
        assert counter.digests == counters.proof_digests[index]

    assert engine.verify_counters(
        counters, k, nu, 2**height, locality
    ), f"{context}: bounds exceeded: {counters}"


def test_proof_update_matches_fresh_opening_and_bounds():
    rng = random.Random(2024)
    for trial in range(120):
        check_random_trial(rng, trial, max_height=6)


@pytest.mark.slow
def test_bounds_hold_on_many_random_instances():
    rng = random.Random(7)
    for trial in range(1000):
        check_random_trial(rng, trial, max_height=6)


def test_published_bound_formula():
    assert engine.published_bound(4, "1/2", 8, 0) == pytest.approx(7.0)
    assert engine.published_bound(4, "1/2", 8, 1) == pytest.approx(14.0)
    assert engine.published_bound(0, "1/2", 8, 1) == 2


def test_verify_counters_rejects_excess():
    counters = UpdateCounters(published=100)
    assert not engine.verify_counters(counters, 4, "1/2", 8, 0)

    counters = UpdateCounters(published=1, max_unpublished_count=3)
    assert not engine.verify_counters(counters, 4, "1/2", 8, 0)

    counters = UpdateCounters(published=1, proof_digests={0: 9})
    assert not engine.verify_counters(counters, 4, "1/2", 8, 0)

    counters = UpdateCounters(published=1, proof_digests={0: 8})
    assert engine.verify_counters(counters, 4, "1/2", 8, 0)


def test_missing_published_node_logs_warning(caplog):
    tree, (_, update_info, new_tree, _) = structure(
        3, 0, [0] * 8, hand_batch(), "1/2"
    )
    empty = type(update_info)(update_info.backend_id, update_info.height)

    with caplog.at_level(logging.WARNING, logger="vcstack.sublinear.engine"):
        updated = engine.proof_update(
            tree.scheme, open_linear(tree, 0), hand_batch(), empty, "1/2"
        )

    assert "is not in U" in caplog.text
    # partial digests still give the right values
    assert updated == open_linear(new_tree, 0)
