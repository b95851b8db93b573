import random

import numpy as np
import pytest

from vcstack.api.exceptions import (
    DimensionMismatchException,
    InvalidParameterException,
    MalformedEncodingException,
)
from vcstack.backends import lattice
from vcstack.backends.lattice import LatticeParams, LatticeVC
from vcstack.schemas import NodePath, OpCounter, UpdateBatch
from vcstack.sublinear import engine
from tests.backends.fixtures.fixtures import (
    NU_CHOICES,
    lattice_params,
    random_update_round,
)


def messages_for(params, n, seed=0):
    rng = np.random.default_rng(seed)
    return [int(rng.integers(0, 2**62)) for _ in range(n)]


@pytest.mark.parametrize("n", [2, 4, 8])
def test_open_and_verify(n):
    params = lattice_params(n)
    messages = messages_for(params, n)
    root, tree = lattice.commit(messages, params)
    assert root.shape == (params.k_dim,)

    for index in range(n):
        proof = lattice.open(tree, index)
        assert lattice.verify(root, messages[index], proof, tree.scheme)
        assert not lattice.verify(root, messages[index] ^ 1, proof, tree.scheme)


def test_single_leaf_root_is_leaf_hash():
    params = LatticeParams.generate(seed=1)
    root, tree = lattice.commit([42], params)
    assert np.array_equal(root, params.hash_leaf(42))
    assert lattice.verify(root, 42, lattice.open(tree, 0), tree.scheme)


def test_tampered_proof_is_rejected():
    params = lattice_params(8)
    messages = messages_for(params, 8, 1)
    root, tree = lattice.commit(messages, params)
    proof = lattice.open(tree, 2)

    values = proof.node_values()
    values[1] = values[1] + 1
    tampered = proof.with_values(values)
    assert not lattice.verify(root, messages[2], tampered, tree.scheme)

    values = proof.node_values()
    values[0] = -values[0]
    tampered = proof.with_values(values)
    assert not lattice.verify(root, messages[2], tampered, tree.scheme)


def test_inner_nodes_hash_their_children():
    params = lattice_params(16)
    _, tree = lattice.commit(messages_for(params, 16, 2), params)
    for depth in range(4):
        for pos in range(2**depth):
            path = NodePath.from_index(pos, depth)
            left, right = (tree.node(c) for c in path.children())
            assert np.array_equal(
                tree.scheme.g_inverse(tree.node(path)),
                tree.scheme.hash_pair(left, right),
            ), f"node {path}"


def test_nodes_are_digit_sums_of_partial_digests():
    params = lattice_params(16)
    messages = messages_for(params, 16, 3)
    _, tree = lattice.commit(messages, params)
    scheme = tree.scheme
    for depth in range(5):
        for pos in range(2**depth):
            path = NodePath.from_index(pos, depth)
            expected = sum(
                scheme.partial_digest(i, depth, messages[i]) for i in path.range(4)
            )
            assert np.array_equal(tree.node(path), expected), f"node {path}"


def test_partial_digest_composition_count():
    scheme = lattice_params(16).for_height(4)
    for depth in range(5):
        counter = OpCounter()
        scheme.partial_digest(11, depth, 1234, counter)
        assert counter.compositions == 4 - depth


@pytest.mark.parametrize("mode", ["structured", "no-info"])
def test_proof_update_matches_fresh_opening(mode):
    params = lattice_params(16)
    vc = LatticeVC(params, nu="1/2", mode=mode)
    messages = messages_for(params, 16, 4)
    _, tree = vc.commit(messages)
    batch = UpdateBatch.of(
        [(i, messages[i], messages[i] + 7) for i in (0, 3, 5, 6, 12)]
    )
    root, update_info, new_tree = vc.update(tree, batch)
    if mode == "no-info":
        assert len(update_info) == 0

    new_messages = batch.apply(messages)
    for index in (0, 5, 9, 15):
        updated = vc.proof_update(vc.open(tree, index), index, batch, update_info)
        assert vc.proof_equal(updated, vc.open(new_tree, index))
        assert vc.verify(root, new_messages[index], index, updated)


def test_update_info_entries_decode():
    params = lattice_params(8)
    vc = LatticeVC(params, nu=1)
    messages = messages_for(params, 8, 5)
    _, tree = vc.commit(messages)
    batch = UpdateBatch.of([(0, messages[0], 1), (1, messages[1], 2)])
    _, update_info, new_tree = vc.update(tree, batch)

    assert update_info.paths() == [NodePath(), NodePath((0,)), NodePath((0, 0))]
    for path, data in update_info:
        assert np.array_equal(tree.scheme.decode_node(data), new_tree.node(path))


def test_dimension_checks():
    params = LatticeParams.generate(seed=1)
    with pytest.raises(DimensionMismatchException):
        LatticeParams(params.M[:, :-1], params.q)
    with pytest.raises(DimensionMismatchException):
        params.hash_pair(np.zeros(3, dtype=np.int64), np.zeros(3, dtype=np.int64))
    with pytest.raises(DimensionMismatchException):
        params.g_inverse(np.zeros(params.d + 1, dtype=np.int64))
    with pytest.raises(InvalidParameterException):
        params.message_vector(1 << params.message_bits)
    with pytest.raises(MalformedEncodingException):
        params.decode_node(b"\x00" * 3)


def test_params_encoding():
    params = LatticeParams.generate(seed=9)
    decoded = lattice.decode_params(lattice.encode_params(params))
    assert decoded.q == params.q
    assert np.array_equal(decoded.M, params.M)

    with pytest.raises(MalformedEncodingException):
        lattice.decode_params(lattice.encode_params(params)[:-1])


def test_leaf_hash_is_linear():
    params = LatticeParams.generate(seed=2)
    rng = np.random.default_rng(3)
    for _ in range(10):
        x = rng.integers(0, 2, size=params.message_bits)
        y = rng.integers(0, 2, size=params.message_bits)
        assert np.array_equal(
            params.hash_leaf(x + y),
            (params.hash_leaf(x) + params.hash_leaf(y)) % params.q,
        )
    zero = np.zeros(params.message_bits, dtype=np.int64)
    assert not params.hash_leaf(zero).any()


def test_digit_recombination():
    params = LatticeParams.generate(seed=2)
    rng = np.random.default_rng(4)
    assert not params.g_inverse(params.identity()).any()
    for _ in range(10):
        x = rng.integers(0, params.q, size=params.k_dim)
        y = rng.integers(0, params.q, size=params.k_dim)
        assert np.array_equal(params.g_inverse(params.to_digits(x)), x)
        # digit sums recombine to the sum mod q even when digits exceed 1
        summed = params.to_digits(x) + params.to_digits(y)
        assert np.array_equal(params.g_inverse(summed), (x + y) % params.q)


def test_node_update_tracks_recommitted_tree():
    params = lattice_params(16)
    messages = messages_for(params, 16, 6)
    _, tree = lattice.commit(messages, params)
    changed = list(messages)
    changed[11] = messages[11] + 99
    _, expected = lattice.commit(changed, params)

    scheme = tree.scheme
    leaf = NodePath.from_index(11, 4)
    for depth in range(5):
        path = leaf.prefix(depth)
        counter = OpCounter()
        updated = scheme.node_update(
            tree.node(path), 11, depth, messages[11], changed[11], counter
        )
        assert np.array_equal(updated, expected.node(path)), f"node {path}"
        assert counter.compositions == 2 * (4 - depth)


def test_node_update_with_no_change_is_identity():
    scheme = lattice_params(8).for_height(3)
    node = scheme.partial_digest(5, 1, 77)
    counter = OpCounter()
    assert scheme.node_update(node, 5, 1, 77, 77, counter) is node
    assert counter.compositions == 0
    assert np.array_equal(
        scheme.partial_delta(5, NodePath((1,)), 77, 77), scheme.identity()
    )


def test_partial_delta_is_node_update_from_identity():
    scheme = lattice_params(8).for_height(3)
    path = NodePath((1, 0))
    expected = scheme.partial_digest(5, 2, 9) - scheme.partial_digest(5, 2, 4)
    assert np.array_equal(scheme.partial_delta(5, path, 4, 9), expected)
    assert np.array_equal(scheme.node_update(scheme.identity(), 5, 2, 4, 9), expected)


def check_random_update(rng, trial, users=3):
    n = 2 ** rng.randint(1, 5)
    nu = rng.choice(NU_CHOICES)
    vc = LatticeVC(lattice_params(n), nu=nu)
    update = random_update_round(vc, n, rng, users=users)
    context = f"trial {trial}: N={n} k={update.batch.k} nu={nu}"

    counters = vc.last_counters
    for index, proof in update.refreshed.items():
        assert vc.proof_equal(proof, update.fresh[index]), f"{context} index={index}"
        assert vc.verify(
            update.commitment, update.new_messages[index], index, proof
        ), f"{context} index={index}"
        counters.proof_digests[index] = update.counters[index].digests
    assert engine.verify_counters(
        counters, update.batch.k, nu, n, 0
    ), f"{context}: bounds exceeded: {counters}"


def check_random_tamper(rng, trial):
    n = 2 ** rng.randint(1, 5)
    params = lattice_params(n)
    messages = messages_for(params, n, rng.randrange(2**32))
    root, tree = lattice.commit(messages, params)
    index = rng.randrange(n)
    values = lattice.open(tree, index).node_values()
    j = rng.randrange(len(values))
    values[j] = values[j].copy()
    values[j][rng.randrange(params.d)] += 1
    tampered = lattice.open(tree, index).with_values(values)
    assert not lattice.verify(root, messages[index], tampered, tree.scheme), trial


def test_random_proof_updates_and_bounds():
    rng = random.Random(71)
    for trial in range(20):
        check_random_update(rng, trial)


def test_random_tampered_proofs():
    rng = random.Random(72)
    for trial in range(100):
        check_random_tamper(rng, trial)


@pytest.mark.slow
def test_bounds_hold_on_many_random_batches():
    rng = random.Random(73)
    for trial in range(1000):
        check_random_update(rng, trial)
