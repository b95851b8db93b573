import random

from py_ecc.optimized_bls12_381 import G1, add, eq
import pytest

from vcstack.api.exceptions import (
    InvalidParameterException,
    InvalidShapeException,
    MalformedEncodingException,
)
from vcstack.backends import verkle
from vcstack.backends.verkle import VerkleParams, VerkleProof, VerkleVC
from vcstack.crypto.pairing import commit_poly
from vcstack.crypto.polynomial import interpolate
from vcstack.schemas import BackendId, NodePath, OpCounter, UpdateBatch, UpdateInfo
from tests.backends.fixtures.fixtures import (
    random_update_round,
    scalar_batch,
    scalars,
    verkle_params,
)


def test_nodes_commit_to_child_hashes():
    params = verkle_params(4)
    root, tree = verkle.commit(scalars(16, 1), params)
    assert tree.height == 2
    assert len(tree.commitments) == 5
    for path, commitment in tree.commitments.items():
        expected = commit_poly(params.srs, interpolate(tree.child_hashes(path)))
        assert eq(commitment, expected), f"node {path}"
    assert eq(root, tree.root)


def test_equal_messages_give_equal_bottom_commitments():
    _, tree = verkle.commit([7] * 16, verkle_params(4))
    bottom = [tree.commitments[NodePath((d,), 4)] for d in range(4)]
    assert all(eq(c, bottom[0]) for c in bottom)


def test_single_change_touches_one_commitment_per_level():
    params = verkle_params(4)
    messages = scalars(16, 2)
    _, tree = verkle.commit(messages, params)
    messages[9] += 1
    _, changed = verkle.commit(messages, params)
    differing = [
        path
        for path in tree.commitments
        if not eq(tree.commitments[path], changed.commitments[path])
    ]
    assert sorted(differing) == [NodePath((), 4), NodePath((2,), 4)]


@pytest.mark.parametrize("arity,n", [(2, 4), (4, 16), (4, 4)])
def test_open_and_verify(arity, n):
    params = verkle_params(arity)
    messages = scalars(n, arity)
    root, tree = verkle.commit(messages, params)
    for index in (0, n - 1):
        opening = verkle.open(tree, index, params)
        assert verkle.verify(root, messages[index], index, opening.proof, params)
        wrong = messages[index] + 1
        assert not verkle.verify(root, wrong, index, opening.proof, params)


def test_tampered_proofs_are_rejected():
    params = verkle_params(2)
    messages = scalars(8, 3)
    root, tree = verkle.commit(messages, params)
    proof = verkle.open(tree, 5, params).proof
    m = messages[5]

    moved = VerkleProof(
        proof.height,
        (add(proof.path_commitments[0], G1),) + proof.path_commitments[1:],
        proof.d,
        proof.pi,
    )
    assert not verkle.verify(root, m, 5, moved, params)

    moved = VerkleProof(
        proof.height, proof.path_commitments, add(proof.d, G1), proof.pi
    )
    assert not verkle.verify(root, m, 5, moved, params)

    short = VerkleProof(proof.height, proof.path_commitments[1:], proof.d, proof.pi)
    assert not verkle.verify(root, m, 5, short, params)
    assert not verkle.verify(root, m, 4, proof, params)


def test_update_info_for_a_single_update():
    params = verkle_params(2)
    messages = scalars(4, 4)
    _, tree = verkle.commit(messages, params)
    _, update_info, _ = verkle.update(tree, scalar_batch(messages, [1], 5), params)
    assert update_info.backend_id == 0x51
    assert update_info.paths() == [NodePath((), 2), NodePath((0,), 2)]
    # k * h with h = 2: the root and the bottom node above leaf 1
    assert len(update_info) == 1 * tree.height


def test_update_matches_recommit():
    params = verkle_params(4)
    messages = scalars(16, 6)
    _, tree = verkle.commit(messages, params)
    batch = scalar_batch(messages, [0, 1, 14], 7)

    counter = OpCounter()
    root, update_info, new_tree = verkle.update(tree, batch, params, counter)
    expected_root, expected = verkle.commit(batch.apply(messages), params)

    assert eq(root, expected_root)
    for path in expected.commitments:
        assert eq(new_tree.commitments[path], expected.commitments[path])
    assert len(update_info) == 3
    assert len(update_info) <= batch.k * tree.height
    assert counter.exps == 5


@pytest.mark.parametrize("indices", [[3], [9], [8, 9, 15]])
def test_proof_update_matches_fresh_opening(indices):
    vc = VerkleVC(verkle_params(4))
    messages = scalars(16, 8)
    root, tree = vc.commit(messages)
    batch = scalar_batch(messages, indices, 9)
    new_root, update_info, new_tree = vc.update(tree, batch)

    # leaf 9 shares a bottom node with 8 and 10, and only the root with 3
    for index in (9, 10):
        counter = OpCounter()
        opening = vc.open(tree, index)
        updated = vc.proof_update(opening, index, batch, update_info, counter)
        assert vc.proof_equal(updated, vc.open(new_tree, index))
        assert vc.verify(new_root, batch.apply(messages)[index], index, updated)
        assert counter.exps <= (4 + 2) * 2


def test_empty_batch_keeps_the_proof():
    vc = VerkleVC(verkle_params(2))
    messages = scalars(4, 10)
    root, tree = vc.commit(messages)
    same, update_info, new_tree = vc.update(tree, UpdateBatch())
    assert eq(same, root)
    assert len(update_info) == 0

    opening = vc.open(tree, 2)
    assert vc.proof_equal(
        vc.proof_update(opening, 2, UpdateBatch(), update_info), opening
    )


def test_proof_update_rejects_foreign_context():
    vc = VerkleVC(verkle_params(2))
    _, tree = vc.commit(scalars(4, 11))
    with pytest.raises(InvalidParameterException):
        vc.proof_update(vc.open(tree, 0), 1, UpdateBatch(), UpdateInfo(0x51, 2))


def test_proof_encoding():
    params = verkle_params(4)
    messages = scalars(16, 12)
    root, tree = verkle.commit(messages, params)
    proof = verkle.open(tree, 6, params).proof

    data = verkle.encode_proof(proof)
    assert len(data) == verkle.proof_size(2) == 1 + 3 * 48
    decoded = verkle.decode_proof(data)
    assert decoded.equals(proof)
    assert verkle.verify(root, messages[6], 6, decoded, params)

    for bad in (b"", data[:-1], b"\x00" + data[1:]):
        with pytest.raises(MalformedEncodingException):
            verkle.decode_proof(bad)


def test_sizes():
    assert verkle.proof_size_with_message(3) == 272
    assert verkle.proof_size_with_message(12) == 704


def test_shape_and_arity_errors():
    params = verkle_params(4)
    with pytest.raises(InvalidShapeException):
        verkle.commit(scalars(8, 13), params)
    with pytest.raises(InvalidShapeException):
        verkle.commit([1], params)
    with pytest.raises(InvalidParameterException):
        VerkleParams(3, params.srs)
    assert BackendId.arity_of(params.backend_id) == 4


def random_shape(rng):
    arity = rng.choice((2, 4))
    height = rng.randint(1, 3 if arity == 2 else 2)
    return arity, height, arity**height


def check_random_update(rng, trial):
    arity, height, n = random_shape(rng)
    vc = VerkleVC(verkle_params(arity))
    update = random_update_round(vc, n, rng, users=2)
    context = f"trial {trial}: c={arity} N={n} k={update.batch.k}"
    assert len(update.update_info) <= update.batch.k * height, context
    for index, opening in update.refreshed.items():
        assert vc.proof_equal(opening, update.fresh[index]), f"{context} {index}"


def check_random_tamper(rng, trial):
    arity, height, n = random_shape(rng)
    params = verkle_params(arity)
    messages = scalars(n, rng.randrange(2**32))
    root, tree = verkle.commit(messages, params)
    index = rng.randrange(n)
    proof = verkle.open(tree, index, params).proof

    commitments = list(proof.path_commitments)
    target = rng.randrange(len(commitments) + 2)
    d, pi = proof.d, proof.pi
    if target == len(commitments):
        d = add(d, G1)
    elif target == len(commitments) + 1:
        pi = add(pi, G1)
    else:
        commitments[target] = add(commitments[target], G1)
    tampered = VerkleProof(proof.height, tuple(commitments), d, pi)
    assert not verkle.verify(root, messages[index], index, tampered, params), trial


def test_random_proof_updates():
    rng = random.Random(81)
    for trial in range(4):
        check_random_update(rng, trial)


def test_random_tampered_proofs():
    rng = random.Random(82)
    check_random_tamper(rng, 0)


@pytest.mark.slow
def test_random_proof_updates_at_scale():
    rng = random.Random(83)
    for trial in range(200):
        check_random_update(rng, trial)


@pytest.mark.slow
def test_random_tampered_proofs_at_scale():
    rng = random.Random(84)
    for trial in range(100):
        check_random_tamper(rng, trial)
