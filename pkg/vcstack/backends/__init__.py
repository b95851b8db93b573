from typing import Callable, Dict

from vcstack.api.exceptions import InvalidParameterException
from vcstack.api.interface import VectorCommitment
from vcstack.backends.amt import AmtVC
from vcstack.backends.kzg import KzgVC
from vcstack.backends.lattice import LatticeVC
from vcstack.backends.merkle import MerkleVC
from vcstack.backends.verkle import VerkleVC


def seed_bytes(seed: int) -> bytes:
    return seed.to_bytes(8, "big", signed=False)


def _merkle(n: int, seed: int, **_) -> VectorCommitment:
    return MerkleVC()


def _kzg(
    n: int, seed: int, insecure_debug: bool = False, table_limit: int = 2**10, **_
) -> VectorCommitment:
    return KzgVC.setup(n, seed_bytes(seed), insecure_debug, table_limit=table_limit)


def _amt(
    n: int,
    seed: int,
    insecure_debug: bool = False,
    nu=0.5,
    mode: str = "structured",
    **_,
) -> VectorCommitment:
    return AmtVC.setup(n, seed_bytes(seed), insecure_debug, nu=nu, mode=mode)


def _lattice(n: int, seed: int, nu=0.5, mode: str = "structured", **_):
    return LatticeVC.setup(n, seed, nu=nu, mode=mode)


def _verkle(
    n: int, seed: int, insecure_debug: bool = False, arity: int = 16, **_
) -> VectorCommitment:
    return VerkleVC.setup(n, seed_bytes(seed), arity, insecure_debug)


BACKENDS: Dict[str, Callable[..., VectorCommitment]] = {
    "merkle": _merkle,
    "kzg": _kzg,
    "amt": _amt,
    "lattice": _lattice,
    "verkle": _verkle,
}


def get_backend(name: str, n: int, seed: int = 0, **options) -> VectorCommitment:
    """Set up backend ``name`` for vectors of length ``n``.

    Options a backend does not take are ignored: ``nu`` and ``mode`` apply to
    amt and lattice, ``arity`` to verkle, ``insecure_debug`` to the pairing
    backends, ``table_limit`` to kzg.
    """
    try:
        factory = BACKENDS[name]
    except KeyError:
        raise InvalidParameterException(
            f"Unknown backend {name}, expected one of {', '.join(BACKENDS)}"
        )
    return factory(n, seed, **options)


__all__ = [
    "BACKENDS",
    "AmtVC",
    "KzgVC",
    "LatticeVC",
    "MerkleVC",
    "VerkleVC",
    "get_backend",
    "seed_bytes",
]
