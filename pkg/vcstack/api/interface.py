from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Sequence, Tuple

from vcstack.schemas import NodePath, OpCounter, UpdateBatch, UpdateInfo


class VectorCommitment(ABC):
    """Dynamic vector commitment: commit, open, verify, update, proof update.

    ``aux`` is whatever the backend keeps beside the commitment to serve
    openings and updates. Proofs and commitments are backend specific.
    """

    name: str = ""

    @abstractmethod
    def commit(self, messages: Sequence[Any]) -> Tuple[Any, Any]:
        """Returns (commitment, aux)."""

    @abstractmethod
    def open(self, aux: Any, index: int) -> Any:
        pass

    @abstractmethod
    def verify(self, commitment: Any, message: Any, index: int, proof: Any) -> bool:
        pass

    @abstractmethod
    def update(
        self, aux: Any, batch: UpdateBatch
    ) -> Tuple[Any, Optional[UpdateInfo], Any]:
        """Returns (new commitment, update info, new aux)."""

    @abstractmethod
    def proof_update(
        self,
        proof: Any,
        index: int,
        batch: UpdateBatch,
        update_info: Optional[UpdateInfo],
        counter: Optional[OpCounter] = None,
    ) -> Any:
        pass

    def proof_equal(self, a: Any, b: Any) -> bool:
        return a == b

    def random_message(self, rng) -> Any:
        """A uniformly random message for this backend, drawn from ``rng``."""
        raise NotImplementedError


class HomomorphicScheme(ABC):
    """Public-parameter side of a homomorphic tree.

    Every inner node is a combination of per-message partial digests, and a
    node at depth j depends only on messages under its ``locality``-th parent.
    """

    backend_id: int
    height: int
    locality: int

    @abstractmethod
    def identity(self) -> Any:
        pass

    @abstractmethod
    def combine(self, a: Any, b: Any) -> Any:
        pass

    @abstractmethod
    def partial_delta(
        self,
        index: int,
        path: NodePath,
        old: Any,
        new: Any,
        counter: Optional[OpCounter] = None,
    ) -> Any:
        """Change of node ``path`` caused by message ``index`` going old -> new."""

    @abstractmethod
    def encode_node(self, value: Any) -> bytes:
        pass

    @abstractmethod
    def decode_node(self, data: bytes) -> Any:
        pass


class HomomorphicTree(ABC):
    scheme: HomomorphicScheme

    @property
    @abstractmethod
    def commitment(self) -> Any:
        pass

    @abstractmethod
    def node(self, path: NodePath) -> Any:
        pass

    @abstractmethod
    def with_updates(
        self, nodes: Dict[NodePath, Any], batch: UpdateBatch
    ) -> "HomomorphicTree":
        """New snapshot with ``nodes`` replaced and ``batch`` applied."""


class HomomorphicProof(ABC):
    """An opening proof made of tree nodes."""

    index: int

    @abstractmethod
    def node_paths(self) -> List[NodePath]:
        pass

    @abstractmethod
    def node_values(self) -> List[Any]:
        pass

    @abstractmethod
    def with_values(self, values: List[Any]) -> "HomomorphicProof":
        pass
