from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from vcstack.api.exceptions import (
    DuplicateUpdateException,
    IndexOutOfRangeException,
    InvalidParameterException,
    InvalidShapeException,
)


class BackendId(IntEnum):
    MERKLE = 1
    KZG = 2
    AMT = 3
    LATTICE = 4
    # Verkle ids carry log2(c) in the low nibble: 0x51 for c=2 ... 0x58 for c=256.
    VERKLE = 0x50

    @staticmethod
    def verkle(arity: int) -> int:
        return BackendId.VERKLE + arity.bit_length() - 1

    @staticmethod
    def arity_of(backend_id: int) -> int:
        if backend_id & 0xF0 == BackendId.VERKLE:
            return 1 << (backend_id & 0x0F)
        return 2


def tree_height(n: int, arity: int = 2) -> int:
    """Returns h with arity**h == n, or raises InvalidShape."""
    if n < 1:
        raise InvalidShapeException(f"Vector length must be positive, got {n}")
    h = 0
    size = 1
    while size < n:
        size *= arity
        h += 1
    if size != n:
        raise InvalidShapeException(f"Vector length {n} is not a power of {arity}")
    return h


@dataclass(frozen=True, order=False)
class NodePath:
    """A node addressed by its child digits from the root.

    The empty path is the root. Binary paths print as ``⊥01``.
    """

    digits: Tuple[int, ...] = ()
    arity: int = 2

    @classmethod
    def root(cls, arity: int = 2) -> "NodePath":
        return cls((), arity)

    @classmethod
    def from_index(cls, index: int, height: int, arity: int = 2) -> "NodePath":
        digits = []
        for _ in range(height):
            digits.append(index % arity)
            index //= arity
        return cls(tuple(reversed(digits)), arity)

    @property
    def depth(self) -> int:
        return len(self.digits)

    @property
    def bits(self) -> str:
        return "".join(str(d) for d in self.digits)

    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        return (self.depth, self.digits)

    def __lt__(self, other: "NodePath") -> bool:
        return self.sort_key() < other.sort_key()

    def child(self, digit: int) -> "NodePath":
        if not 0 <= digit < self.arity:
            raise InvalidParameterException(f"Child digit {digit} out of range")
        return NodePath(self.digits + (digit,), self.arity)

    def children(self) -> List["NodePath"]:
        return [self.child(d) for d in range(self.arity)]

    def parent(self) -> "NodePath":
        if not self.digits:
            return self
        return NodePath(self.digits[:-1], self.arity)

    def ancestor(self, levels: int) -> "NodePath":
        """The ``levels``-th parent, clamped at the root."""
        keep = max(self.depth - levels, 0)
        return NodePath(self.digits[:keep], self.arity)

    def prefix(self, depth: int) -> "NodePath":
        return NodePath(self.digits[:depth], self.arity)

    def sibling(self) -> "NodePath":
        if not self.digits or self.arity != 2:
            raise InvalidParameterException("Only non-root binary paths have a sibling")
        return NodePath(self.digits[:-1] + (1 - self.digits[-1],), self.arity)

    def range(self, height: int) -> range:
        """Leaf indices whose digit prefix equals this path."""
        if self.depth > height:
            raise InvalidParameterException(
                f"Path depth {self.depth} exceeds height {height}"
            )
        start = 0
        for d in self.digits:
            start = start * self.arity + d
        width = self.arity ** (height - self.depth)
        return range(start * width, (start + 1) * width)

    def contains(self, index: int, height: int) -> bool:
        return index in self.range(height)

    def __str__(self) -> str:
        if self.arity == 2:
            return "⊥" + self.bits
        return "⊥" + ".".join(str(d) for d in self.digits)

    def __repr__(self) -> str:
        return f"NodePath({self})"


Message = Union[int, bytes]


@dataclass(frozen=True)
class Update:
    index: int
    old: Message
    new: Message


@dataclass(frozen=True)
class UpdateBatch:
    """k (index, old, new) triples. Diffs are derived as new - old."""

    updates: Tuple[Update, ...] = ()
    _by_index: Dict[int, Update] = field(
        default=None, compare=False, hash=False, repr=False
    )

    def __post_init__(self):
        seen = {}
        for u in self.updates:
            if u.index in seen:
                raise DuplicateUpdateException(
                    f"Index {u.index} appears more than once in the batch"
                )
            seen[u.index] = u
        object.__setattr__(self, "updates", tuple(self.updates))
        object.__setattr__(self, "_by_index", seen)

    @classmethod
    def of(cls, triples: Sequence[Tuple[int, Message, Message]]) -> "UpdateBatch":
        return cls(tuple(Update(i, old, new) for i, old, new in triples))

    def __len__(self) -> int:
        return len(self.updates)

    def __iter__(self) -> Iterator[Update]:
        return iter(self.updates)

    @property
    def k(self) -> int:
        return len(self.updates)

    @property
    def indices(self) -> List[int]:
        return [u.index for u in self.updates]

    def get(self, index: int) -> Optional[Update]:
        return self._by_index.get(index)

    def validate(self, n: int) -> "UpdateBatch":
        for u in self.updates:
            if not 0 <= u.index < n:
                raise IndexOutOfRangeException(
                    f"Update index {u.index} out of range for N={n}"
                )
        return self

    def under(self, path: NodePath, height: int) -> List[Update]:
        r = path.range(height)
        return [u for u in self.updates if u.index in r]

    def apply(self, messages: Sequence[Message]) -> List[Message]:
        out = list(messages)
        for u in self.updates:
            out[u.index] = u.new
        return out


def count_updates_under(path: NodePath, batch: UpdateBatch, height: int) -> int:
    """Number of updated indices whose leaf path has ``path`` as a prefix."""
    r = path.range(height)
    return sum(1 for u in batch.updates if u.index in r)
