import bisect
import struct
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from vcstack.api.exceptions import InvalidParameterException, MalformedEncodingException
from vcstack.schemas.tree import BackendId, NodePath

MAGIC = b"SVCUPD01"
_HEADER = struct.Struct("<BBI")


class UpdateInfo:
    """The broadcast payload U: (path, new node value) pairs in canonical order.

    Canonical order is depth ascending, then path digits ascending. Lookups
    are binary searches over that order.
    """

    def __init__(
        self,
        backend_id: int,
        height: int,
        entries: Iterable[Tuple[NodePath, bytes]] = (),
    ):
        self.backend_id = int(backend_id)
        self.height = height
        self.entries: Tuple[Tuple[NodePath, bytes], ...] = tuple(entries)
        self._keys = [path.sort_key() for path, _ in self.entries]
        for a, b in zip(self._keys, self._keys[1:]):
            if not a < b:
                raise InvalidParameterException(
                    "Update info entries must be strictly sorted and unique"
                )

    @classmethod
    def from_nodes(
        cls, backend_id: int, height: int, nodes: Dict[NodePath, bytes]
    ) -> "UpdateInfo":
        return cls(backend_id, height, sorted(nodes.items(), key=lambda e: e[0]))

    @property
    def arity(self) -> int:
        return BackendId.arity_of(self.backend_id)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Tuple[NodePath, bytes]]:
        return iter(self.entries)

    def __contains__(self, path: NodePath) -> bool:
        return self.lookup(path) is not None

    def __eq__(self, other) -> bool:
        if not isinstance(other, UpdateInfo):
            return NotImplemented
        return (
            self.backend_id == other.backend_id
            and self.height == other.height
            and self.entries == other.entries
        )

    def paths(self) -> List[NodePath]:
        return [path for path, _ in self.entries]

    def lookup(self, path: NodePath) -> Optional[bytes]:
        key = path.sort_key()
        pos = bisect.bisect_left(self._keys, key)
        if pos < len(self._keys) and self._keys[pos] == key:
            return self.entries[pos][1]
        return None

    def encode(self) -> bytes:
        out = bytearray(MAGIC)
        out += _HEADER.pack(self.backend_id, self.height, len(self.entries))
        width = digit_width(self.arity)
        for path, value in self.entries:
            out += struct.pack("<B", path.depth)
            out += pack_digits(path.digits, width)
            out += struct.pack("<H", len(value))
            out += value
        return bytes(out)

    @classmethod
    def decode(cls, data: bytes) -> "UpdateInfo":
        if data[: len(MAGIC)] != MAGIC:
            raise MalformedEncodingException("Bad update info magic")
        offset = len(MAGIC)
        try:
            backend_id, height, count = _HEADER.unpack_from(data, offset)
            offset += _HEADER.size
            arity = BackendId.arity_of(backend_id)
            width = digit_width(arity)
            entries = []
            for _ in range(count):
                (depth,) = struct.unpack_from("<B", data, offset)
                offset += 1
                if depth > height:
                    raise MalformedEncodingException(
                        f"Path depth {depth} exceeds tree height {height}"
                    )
                nbytes = (depth * width + 7) // 8
                if offset + nbytes > len(data):
                    raise MalformedEncodingException("Truncated path bytes")
                digits = unpack_digits(data[offset : offset + nbytes], depth, width)
                offset += nbytes
                (length,) = struct.unpack_from("<H", data, offset)
                offset += 2
                if offset + length > len(data):
                    raise MalformedEncodingException("Truncated node value")
                value = data[offset : offset + length]
                entries.append((NodePath(digits, arity), value))
                offset += length
        except struct.error as e:
            raise MalformedEncodingException(f"Truncated update info: {e}")
        if offset != len(data):
            raise MalformedEncodingException(
                f"{len(data) - offset} trailing bytes after update info"
            )
        try:
            return cls(backend_id, height, entries)
        except InvalidParameterException as e:
            raise MalformedEncodingException(e.message)


def digit_width(arity: int) -> int:
    return arity.bit_length() - 1


def pack_digits(digits: Tuple[int, ...], width: int) -> bytes:
    nbits = len(digits) * width
    if nbits == 0:
        return b""
    value = 0
    for d in digits:
        value = (value << width) | d
    nbytes = (nbits + 7) // 8
    value <<= nbytes * 8 - nbits
    return value.to_bytes(nbytes, "big")


def unpack_digits(data: bytes, depth: int, width: int) -> Tuple[int, ...]:
    if depth == 0:
        return ()
    nbits = depth * width
    value = int.from_bytes(data, "big") >> (len(data) * 8 - nbits)
    mask = (1 << width) - 1
    return tuple(
        (value >> (width * (depth - 1 - i))) & mask for i in range(depth)
    )
