"""Update-information structuring for homomorphic trees.

A batch of k updates changes every node whose ``locality``-th parent has an
updated message beneath it. The structuring walk starts at the root and
publishes a changed node's new value in U unless the number of updates under
its locality parent is at most k^(1-nu), in which case the walk stops there.
Proof holders read published nodes from U and rebuild the rest from partial
digests.
"""

from dataclasses import dataclass
from fractions import Fraction
import logging
import math
from typing import Any, Dict, List, Optional, Set, Tuple, Union

from vcstack.api.exceptions import InvalidParameterException
from vcstack.api.interface import HomomorphicProof, HomomorphicScheme, HomomorphicTree
from vcstack.schemas import (
    NodePath,
    OpCounter,
    UpdateBatch,
    UpdateCounters,
    UpdateInfo,
    count_updates_under,
)

logger = logging.getLogger(__name__)

# Rational exponents with a denominator up to this bound compare exactly.
MAX_EXACT_DENOMINATOR = 1024
RELATIVE_EPSILON = 1e-12


@dataclass(frozen=True)
class Threshold:
    """theta = k^(1-nu). ``exceeds(c)`` is the strict test c > theta."""

    k: int
    exponent: Union[Fraction, float]

    @property
    def value(self) -> float:
        if self.k == 0:
            return 0.0
        return float(self.k) ** float(self.exponent)

    def exceeds(self, count: int) -> bool:
        if self.k == 0:
            return count > 0
        e = self.exponent
        if isinstance(e, Fraction):
            # count > k^(a/b)  <=>  count^b > k^a
            return count**e.denominator > self.k**e.numerator
        theta = self.value
        return count > theta * (1 + RELATIVE_EPSILON)


@dataclass(frozen=True)
class TradeoffParam:
    nu: Union[Fraction, float]

    def __post_init__(self):
        if not 0 <= self.nu <= 1:
            raise InvalidParameterException(f"nu must be in [0, 1], got {self.nu}")

    @classmethod
    def of(cls, nu: Union[str, float, Fraction]) -> "TradeoffParam":
        if isinstance(nu, str):
            nu = Fraction(nu)
        elif isinstance(nu, float):
            exact = Fraction(nu).limit_denominator(MAX_EXACT_DENOMINATOR)
            nu = exact if float(exact) == nu else nu
        return cls(nu)

    def threshold(self, k: int) -> Threshold:
        if isinstance(self.nu, Fraction):
            exponent: Union[Fraction, float] = 1 - self.nu
        else:
            exponent = 1.0 - self.nu
        return Threshold(k, exponent)


def _as_param(nu) -> TradeoffParam:
    return nu if isinstance(nu, TradeoffParam) else TradeoffParam.of(nu)


def _descendants(path: NodePath, depth: int) -> List[NodePath]:
    level = [path]
    for _ in range(depth - path.depth):
        level = [c for p in level for c in p.children()]
    return level


def changed_paths(scheme: HomomorphicScheme, batch: UpdateBatch) -> Set[NodePath]:
    """Every node whose value depends on some updated message."""
    h, p = scheme.height, scheme.locality
    out: Set[NodePath] = set()
    for u in batch:
        leaf = NodePath.from_index(u.index, h, _arity(scheme))
        for depth in range(h + 1):
            anchor = leaf.prefix(max(depth - p, 0))
            out.update(_descendants(anchor, depth))
    return out


def _arity(scheme: HomomorphicScheme) -> int:
    return getattr(scheme, "arity", 2)


def updated_nodes(
    tree: HomomorphicTree, batch: UpdateBatch, counter: Optional[OpCounter] = None
) -> Dict[NodePath, Any]:
    """New value of every changed node, from partial digests of the batch."""
    scheme = tree.scheme
    h, p = scheme.height, scheme.locality
    out: Dict[NodePath, Any] = {}
    for path in sorted(changed_paths(scheme, batch)):
        value = tree.node(path)
        for u in batch.under(path.ancestor(p), h):
            value = scheme.combine(
                value, scheme.partial_delta(u.index, path, u.old, u.new, counter)
            )
        out[path] = value
    return out


def structure_update_info(
    tree: HomomorphicTree,
    batch: UpdateBatch,
    nu,
    counter: Optional[OpCounter] = None,
) -> Tuple[Any, UpdateInfo, HomomorphicTree, UpdateCounters]:
    """Apply ``batch`` to ``tree`` and structure U for tradeoff ``nu``.

    Returns (new commitment, U, new tree, counters).
    """
    scheme = tree.scheme
    h, p = scheme.height, scheme.locality
    batch.validate(_arity(scheme) ** h)
    threshold = _as_param(nu).threshold(batch.k)
    counters = UpdateCounters()

    counts: Dict[NodePath, int] = {}

    def count_at(path: NodePath) -> int:
        anchor = path.ancestor(p)
        if anchor not in counts:
            counts[anchor] = count_updates_under(anchor, batch, h)
        return counts[anchor]

    new_nodes = updated_nodes(tree, batch, counter)

    published: Dict[NodePath, bytes] = {}
    stack = [NodePath.root(_arity(scheme))] if new_nodes else []
    while stack:
        path = stack.pop()
        if not threshold.exceeds(count_at(path)):
            continue
        published[path] = scheme.encode_node(new_nodes[path])
        if path.depth < h:
            stack.extend(c for c in path.children() if c in new_nodes)

    counters.published = len(published)
    counters.max_unpublished_count = max(
        (count_at(path) for path in new_nodes if path not in published), default=0
    )

    new_tree = tree.with_updates(new_nodes, batch)
    update_info = UpdateInfo.from_nodes(scheme.backend_id, h, published)
    logger.debug(
        f"Structured k={batch.k} updates with theta={threshold.value:.4f}: "
        f"{len(new_nodes)} changed nodes, {len(published)} published"
    )
    return new_tree.commitment, update_info, new_tree, counters


def proof_update(
    scheme: HomomorphicScheme,
    proof: HomomorphicProof,
    batch: UpdateBatch,
    update_info: UpdateInfo,
    nu,
    counters: Optional[UpdateCounters] = None,
    counter: Optional[OpCounter] = None,
) -> HomomorphicProof:
    """Refresh ``proof`` from U and partial digests of the batch.

    Changed proof nodes found in U are copied; the others absorb one partial
    digest per update under their locality parent.
    """
    h, p = scheme.height, scheme.locality
    threshold = _as_param(nu).threshold(batch.k)
    digests = 0
    lookups = 0
    values = []
    for path, value in zip(proof.node_paths(), proof.node_values()):
        updates = batch.under(path.ancestor(p), h)
        if not updates:
            values.append(value)
            continue
        lookups += 1
        published = update_info.lookup(path)
        if published is not None:
            values.append(scheme.decode_node(published))
            continue
        if threshold.exceeds(len(updates)):
            logger.warning(
                f"Node {path} has {len(updates)} updates under it but is not in U"
            )
        for u in updates:
            value = scheme.combine(
                value, scheme.partial_delta(u.index, path, u.old, u.new, counter)
            )
            digests += 1
        values.append(value)
    if counter is not None:
        counter.digest(digests)

    if counters is not None:
        counters.proof_digests[proof.index] = digests
        counters.proof_lookups[proof.index] = lookups
    return proof.with_values(values)


def published_bound(k: int, nu, n: int, p: int) -> float:
    """2^p * k^nu * log2(N) + 2^p."""
    nu = float(_as_param(nu).nu)
    return (2**p) * (k**nu if k else 0) * math.log2(n) + 2**p


def verify_counters(counters: UpdateCounters, k: int, nu, n: int, p: int) -> bool:
    """Check a run against the published-node and proof-update bounds."""
    if k == 0:
        return counters.published == 0 and counters.max_proof_digests == 0
    param = _as_param(nu)
    threshold = param.threshold(k)
    height = math.log2(n)
    slack = 1 + RELATIVE_EPSILON
    if counters.published > published_bound(k, param, n, p) * slack:
        return False
    if threshold.exceeds(counters.max_unpublished_count):
        return False
    return counters.max_proof_digests <= threshold.value * (height + 1) * slack
