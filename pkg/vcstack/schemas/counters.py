from dataclasses import dataclass, field
from typing import Dict

from dataclasses_json import dataclass_json


@dataclass_json
@dataclass
class OpCounter:
    """Counts group exponentiations, hash compositions and partial digests."""

    exps: int = 0
    compositions: int = 0
    digests: int = 0

    def exp(self, n: int = 1):
        self.exps += n

    def compose(self, n: int = 1):
        self.compositions += n

    def digest(self, n: int = 1):
        self.digests += n


@dataclass_json
@dataclass
class UpdateCounters:
    """Bookkeeping of one structured update and the proof updates after it.

    Attributes:
        published: Number of nodes whose new value went into U.
        max_unpublished_count: Largest count of updates under the locality
            parent of any changed node left out of U.
        proof_digests: Partial digest applications per proof update, by user.
        proof_lookups: U lookups per proof update, by user.
    """

    published: int = 0
    max_unpublished_count: int = 0
    proof_digests: Dict[int, int] = field(default_factory=dict)
    proof_lookups: Dict[int, int] = field(default_factory=dict)

    @property
    def max_proof_digests(self) -> int:
        return max(self.proof_digests.values(), default=0)
