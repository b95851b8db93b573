from .counters import OpCounter, UpdateCounters
from .tree import (
    BackendId,
    NodePath,
    Update,
    UpdateBatch,
    count_updates_under,
    tree_height,
)
from .update_info import UpdateInfo

__all__ = [
    "BackendId",
    "NodePath",
    "OpCounter",
    "Update",
    "UpdateBatch",
    "UpdateCounters",
    "UpdateInfo",
    "count_updates_under",
    "tree_height",
]
