from .borrow import CACHE_DIR, fetch_borrowed_chapter
from .diff import PatchError, apply_unified_diff, unified_diff
from .patchset import ApplyReport, PatchEntry, PatchSet, apply_patchset, compute_patchset, synced_files, tree_hash

__all__ = [
    "CACHE_DIR", "ApplyReport", "PatchEntry", "PatchError", "PatchSet", "apply_patchset", "apply_unified_diff",
    "compute_patchset", "fetch_borrowed_chapter", "synced_files", "tree_hash", "unified_diff",
]
