"""Radius-search loop-closure detection."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from ..geometry import Transform3D
from .scan_match import ScanMatchOptions, ScanMatchResult, scan_match
from .voxel_map import Keyframe, build_voxel_map


def loop_closure_candidates(keyframes: Sequence[Keyframe], current: Keyframe, radius: float,
                            min_index_gap: int = 20, m: int = 2) -> list[tuple[int, list[int]]]:
    """Prior keyframes within ``radius`` of ``current``, with their sub-keyframe windows.

    Returns ``(candidate_index, window)`` pairs sorted by candidate index, where
    ``window`` is ``candidate-m .. candidate+m`` restricted to indices present in
    ``keyframes``.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    known = {kf.index for kf in keyframes}
    here = current.pose.translation
    out = []
    for kf in sorted(keyframes, key=lambda k: k.index):
        if current.index - kf.index < min_index_gap:
            continue
        if np.linalg.norm(kf.pose.translation - here) <= radius:
            window = [j for j in range(kf.index - m, kf.index + m + 1) if j in known]
            out.append((kf.index, window))
    return out


def match_loop_closure(keyframes: Sequence[Keyframe], current: Keyframe, window: Sequence[int],
                       voxel_size: float = 0.05, initial: Transform3D | None = None,
                       opts: ScanMatchOptions = ScanMatchOptions()) -> ScanMatchResult:
    """Scan-match ``current`` against the map of the candidate's sub-keyframes.

    ``initial`` defaults to the current odometry pose; the result is the
    corrected world pose of ``current``.
    """
    by_index = {kf.index: kf for kf in keyframes}
    subs = [by_index[j] for j in window]
    vmap = build_voxel_map(subs, len(subs), voxel_size)
    return scan_match(current.features, vmap, initial or current.pose, opts)
