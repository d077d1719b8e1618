"""Point-to-line and point-to-plane distances used as scan-matching residuals."""
import numpy as np

from ..errors import DegenerateLine, DegeneratePlane

DEGENERATE_EPS = 1e-12


def point_to_line_distance(p, a, b) -> float:
    """Distance from ``p`` to the infinite line through ``a`` and ``b``."""
    p, a, b = (np.asarray(v, dtype=float) for v in (p, a, b))
    ab = np.linalg.norm(a - b)
    if ab < DEGENERATE_EPS:
        raise DegenerateLine("line endpoints coincide")
    return float(np.linalg.norm(np.cross(p - a, p - b)) / ab)


def point_to_plane_distance(p, u, v, w) -> float:
    """Unsigned distance from ``p`` to the plane through ``u``, ``v``, ``w``."""
    p, u, v, w = (np.asarray(x, dtype=float) for x in (p, u, v, w))
    n = np.cross(u - v, u - w)
    nn = np.linalg.norm(n)
    if nn < DEGENERATE_EPS:
        raise DegeneratePlane("plane points are collinear")
    return float(abs(np.dot(p - u, n)) / nn)


def line_residuals(p, a, b):
    """Perpendicular offset vectors from lines ``(a, b)`` to points ``p``, all (N, 3).

    The norm of each row equals :func:`point_to_line_distance`.
    """
    d = b - a
    d = d / np.linalg.norm(d, axis=1, keepdims=True)
    ap = p - a
    return ap - np.sum(ap * d, axis=1, keepdims=True) * d


def plane_residuals(p, u, normals):
    """Signed distances along unit ``normals``; absolute value matches the plane distance."""
    return np.sum((p - u) * normals, axis=1)


def plane_normals(u, v, w):
    """Unit normals and a validity mask for planes spanned by rows of u, v, w."""
    n = np.cross(u - v, u - w)
    nn = np.linalg.norm(n, axis=1)
    ok = nn >= DEGENERATE_EPS
    out = np.zeros_like(n)
    out[ok] = n[ok] / nn[ok, None]
    return out, ok
