"""Planar geometry primitives shared by the world and sensor modules.

Batch operations (ray casting, point-to-many-segments) use float64 numpy
arrays: segments are (..., 2, 2) arrays of endpoints, polygons (k, 2)
vertex arrays in order (convex, non-self-intersecting).  The _xy suffix
marks scalar fast paths used in generation/collision inner loops, where
numpy call overhead dominates.
"""
from __future__ import annotations

import math

import numpy as np


def point_segment_distance_xy(px, py, ax, ay, bx, by) -> float:
    """Scalar distance from (px, py) to segment (ax, ay)-(bx, by)."""
    dx = bx - ax
    dy = by - ay
    dd = dx * dx + dy * dy
    if dd == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / dd
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def _orient_xy(ax, ay, bx, by, cx, cy) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def segments_distance_xy(ax, ay, bx, by, cx, cy, dx, dy) -> float:
    """Scalar min distance between segments ab and cd (0 when they cross)."""
    d1 = _orient_xy(cx, cy, dx, dy, ax, ay)
    d2 = _orient_xy(cx, cy, dx, dy, bx, by)
    d3 = _orient_xy(ax, ay, bx, by, cx, cy)
    d4 = _orient_xy(ax, ay, bx, by, dx, dy)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return 0.0
    return min(
        point_segment_distance_xy(ax, ay, cx, cy, dx, dy),
        point_segment_distance_xy(bx, by, cx, cy, dx, dy),
        point_segment_distance_xy(cx, cy, ax, ay, bx, by),
        point_segment_distance_xy(dx, dy, ax, ay, bx, by),
    )


def point_in_convex_polygon_xy(px, py, verts) -> bool:
    """Scalar point-in-convex-polygon (verts: sequence of (x, y) tuples)."""
    pos = neg = False
    k = len(verts)
    for i in range(k):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % k]
        cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
        if cross > 0.0:
            pos = True
        elif cross < 0.0:
            neg = True
        if pos and neg:
            return False
    return True


def segment_lengths(points: np.ndarray, closed: bool = False) -> np.ndarray:
    """Per-segment lengths of a polyline; appends the closing segment if asked."""
    pts = np.asarray(points, dtype=float)
    if closed:
        pts = np.vstack([pts, pts[:1]])
    return np.hypot(*(pts[1:] - pts[:-1]).T)


def polygon_edges(poly: np.ndarray) -> np.ndarray:
    """Edges of a closed polygon as an (k, 2, 2) segment array."""
    poly = np.asarray(poly, dtype=float)
    nxt = np.roll(poly, -1, axis=0)
    return np.stack([poly, nxt], axis=1)


def point_segments_distance(p: np.ndarray, segments: np.ndarray) -> float:
    """Min distance from point p to any segment in an (S, 2, 2) array."""
    if len(segments) == 0:
        return np.inf
    a = segments[:, 0, :]
    ab = segments[:, 1, :] - a
    ap = np.asarray(p, dtype=float) - a
    denom = np.einsum("ij,ij->i", ab, ab)
    t = np.where(denom > 0.0, np.einsum("ij,ij->i", ap, ab) / np.where(denom > 0.0, denom, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    closest = a + t[:, None] * ab
    return float(np.min(np.hypot(*(np.asarray(p) - closest).T)))


def rays_segments_hits(origin: np.ndarray, dirs: np.ndarray, segments: np.ndarray) -> np.ndarray:
    """Nearest positive ray parameter against a batch of segments.

    origin: (2,), dirs: (n, 2) unit vectors, segments: (S, 2, 2).
    Returns (n,) array of the smallest t > 0 per ray, inf when missed.
    """
    n = dirs.shape[0]
    if len(segments) == 0:
        return np.full(n, np.inf)
    a = segments[:, 0, :]
    e = segments[:, 1, :] - a  # (S, 2)
    ao = a - np.asarray(origin, dtype=float)  # (S, 2)
    # Solve origin + t*d = a + u*e per (ray, segment) pair via 2x2 Cramer.
    denom = dirs[:, 0:1] * e[None, :, 1] - dirs[:, 1:2] * e[None, :, 0]  # (n, S)
    t_num = ao[None, :, 0] * e[None, :, 1] - ao[None, :, 1] * e[None, :, 0]
    u_num = ao[None, :, 0] * dirs[:, 1:2] - ao[None, :, 1] * dirs[:, 0:1]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = t_num / denom
        u = u_num / denom
    valid = (np.abs(denom) > 0.0) & (u >= 0.0) & (u <= 1.0) & (t > 0.0)
    t = np.where(valid, t, np.inf)
    return t.min(axis=1)


def rays_circle_hits(origin: np.ndarray, dirs: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    """Nearest positive ray parameter against a circle, inf when missed."""
    oc = np.asarray(origin, dtype=float) - np.asarray(center, dtype=float)
    b = dirs @ oc  # (n,)
    c = float(oc @ oc) - radius * radius
    disc = b * b - c
    hit = disc >= 0.0
    sq = np.sqrt(np.where(hit, disc, 0.0))
    t_near = -b - sq
    t_far = -b + sq
    t = np.where(t_near > 0.0, t_near, np.where(t_far > 0.0, t_far, np.inf))
    return np.where(hit, t, np.inf)
