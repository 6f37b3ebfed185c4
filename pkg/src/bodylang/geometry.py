"""Geometric primitives for presence verification: great-circle distance for
the GPS radius check and point-in-polygon for the camera detection zone.

The polygon boundary counts as inside -- a deliberate, performer-friendly
rule; tests cross-check the crossing-number implementation against an
independent winding-number oracle.
"""

from __future__ import annotations

from math import atan2, cos, radians, sin, sqrt

EARTH_RADIUS_M = 6371000.0


def haversine_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance between two lat/lon points in meters."""
    phi1, phi2 = radians(lat1), radians(lat2)
    dphi = radians(lat2 - lat1)
    dlam = radians(lon2 - lon1)
    a = sin(dphi / 2) ** 2 + cos(phi1) * cos(phi2) * sin(dlam / 2) ** 2
    return EARTH_RADIUS_M * 2 * atan2(sqrt(a), sqrt(1 - a))


def _on_segment(px: float, py: float, ax: float, ay: float, bx: float, by: float) -> bool:
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    if cross != 0.0:
        return False
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def point_in_polygon(point: tuple[float, float], polygon: tuple[tuple[float, float], ...]) -> bool:
    """Crossing-number test with an explicit inclusive-boundary rule."""
    px, py = point
    n = len(polygon)
    for i in range(n):
        ax, ay = polygon[i]
        bx, by = polygon[(i + 1) % n]
        if _on_segment(px, py, ax, ay, bx, by):
            return True
    inside = False
    for i in range(n):
        ax, ay = polygon[i]
        bx, by = polygon[(i + 1) % n]
        # count edges whose y-span straddles the horizontal ray from the point
        if (ay > py) != (by > py):
            x_at = ax + (py - ay) * (bx - ax) / (by - ay)
            if px < x_at:
                inside = not inside
    return inside


def polygon_centroid(polygon: tuple[tuple[float, float], ...]) -> tuple[float, float]:
    """Area-weighted centroid (shoelace); falls back to the vertex mean for
    degenerate zero-area rings."""
    area2 = 0.0
    cx = 0.0
    cy = 0.0
    n = len(polygon)
    for i in range(n):
        ax, ay = polygon[i]
        bx, by = polygon[(i + 1) % n]
        w = ax * by - bx * ay
        area2 += w
        cx += (ax + bx) * w
        cy += (ay + by) * w
    if area2 == 0.0:
        return (sum(p[0] for p in polygon) / n, sum(p[1] for p in polygon) / n)
    return cx / (3 * area2), cy / (3 * area2)
