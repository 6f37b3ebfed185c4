from __future__ import annotations

import math
import random

from bodylang.geometry import haversine_m, point_in_polygon, polygon_centroid


def winding_number_inside(point, polygon) -> bool:
    """Independent oracle: summed signed angles reach 2*pi inside."""
    x, y = point
    total = 0.0
    n = len(polygon)
    for i in range(n):
        ax, ay = polygon[i][0] - x, polygon[i][1] - y
        bx, by = polygon[(i + 1) % n][0] - x, polygon[(i + 1) % n][1] - y
        total += math.atan2(ax * by - ay * bx, ax * bx + ay * by)
    return abs(total) > math.pi


def star_polygon(rng: random.Random, vertices: int) -> tuple[tuple[float, float], ...]:
    cx, cy = rng.uniform(-5, 5), rng.uniform(-5, 5)
    angles = sorted(rng.uniform(0, 2 * math.pi) for _ in range(vertices))
    return tuple(
        (cx + rng.uniform(1.0, 10.0) * math.cos(a), cy + rng.uniform(1.0, 10.0) * math.sin(a))
        for a in angles
    )


def test_haversine_zero_distance():
    assert haversine_m(40.0, 116.0, 40.0, 116.0) == 0.0


def test_haversine_one_degree_latitude():
    # one degree of latitude is about 111.2 km on the sphere
    d = haversine_m(40.0, 116.0, 41.0, 116.0)
    assert abs(d - 111195) < 50


def test_haversine_symmetry():
    a = haversine_m(39.99, 116.31, 40.01, 116.33)
    b = haversine_m(40.01, 116.33, 39.99, 116.31)
    assert abs(a - b) < 1e-9


def test_square_interior_and_exterior():
    square = ((0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0))
    assert point_in_polygon((5.0, 5.0), square)
    assert not point_in_polygon((15.0, 5.0), square)
    assert not point_in_polygon((-0.001, 5.0), square)


def test_boundary_counts_as_inside():
    square = ((0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0))
    assert point_in_polygon((0.0, 0.0), square)  # vertex
    assert point_in_polygon((5.0, 0.0), square)  # edge midpoint
    assert point_in_polygon((10.0, 10.0), square)  # far vertex
    assert point_in_polygon((0.0, 7.3), square)  # vertical edge


def test_concave_polygon():
    # U shape: the notch is outside
    u_shape = (
        (0.0, 0.0),
        (9.0, 0.0),
        (9.0, 9.0),
        (6.0, 9.0),
        (6.0, 3.0),
        (3.0, 3.0),
        (3.0, 9.0),
        (0.0, 9.0),
    )
    assert point_in_polygon((1.5, 5.0), u_shape)
    assert point_in_polygon((7.5, 5.0), u_shape)
    assert not point_in_polygon((4.5, 6.0), u_shape)  # inside the notch


def test_agreement_with_winding_oracle_on_random_polygons():
    rng = random.Random(42)
    checked = 0
    for _ in range(1000):
        polygon = star_polygon(rng, rng.randint(3, 12))
        point = (rng.uniform(-20, 20), rng.uniform(-20, 20))
        assert point_in_polygon(point, polygon) == winding_number_inside(point, polygon)
        checked += 1
    assert checked == 1000


def test_centroid_of_square_inside():
    square = ((0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0))
    cx, cy = polygon_centroid(square)
    assert abs(cx - 5.0) < 1e-12 and abs(cy - 5.0) < 1e-12
    assert point_in_polygon((cx, cy), square)
