from __future__ import annotations

from bodylang.geometry import polygon_centroid
from bodylang.presence import BoundingBox, verify_presence


def test_pass_at_camera_position_with_centroid_box(camera):
    cx, cy = polygon_centroid(camera.detection_zone)
    box = BoundingBox(x_min=cx - 30, y_min=cy - 120, x_max=cx + 30, y_max=cy)
    check = verify_presence(camera.latitude, camera.longitude, camera, box)
    assert check.within_radius and check.in_zone and check.passed


def test_fail_when_gps_out_of_radius(camera):
    # ~0.002 degrees latitude is about 220 m, radius defaults to 50 m
    cx, cy = polygon_centroid(camera.detection_zone)
    box = BoundingBox(x_min=cx - 30, y_min=cy - 120, x_max=cx + 30, y_max=cy)
    check = verify_presence(camera.latitude + 0.002, camera.longitude, camera, box, radius_m=50)
    assert not check.within_radius
    assert check.in_zone
    assert not check.passed


def test_foot_point_on_zone_vertex_counts_inside(camera):
    vx, vy = camera.detection_zone[0]
    box = BoundingBox(x_min=vx - 25, y_min=vy - 100, x_max=vx + 25, y_max=vy)
    assert box.foot_point() == (vx, vy)
    check = verify_presence(camera.latitude, camera.longitude, camera, box)
    assert check.in_zone


def test_no_detection_means_not_in_zone(camera):
    check = verify_presence(camera.latitude, camera.longitude, camera, None)
    assert check.within_radius
    assert not check.in_zone
    assert not check.passed


def test_box_outside_zone(camera):
    box = BoundingBox(x_min=900.0, y_min=700.0, x_max=1000.0, y_max=900.0)
    check = verify_presence(camera.latitude, camera.longitude, camera, box)
    assert not check.in_zone


def test_purity(camera):
    box = BoundingBox(x_min=200.0, y_min=150.0, x_max=300.0, y_max=350.0)
    first = verify_presence(camera.latitude, camera.longitude, camera, box)
    second = verify_presence(camera.latitude, camera.longitude, camera, box)
    assert first == second
