"""Presence verification: is the performer really standing in front of the
camera they claim? Two independent signals must both pass -- the phone's GPS
fix within a radius of the camera, and a pedestrian detection whose foot
point lands inside the camera's detection zone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .domain import Camera
from .geometry import haversine_m, point_in_polygon

DEFAULT_GPS_RADIUS_M = 50.0


@dataclass(frozen=True)
class BoundingBox:
    """Pixel-space detection box; the foot point is the bottom-center."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def foot_point(self) -> tuple[float, float]:
        return ((self.x_min + self.x_max) / 2.0, self.y_max)

    def to_payload(self) -> dict:
        return {"x_min": self.x_min, "y_min": self.y_min, "x_max": self.x_max, "y_max": self.y_max}

    @classmethod
    def from_payload(cls, payload) -> "BoundingBox":
        return cls(payload["x_min"], payload["y_min"], payload["x_max"], payload["y_max"])


@dataclass(frozen=True)
class PresenceCheck:
    gps_latitude: float
    gps_longitude: float
    detected_box: Optional[BoundingBox]
    in_zone: bool
    within_radius: bool

    @property
    def passed(self) -> bool:
        return self.in_zone and self.within_radius


def verify_presence(
    performer_lat: float,
    performer_lon: float,
    camera: Camera,
    detection: Optional[BoundingBox],
    radius_m: float = DEFAULT_GPS_RADIUS_M,
) -> PresenceCheck:
    """Pure check of both presence signals against one camera.

    ``in_zone`` requires a detection whose foot point lies inside the camera's
    detection zone (boundary inclusive).
    """
    distance = haversine_m(performer_lat, performer_lon, camera.latitude, camera.longitude)
    within_radius = distance <= radius_m
    in_zone = detection is not None and point_in_polygon(detection.foot_point(), camera.detection_zone)
    return PresenceCheck(
        gps_latitude=performer_lat,
        gps_longitude=performer_lon,
        detected_box=detection,
        in_zone=in_zone,
        within_radius=within_radius,
    )
