"""Spherical-Earth geodesy.

Public functions take ``GeoPoint`` in degrees; the ``*_rad`` helpers work in
radians on floats, arrays or dual numbers and are what the transcription
differentiates through.
"""

from typing import List, Tuple

import numpy as np

from src.constants import EARTH_RADIUS_M
from src.exceptions import GeometryError
from src.models.geo import GeoPoint
from src.utils import dual as dn

_DEGENERATE_ANGLE = 1e-12


def central_angle_rad(lat1, lon1, lat2, lon2):
    """Haversine central angle between two positions given in radians"""
    sin_dlat = dn.sin(0.5 * (lat2 - lat1))
    sin_dlon = dn.sin(0.5 * (lon2 - lon1))
    a = sin_dlat * sin_dlat + dn.cos(lat1) * dn.cos(lat2) * sin_dlon * sin_dlon
    if not isinstance(a, dn.Dual):
        a = np.clip(a, 0.0, 1.0)
    return 2.0 * dn.arcsin(dn.sqrt(a))


def haversine_distance(p: GeoPoint, q: GeoPoint, earth_radius: float = EARTH_RADIUS_M) -> float:
    """Great-circle distance in meters"""
    if earth_radius <= 0.0:
        raise GeometryError(f'earth_radius must be positive, got {earth_radius}')
    sigma = central_angle_rad(np.radians(p.lat), np.radians(p.lon),
                              np.radians(q.lat), np.radians(q.lon))
    return float(earth_radius * sigma)


def _check_not_degenerate(p: GeoPoint, q: GeoPoint) -> float:
    sigma = float(central_angle_rad(np.radians(p.lat), np.radians(p.lon),
                                    np.radians(q.lat), np.radians(q.lon)))
    if sigma < _DEGENERATE_ANGLE:
        raise GeometryError(f'Coincident points {p.as_tuple()} and {q.as_tuple()} have no great circle')
    if np.pi - sigma < _DEGENERATE_ANGLE:
        raise GeometryError(f'Antipodal points {p.as_tuple()} and {q.as_tuple()} have no unique great circle')
    return sigma


def bearing_rad(lat1, lon1, lat2, lon2):
    """Initial course from point 1 to point 2, radians in (-pi, pi]"""
    dlon = lon2 - lon1
    y = np.sin(dlon) * np.cos(lat2)
    x = np.cos(lat1) * np.sin(lat2) - np.sin(lat1) * np.cos(lat2) * np.cos(dlon)
    return np.arctan2(y, x)


def initial_bearing(p: GeoPoint, q: GeoPoint) -> float:
    """Great-circle initial course in degrees clockwise from true north, in [0, 360)"""
    _check_not_degenerate(p, q)
    theta = bearing_rad(np.radians(p.lat), np.radians(p.lon), np.radians(q.lat), np.radians(q.lon))
    return float(np.degrees(theta) % 360.0)


def final_bearing(p: GeoPoint, q: GeoPoint) -> float:
    """Course on arrival at q, in [0, 360)"""
    return (initial_bearing(q, p) + 180.0) % 360.0


def _unit_vector(lat_rad, lon_rad) -> np.ndarray:
    return np.stack([np.cos(lat_rad) * np.cos(lon_rad),
                     np.cos(lat_rad) * np.sin(lon_rad),
                     np.sin(lat_rad)], axis=-1)


def interpolate_great_circle(p: GeoPoint, q: GeoPoint, fractions) -> Tuple[np.ndarray, np.ndarray]:
    """Points at the given fractions of the central angle from p to q (degrees arrays)"""
    sigma = _check_not_degenerate(p, q)
    f = np.asarray(fractions, dtype=float)
    a = _unit_vector(np.radians(p.lat), np.radians(p.lon))
    b = _unit_vector(np.radians(q.lat), np.radians(q.lon))
    wa = np.sin((1.0 - f) * sigma) / np.sin(sigma)
    wb = np.sin(f * sigma) / np.sin(sigma)
    v = wa[..., None] * a + wb[..., None] * b
    lat = np.degrees(np.arctan2(v[..., 2], np.hypot(v[..., 0], v[..., 1])))
    lon = np.degrees(np.arctan2(v[..., 1], v[..., 0]))
    return lat, lon


def great_circle_waypoints(p: GeoPoint, q: GeoPoint, n: int) -> List[GeoPoint]:
    """n points from p to q inclusive, equally spaced in central angle"""
    if n < 2:
        raise GeometryError(f'Need at least 2 waypoints, got {n}')
    lat, lon = interpolate_great_circle(p, q, np.linspace(0.0, 1.0, n))
    inner = [GeoPoint(lat=float(a), lon=float(o)) for a, o in zip(lat[1:-1], lon[1:-1])]
    return [p] + inner + [q]


def cross_track_distance(p: GeoPoint, q: GeoPoint, x: GeoPoint,
                         earth_radius: float = EARTH_RADIUS_M) -> float:
    """Signed distance of x from the great circle through p and q (meters, positive to the right)"""
    _check_not_degenerate(p, q)
    d13 = haversine_distance(p, x, earth_radius) / earth_radius
    if d13 < _DEGENERATE_ANGLE:
        return 0.0
    theta13 = bearing_rad(np.radians(p.lat), np.radians(p.lon), np.radians(x.lat), np.radians(x.lon))
    theta12 = bearing_rad(np.radians(p.lat), np.radians(p.lon), np.radians(q.lat), np.radians(q.lon))
    return float(np.arcsin(np.sin(d13) * np.sin(theta13 - theta12)) * earth_radius)
