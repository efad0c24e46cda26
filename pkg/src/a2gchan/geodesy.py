"""WGS-84 geodetic transforms, local ENU frames and antenna-frame angles.

Azimuths are clockwise from true north in [0, 360); elevations are above the
local horizontal in [-90, 90]. Antenna frames follow an intrinsic
yaw -> pitch (uptilt) -> roll sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._kernels_py import WGS84_A, WGS84_B, WGS84_E2, WGS84_F
from .errors import ZeroDistance

__all__ = [
    "WGS84_A", "WGS84_B", "WGS84_E2", "WGS84_F",
    "GeodeticPosition", "EnuVector", "RayGeometry", "MountOrientation",
    "geodetic_to_ecef", "ecef_to_geodetic", "ecef_to_enu", "enu_to_ecef",
    "geodetic_to_enu", "enu_to_geodetic", "enu_rotation",
    "ray_geometry", "mount_matrix", "mount_matrices", "world_to_antenna_frame", "world_to_antenna_arrays",
    "antenna_to_world_frame", "frame_angles",
    "normalize_azimuth", "unit_vector", "angles_from_vector",
    "geodetic_to_ecef_arrays", "ecef_to_enu_arrays",
]


def normalize_azimuth(az_deg: float) -> float:
    a = math.fmod(az_deg, 360.0)
    if a < 0.0:
        a += 360.0
    if a >= 360.0:
        a -= 360.0
    return a


def _normalize_longitude(lon_deg: float) -> float:
    lon = math.fmod(lon_deg + 180.0, 360.0)
    if lon < 0.0:
        lon += 360.0
    lon -= 180.0
    if lon >= 180.0:
        lon -= 360.0
    return lon


@dataclass(frozen=True)
class GeodeticPosition:
    latitude_deg: float
    longitude_deg: float
    altitude_m: float = 0.0

    def __post_init__(self):
        lat = float(self.latitude_deg)
        lon = float(self.longitude_deg)
        alt = float(self.altitude_m)
        if not (math.isfinite(lat) and math.isfinite(lon) and math.isfinite(alt)):
            raise ValueError(f"non-finite geodetic position ({lat}, {lon}, {alt})")
        if not -90.0 <= lat <= 90.0:
            raise ValueError(f"latitude {lat} outside [-90, 90]")
        if not -180.0 <= lon < 180.0:
            lon = _normalize_longitude(lon)
        object.__setattr__(self, "latitude_deg", lat)
        object.__setattr__(self, "longitude_deg", lon)
        object.__setattr__(self, "altitude_m", alt)


@dataclass(frozen=True)
class EnuVector:
    east_m: float
    north_m: float
    up_m: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.east_m, self.north_m, self.up_m)):
            raise ValueError("EnuVector components must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.east_m, self.north_m, self.up_m])

    @classmethod
    def from_array(cls, v) -> "EnuVector":
        return cls(float(v[0]), float(v[1]), float(v[2]))

    def __add__(self, other: "EnuVector") -> "EnuVector":
        return EnuVector(self.east_m + other.east_m, self.north_m + other.north_m, self.up_m + other.up_m)

    def __sub__(self, other: "EnuVector") -> "EnuVector":
        return EnuVector(self.east_m - other.east_m, self.north_m - other.north_m, self.up_m - other.up_m)

    def norm(self) -> float:
        return math.sqrt(self.east_m**2 + self.north_m**2 + self.up_m**2)


ORIGIN = EnuVector(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class RayGeometry:
    distance3d_m: float
    azimuth_deg: float
    elevation_deg: float

    def reversed(self) -> "RayGeometry":
        """The same ray seen from the other end."""
        az = 0.0 if abs(self.elevation_deg) == 90.0 else normalize_azimuth(self.azimuth_deg + 180.0)
        return RayGeometry(self.distance3d_m, az, -self.elevation_deg)


@dataclass(frozen=True)
class MountOrientation:
    boresight_azimuth_deg: float = 0.0
    uptilt_deg: float = 0.0
    roll_deg: float = 0.0

    def __post_init__(self):
        vals = (self.boresight_azimuth_deg, self.uptilt_deg, self.roll_deg)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("mount angles must be finite")
        if not -90.0 <= self.uptilt_deg <= 90.0:
            raise ValueError(f"uptilt {self.uptilt_deg} outside [-90, 90]")
        object.__setattr__(self, "boresight_azimuth_deg", normalize_azimuth(float(self.boresight_azimuth_deg)))


# --- ECEF -----------------------------------------------------------------


def geodetic_to_ecef(pos: GeodeticPosition) -> np.ndarray:
    lat = math.radians(pos.latitude_deg)
    lon = math.radians(pos.longitude_deg)
    s = math.sin(lat)
    n_rad = WGS84_A / math.sqrt(1.0 - WGS84_E2 * s * s)
    r = (n_rad + pos.altitude_m) * math.cos(lat)
    return np.array([
        r * math.cos(lon),
        r * math.sin(lon),
        (n_rad * (1.0 - WGS84_E2) + pos.altitude_m) * s,
    ])


def geodetic_to_ecef_arrays(lat_deg, lon_deg, alt_m) -> np.ndarray:
    """Vectorized form; returns an (N, 3) array."""
    lat = np.radians(np.asarray(lat_deg, dtype=np.float64))
    lon = np.radians(np.asarray(lon_deg, dtype=np.float64))
    alt = np.asarray(alt_m, dtype=np.float64)
    s = np.sin(lat)
    n_rad = WGS84_A / np.sqrt(1.0 - WGS84_E2 * s * s)
    r = (n_rad + alt) * np.cos(lat)
    return np.stack([r * np.cos(lon), r * np.sin(lon), (n_rad * (1.0 - WGS84_E2) + alt) * s], axis=-1)


def ecef_to_geodetic(point_ecef) -> GeodeticPosition:
    x, y, z = (float(v) for v in point_ecef)
    lat, lon, h = kernels.ecef_to_geodetic(np.array([x]), np.array([y]), np.array([z]))
    return GeodeticPosition(float(lat[0]), float(lon[0]), float(h[0]))


def enu_rotation(origin: GeodeticPosition) -> np.ndarray:
    """3x3 matrix taking ECEF displacements to (east, north, up)."""
    lat = math.radians(origin.latitude_deg)
    lon = math.radians(origin.longitude_deg)
    sl, cl = math.sin(lat), math.cos(lat)
    so, co = math.sin(lon), math.cos(lon)
    return np.array([
        [-so, co, 0.0],
        [-sl * co, -sl * so, cl],
        [cl * co, cl * so, sl],
    ])


def ecef_to_enu(point_ecef, origin: GeodeticPosition) -> EnuVector:
    d = np.asarray(point_ecef, dtype=np.float64) - geodetic_to_ecef(origin)
    return EnuVector.from_array(enu_rotation(origin) @ d)


def ecef_to_enu_arrays(points_ecef, origin: GeodeticPosition) -> np.ndarray:
    d = np.asarray(points_ecef, dtype=np.float64) - geodetic_to_ecef(origin)
    return d @ enu_rotation(origin).T


def enu_to_ecef(vec: EnuVector | np.ndarray, origin: GeodeticPosition) -> np.ndarray:
    """Inverse of :func:`ecef_to_enu`; accepts one vector or an (N, 3) array."""
    v = vec.as_array() if isinstance(vec, EnuVector) else np.asarray(vec, dtype=np.float64)
    return geodetic_to_ecef(origin) + v @ enu_rotation(origin)


def geodetic_to_enu(pos: GeodeticPosition, origin: GeodeticPosition) -> EnuVector:
    return ecef_to_enu(geodetic_to_ecef(pos), origin)


def enu_to_geodetic(vec: EnuVector, origin: GeodeticPosition) -> GeodeticPosition:
    return ecef_to_geodetic(enu_to_ecef(vec, origin))


# --- rays and antenna frames ---------------------------------------------


def unit_vector(azimuth_deg, elevation_deg) -> np.ndarray:
    """ENU unit vector(s) for the given azimuth/elevation; last axis is (e, n, u)."""
    az = np.radians(azimuth_deg)
    el = np.radians(elevation_deg)
    ce = np.cos(el)
    return np.stack([ce * np.sin(az), ce * np.cos(az), np.sin(el)], axis=-1)


def angles_from_vector(v) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`unit_vector` for (..., 3) arrays of (x-east, y-north, z-up).

    Vertical vectors get azimuth 0.
    """
    v = np.asarray(v, dtype=np.float64)
    e, n, u = v[..., 0], v[..., 1], v[..., 2]
    horiz = np.hypot(e, n)
    r = np.sqrt(horiz * horiz + u * u)
    el = np.degrees(np.arcsin(np.clip(u / r, -1.0, 1.0)))
    az = np.mod(np.degrees(np.arctan2(e, n)), 360.0)
    az = np.where(az >= 360.0, az - 360.0, az)
    az = np.where(horiz == 0.0, 0.0, az)
    return az, el


def ray_geometry(tx: EnuVector, rx: EnuVector) -> RayGeometry:
    """Distance and direction of the ray from ``tx`` to ``rx``."""
    de = rx.east_m - tx.east_m
    dn = rx.north_m - tx.north_m
    du = rx.up_m - tx.up_m
    d = math.sqrt(de * de + dn * dn + du * du)
    if d == 0.0:
        raise ZeroDistance("transmitter and receiver positions coincide")
    if de == 0.0 and dn == 0.0:
        az = 0.0
    else:
        az = normalize_azimuth(math.degrees(math.atan2(de, dn)))
    el = math.degrees(math.asin(max(-1.0, min(1.0, du / d))))
    return RayGeometry(d, az, el)


def mount_matrix(mount: MountOrientation) -> np.ndarray:
    """Rows are the antenna's (forward, right, up) axes expressed in ENU.

    Multiplying an ENU vector by this matrix gives antenna-frame components.
    """
    psi = math.radians(mount.boresight_azimuth_deg)
    theta = math.radians(mount.uptilt_deg)
    phi = math.radians(mount.roll_deg)
    fwd = np.array([math.sin(psi) * math.cos(theta), math.cos(psi) * math.cos(theta), math.sin(theta)])
    right0 = np.array([math.cos(psi), -math.sin(psi), 0.0])
    up0 = np.cross(right0, fwd)
    # positive roll dips the right-hand side
    right = math.cos(phi) * right0 - math.sin(phi) * up0
    up = math.sin(phi) * right0 + math.cos(phi) * up0
    return np.array([fwd, right, up])


def mount_matrices(boresight_azimuth_deg, uptilt_deg, roll_deg) -> np.ndarray:
    """Vectorized :func:`mount_matrix` over broadcastable angle arrays; (N, 3, 3)."""
    psi, theta, phi = np.broadcast_arrays(*(np.radians(np.atleast_1d(np.asarray(a, dtype=np.float64)))
                                            for a in (boresight_azimuth_deg, uptilt_deg, roll_deg)))
    sp, cp = np.sin(psi), np.cos(psi)
    st, ct = np.sin(theta), np.cos(theta)
    sr, cr = np.sin(phi), np.cos(phi)
    zero = np.zeros_like(psi)
    fwd = np.stack([sp * ct, cp * ct, st], axis=-1)
    right0 = np.stack([cp, -sp, zero], axis=-1)
    up0 = np.cross(right0, fwd)
    right = cr[:, None] * right0 - sr[:, None] * up0
    up = sr[:, None] * right0 + cr[:, None] * up0
    return np.stack([fwd, right, up], axis=1)


def frame_angles(local) -> tuple[np.ndarray, np.ndarray]:
    """Antenna-frame angles from (forward, right, up) components; azimuth is
    clockwise from forward."""
    return angles_from_vector(np.stack([local[..., 1], local[..., 0], local[..., 2]], axis=-1))


def world_to_antenna_frame(ray: RayGeometry, mount: MountOrientation) -> tuple[float, float]:
    """Express a ray direction as (azimuth, elevation) in the antenna's own frame."""
    local = mount_matrix(mount) @ unit_vector(ray.azimuth_deg, ray.elevation_deg)
    az, el = frame_angles(local)
    return float(az), float(el)


def world_to_antenna_arrays(azimuth_deg, elevation_deg, matrices) -> tuple[np.ndarray, np.ndarray]:
    """Batch form: ``matrices`` is one 3x3 mount matrix or an (N, 3, 3) stack."""
    v = unit_vector(azimuth_deg, elevation_deg)
    local = np.einsum("...ij,...j->...i", matrices, v)
    return frame_angles(local)


def antenna_to_world_frame(local_azimuth_deg: float, local_elevation_deg: float,
                           mount: MountOrientation) -> tuple[float, float]:
    """Inverse of :func:`world_to_antenna_frame`."""
    v = unit_vector(local_azimuth_deg, local_elevation_deg)
    local = np.array([v[1], v[0], v[2]])
    world = mount_matrix(mount).T @ local
    az, el = angles_from_vector(world)
    return float(az), float(el)
