"""Prime-focus paraboloid geometry, feed illumination and rim tiling.

Coordinates: vertex at the origin, axis along +z, surface z = rho**2 / (4F),
focus at (0, 0, F).  The feed at the focus radiates toward -z; ``theta_f`` is
the angle of a ray from the focus measured off the -z axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import constants, optimize

from .errors import (
    DomainError,
    EmptyRimError,
    InfeasibleCalibrationError,
    SingularDistanceError,
)

C0 = constants.c
ETA0 = constants.mu_0 * constants.c


def arc_length(rho, focal_length):
    """Meridian arc length from the vertex out to radius ``rho``."""
    u = np.asarray(rho, dtype=float) / (2.0 * focal_length)
    return focal_length * (u * np.sqrt(1.0 + u * u) + np.arcsinh(u))


def radius_at_arc(s, focal_length):
    """Inverse of :func:`arc_length` (scalar)."""
    if s < 0:
        raise DomainError(f"arc length must be >= 0, got {s}")
    if s == 0:
        return 0.0
    # arc >= rho, so rho lies in [0, s]
    return optimize.brentq(lambda r: arc_length(r, focal_length) - s, 0.0, s, xtol=1e-14, rtol=4 * np.finfo(float).eps)


def cap_area(theta, focal_length):
    """Surface area of the paraboloid cap subtending ``theta`` at the focus."""
    sec = 1.0 / np.cos(np.asarray(theta, dtype=float) / 2.0)
    return 8.0 * np.pi * focal_length**2 / 3.0 * (sec**3 - 1.0)


def rim_angle(focal_ratio):
    """Rim half-angle theta_0 = 2 atan(D / 4F) for a given F/D."""
    return 2.0 * math.atan(1.0 / (4.0 * focal_ratio))


def edge_taper(theta0, q):
    """Field at the rim relative to the vertex: feed taper times space attenuation."""
    c = math.cos(theta0)
    return c**q * (1.0 + c) / 2.0


def calibrate_focal_length(q, edge_illumination_db):
    """Return the F/D giving the requested edge illumination for a cos^q feed."""
    if q < 0:
        raise DomainError(f"feed exponent must be >= 0, got {q}")
    target = 10.0 ** (edge_illumination_db / 20.0)
    if not edge_illumination_db < 0:
        raise InfeasibleCalibrationError(
            f"edge illumination must be negative, got {edge_illumination_db} dB")
    lo = np.finfo(float).tiny
    f_lo = edge_taper(math.acos(lo), q) - target
    if f_lo >= 0:
        raise InfeasibleCalibrationError(
            f"no rim angle below 90 deg reaches {edge_illumination_db} dB with q={q}")
    # taper is increasing in c = cos(theta0); reaches 1 at c = 1
    c = optimize.brentq(lambda c: c**q * (1.0 + c) / 2.0 - target, lo, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    theta0 = math.acos(c)
    if not 0.0 < theta0 < math.pi / 2:
        raise InfeasibleCalibrationError(f"calibrated rim angle {theta0} rad out of range")
    return 1.0 / (4.0 * math.tan(theta0 / 2.0))


@dataclass(frozen=True)
class ReflectorModel:
    """Dish geometry and operating frequency.

    ``rim_start_angle`` (theta_1) defaults to the angle sitting ``rim_depth``
    of surface arc inside the edge; :func:`tile_rim` narrows it to whole rings.
    """

    diameter: float
    focal_length: float
    frequency: float
    rim_depth: float = 0.5
    feed_exponent: float = 1.0
    rim_start_angle: float | None = None

    def __post_init__(self):
        if self.diameter <= 0 or self.focal_length <= 0 or self.frequency <= 0:
            raise DomainError("diameter, focal length and frequency must be positive")
        if self.rim_depth <= 0:
            raise DomainError("rim_depth must be positive")
        if not self.rim_edge_angle < math.pi / 2:
            raise DomainError("F/D must exceed 0.25 so the rim lies in front of the feed")
        if self.rim_start_angle is None:
            edge_arc = float(arc_length(self.diameter / 2.0, self.focal_length))
            if self.rim_depth >= edge_arc:
                raise DomainError("rim_depth exceeds the meridian arc length")
            rho1 = radius_at_arc(edge_arc - self.rim_depth, self.focal_length)
            object.__setattr__(self, "rim_start_angle", surface_angle(rho1, self))
        if not 0.0 < self.rim_start_angle < self.rim_edge_angle:
            raise DomainError("need 0 < rim_start_angle < rim_edge_angle")

    @classmethod
    def from_edge_illumination(cls, diameter, frequency, q=1.0, edge_illumination_db=-11.0, rim_depth=0.5):
        fd = calibrate_focal_length(q, edge_illumination_db)
        return cls(diameter=diameter, focal_length=fd * diameter, frequency=frequency,
                   rim_depth=rim_depth, feed_exponent=q)

    @property
    def wavelength(self):
        return C0 / self.frequency

    @property
    def wavenumber(self):
        return 2.0 * math.pi / self.wavelength

    @property
    def focal_ratio(self):
        return self.focal_length / self.diameter

    @property
    def rim_edge_angle(self):
        return 2.0 * math.atan(self.diameter / (4.0 * self.focal_length))

    @property
    def focus(self):
        return np.array([0.0, 0.0, self.focal_length])

    def edge_illumination_db(self):
        return 20.0 * math.log10(edge_taper(self.rim_edge_angle, self.feed_exponent))


def surface_angle(rho, model):
    """Angle theta_f (rad) at the focus of the surface ring at radius ``rho``."""
    r = np.asarray(rho, dtype=float)
    if np.any(r < 0) or np.any(r > model.diameter / 2.0 * (1 + 1e-12)):
        raise DomainError(f"rho outside [0, D/2]: {rho}")
    out = 2.0 * np.arctan(r / (2.0 * model.focal_length))
    return float(out) if out.ndim == 0 else out


def radius_at_angle(theta, focal_length):
    return 2.0 * focal_length * np.tan(np.asarray(theta, dtype=float) / 2.0)


def paraboloid_point(rho, phi, model):
    """Surface point and inward (focus-side) unit normal at (rho, phi).

    Accepts scalars or broadcastable arrays; returns arrays of shape (..., 3).
    """
    rho = np.asarray(rho, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any(rho < 0) or np.any(rho > model.diameter / 2.0 * (1 + 1e-12)):
        raise DomainError(f"rho outside [0, D/2]")
    rho, phi = np.broadcast_arrays(rho, phi)
    F = model.focal_length
    c, s = np.cos(phi), np.sin(phi)
    point = np.stack([rho * c, rho * s, rho * rho / (4.0 * F)], axis=-1)
    slope = rho / (2.0 * F)
    norm = np.sqrt(1.0 + slope * slope)
    normal = np.stack([-slope * c / norm, -slope * s / norm, 1.0 / norm], axis=-1)
    return point, normal


@dataclass(frozen=True)
class FeedModel:
    """Electrically short y-directed dipole at the focus with a cos^q taper.

    ``amplitude_constant`` is the field magnitude at 1 m on boresight; use
    :meth:`normalized` for a feed radiating exactly 1 W.
    """

    exponent: float = 1.0
    amplitude_constant: float = 1.0
    polarization: tuple = (0.0, 1.0, 0.0)

    @staticmethod
    def pattern_integral(q):
        # integral over the forward hemisphere of cos^(2q) * (1 - (y.u)^2) dOmega
        return math.pi / (2 * q + 1) + math.pi / (2 * q + 3)

    @classmethod
    def normalized(cls, q=1.0, power=1.0):
        amp = math.sqrt(2.0 * ETA0 * power / cls.pattern_integral(q))
        return cls(exponent=q, amplitude_constant=amp)

    def radiated_power(self):
        return self.amplitude_constant**2 * self.pattern_integral(self.exponent) / (2.0 * ETA0)


def incident_field(feed, point, model):
    """Feed E and H (complex, shape (..., 3)) at surface point(s), phase referenced to the focus."""
    point = np.asarray(point, dtype=float)
    d = point - model.focus
    r = np.linalg.norm(d, axis=-1)
    if np.any(r < 1e-12 * model.diameter):
        raise SingularDistanceError("field point coincides with the focus")
    u = d / r[..., None]
    cos_t = np.clip(-u[..., 2], 0.0, None)
    pol = np.asarray(feed.polarization, dtype=float)
    # transverse part of the dipole moment: p - (p.u) u
    e_dir = pol - np.sum(u * pol, axis=-1)[..., None] * u
    amp = feed.amplitude_constant * cos_t**feed.exponent * np.exp(-1j * model.wavenumber * r) / r
    E = amp[..., None] * e_dir
    H = np.cross(u, E) / ETA0
    return E, H


@dataclass(frozen=True)
class SegmentArray:
    """Reconfigurable rim plates, ring 0 outermost, azimuth increasing within a ring."""

    centers: np.ndarray
    normals: np.ndarray
    plate_side: float
    ring_index: np.ndarray
    azimuth: np.ndarray
    ring_radii: tuple = field(default_factory=tuple)
    inner_angle: float = 0.0

    @property
    def count(self):
        return len(self.centers)

    @property
    def plate_area(self):
        return self.plate_side**2

    @property
    def n_rings(self):
        return len(self.ring_radii)


def tile_rim(model, plate_side):
    """Tile the outer ``rim_depth`` of surface arc with square plates in concentric rings."""
    if plate_side <= 0:
        raise DomainError("plate_side must be positive")
    n_rings = int(math.floor(model.rim_depth / plate_side + 1e-9))
    if n_rings < 1:
        raise EmptyRimError(f"rim_depth {model.rim_depth} m is shorter than one plate ({plate_side} m)")
    F = model.focal_length
    edge_arc = float(arc_length(model.diameter / 2.0, F))
    inner_arc = edge_arc - n_rings * plate_side
    if inner_arc <= 0:
        raise EmptyRimError("tiled rings reach the vertex")
    centers, normals, rings, azimuths, radii = [], [], [], [], []
    for i in range(n_rings):
        rho = radius_at_arc(edge_arc - (i + 0.5) * plate_side, F)
        count = int(math.floor(2.0 * math.pi * rho / plate_side))
        if count < 1:
            continue
        phi = 2.0 * math.pi * np.arange(count) / count
        p, n = paraboloid_point(np.full(count, rho), phi, model)
        centers.append(p)
        normals.append(n)
        rings.append(np.full(count, i))
        azimuths.append(phi)
        radii.append(rho)
    theta1 = surface_angle(radius_at_arc(inner_arc, F), model)
    return SegmentArray(
        centers=np.concatenate(centers),
        normals=np.concatenate(normals),
        plate_side=float(plate_side),
        ring_index=np.concatenate(rings),
        azimuth=np.concatenate(azimuths),
        ring_radii=tuple(radii),
        inner_angle=float(theta1),
    )


def build_reflector(diameter=18.0, frequency=1.5e9, q=1.0, edge_illumination_db=-11.0,
                    rim_depth=0.5, plate_side_factor=0.5):
    """Calibrated model plus tiled rim; the model's theta_1 matches the tiled annulus."""
    model = ReflectorModel.from_edge_illumination(diameter, frequency, q, edge_illumination_db, rim_depth)
    segments = tile_rim(model, plate_side_factor * model.wavelength)
    return replace(model, rim_start_angle=segments.inner_angle), segments
