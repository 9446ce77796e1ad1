"""Physical-optics far field of the dish: fixed surface, rim segments and gain.

Field amplitudes here are the radiation integral times -j*omega*mu0/(4*pi);
the common exp(-j*beta*R)/R factor is dropped.  With a 1 W feed the gain is
then ``4*pi*|E|**2 / (2*eta0)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import constants

from .errors import QuadratureError
from .geometry import ETA0, cap_area, incident_field, paraboloid_point, radius_at_angle

SENTINEL_DBI = -100.0
FLOOR_RELATIVE = 1e-10
CUT_AZIMUTH = math.pi / 2


def field_prefactor(model):
    omega = 2.0 * math.pi * model.frequency
    return -1j * omega * constants.mu_0 / (4.0 * math.pi)


def observation_direction(psi, cut_azimuth=CUT_AZIMUTH):
    s = math.sin(psi)
    return np.array([s * math.cos(cut_azimuth), s * math.sin(cut_azimuth), math.cos(psi)])


def po_current(normal, H):
    """PO surface current J = 2 n x H on the lit side."""
    return 2.0 * np.cross(normal, H)


@dataclass(frozen=True)
class FixedField:
    psi: float
    co: complex
    cross: complex


@dataclass(frozen=True)
class SegmentResponse:
    """Per-segment co-pol (and cross-pol) far-field amplitude for unit weight."""

    psi: float
    co: np.ndarray
    cross: np.ndarray

    def __len__(self):
        return len(self.co)

    def field(self, w):
        return np.sum(self.co * w), np.sum(self.cross * w)


def gain_dbi(field, reference=None, floor=FLOOR_RELATIVE):
    """Gain in dBi of far-field amplitude(s) from a 1 W feed.

    Magnitudes at or below ``floor * |reference|`` (or exactly zero when no
    reference is given) map to the -100 dBi sentinel.
    """
    mag = np.abs(np.asarray(field))
    limit = floor * abs(reference) if reference is not None else 0.0
    with np.errstate(divide="ignore"):
        g = 10.0 * np.log10(4.0 * math.pi * mag**2 / (2.0 * ETA0))
    g = np.where(mag <= limit, SENTINEL_DBI, g)
    return float(g) if g.ndim == 0 else g


def gain_linear(field):
    return 4.0 * math.pi * np.abs(field) ** 2 / (2.0 * ETA0)


def _grid_rows(model, feed, theta_lo, theta_hi, refine=1, cell_fraction=0.125, rows_per_chunk=64):
    """Yield quadrature chunks (x, y, z, Jx*dA, Jy*dA) over theta in [lo, hi].

    Midpoint nodes on a uniform theta grid; each row carries its own azimuth
    count (multiple of 4) so cells stay below ``cell_fraction`` wavelengths
    per side.  Cell weights are exact surface areas of each cell.
    """
    F = model.focal_length
    cell = cell_fraction * model.wavelength
    # meridian arc per radian of theta is F sec^3(theta/2), largest at theta_hi
    arc_rate = F / math.cos(theta_hi / 2.0) ** 3
    n_theta = refine * max(1, math.ceil((theta_hi - theta_lo) * arc_rate / cell))
    edges = np.linspace(theta_lo, theta_hi, n_theta + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    ring_area = np.diff(cap_area(edges, F))
    rho_mid = radius_at_angle(mids, F)
    pref = field_prefactor(model)
    for start in range(0, n_theta, rows_per_chunk):
        sl = slice(start, min(start + rows_per_chunk, n_theta))
        rhos, phis, dA = [], [], []
        for rho, area in zip(rho_mid[sl], ring_area[sl]):
            n_phi = 4 * max(1, math.ceil(2.0 * math.pi * rho * refine / (4.0 * cell)))
            rhos.append(np.full(n_phi, rho))
            phis.append(2.0 * math.pi * (np.arange(n_phi) + 0.5) / n_phi)
            dA.append(np.full(n_phi, area / n_phi))
        rho_c, phi_c, dA_c = np.concatenate(rhos), np.concatenate(phis), np.concatenate(dA)
        pts, nrm = paraboloid_point(rho_c, phi_c, model)
        _, H = incident_field(feed, pts, model)
        J = po_current(nrm, H) * (pref * dA_c)[:, None]
        yield pts, J, dA_c


class SurfaceGrid:
    """Cached quadrature of the PO current over a theta band of the dish."""

    def __init__(self, model, feed, theta_lo, theta_hi, refine=1, cell_fraction=0.125):
        self.model = model
        self.theta_lo, self.theta_hi = theta_lo, theta_hi
        pts, J, dA = zip(*_grid_rows(model, feed, theta_lo, theta_hi, refine, cell_fraction))
        pts = np.concatenate(pts)
        J = np.concatenate(J)
        self.x, self.y, self.z = pts[:, 0].copy(), pts[:, 1].copy(), pts[:, 2].copy()
        self.jx, self.jy, self.jz = J[:, 0].copy(), J[:, 1].copy(), J[:, 2].copy()
        self.area = float(np.sum(np.concatenate(dA)))

    def __len__(self):
        return len(self.x)

    def field(self, psi, cut_azimuth=CUT_AZIMUTH):
        """(co, cross) far-field amplitude in direction psi of the cut."""
        rhat = observation_direction(psi, cut_azimuth)
        beta = self.model.wavenumber
        phase = np.exp(1j * beta * (rhat[0] * self.x + rhat[1] * self.y + rhat[2] * self.z))
        return complex(np.sum(self.jy * phase)), complex(np.sum(self.jx * phase))


def integrate_band(psis, model, feed, theta_lo, theta_hi, refine=1, cell_fraction=0.125,
                   cut_azimuth=CUT_AZIMUTH):
    """Streamed version of :meth:`SurfaceGrid.field` for grids too large to cache.

    Returns an array of shape (len(psis), 2): co and cross amplitudes.
    """
    psis = np.atleast_1d(np.asarray(psis, dtype=float))
    out = np.zeros((len(psis), 2), dtype=complex)
    beta = model.wavenumber
    for pts, J, _ in _grid_rows(model, feed, theta_lo, theta_hi, refine, cell_fraction):
        for i, psi in enumerate(psis):
            rhat = observation_direction(psi, cut_azimuth)
            phase = np.exp(1j * beta * (pts @ rhat))
            out[i, 0] += np.sum(J[:, 1] * phase)
            out[i, 1] += np.sum(J[:, 0] * phase)
    return out


def fixed_field(psi, model, feed, grid=None):
    """Far field of the fixed surface (theta_f in [0, theta_1]) at angle psi."""
    if grid is None:
        grid = SurfaceGrid(model, feed, 0.0, model.rim_start_angle)
    co, cross = grid.field(psi)
    return FixedField(psi=float(psi), co=co, cross=cross)


def segment_currents(segments, model, feed):
    """PO current at each segment center times plate area and field prefactor."""
    _, H = incident_field(feed, segments.centers, model)
    return po_current(segments.normals, H) * (field_prefactor(model) * segments.plate_area)


def segment_response(psi, segments, model, feed, currents=None, cut_azimuth=CUT_AZIMUTH):
    if currents is None:
        currents = segment_currents(segments, model, feed)
    rhat = observation_direction(psi, cut_azimuth)
    phase = np.exp(1j * model.wavenumber * (segments.centers @ rhat))
    return SegmentResponse(psi=float(psi), co=currents[:, 1] * phase, cross=currents[:, 0] * phase)


@dataclass
class PatternCut:
    """Sampled far-field cut; gains use the -100 dBi sentinel below the floor."""

    angles: np.ndarray
    co: np.ndarray
    cross: np.ndarray
    reference: complex

    @property
    def co_dbi(self):
        return gain_dbi(self.co, self.reference)

    @property
    def cross_dbi(self):
        return gain_dbi(self.cross, self.reference)

    @property
    def floored(self):
        return np.abs(self.co) <= FLOOR_RELATIVE * abs(self.reference)

    def rows(self):
        for psi, g_co, g_x in zip(self.angles, self.co_dbi, self.cross_dbi):
            yield float(np.degrees(psi)), float(g_co), float(g_x)


class RimReflector:
    """Dish plus tiled rim with cached fixed-surface quadrature and segment currents."""

    def __init__(self, model, feed, segments, cell_fraction=0.125):
        self.model = model
        self.feed = feed
        self.segments = segments
        self.cell_fraction = cell_fraction
        self._grid = None
        self._currents = segment_currents(segments, model, feed)
        self._fixed = lru_cache(maxsize=4096)(self._fixed_uncached)

    @property
    def grid(self):
        if self._grid is None:
            self._grid = SurfaceGrid(self.model, self.feed, 0.0, self.model.rim_start_angle,
                                     cell_fraction=self.cell_fraction)
        return self._grid

    @property
    def n_segments(self):
        return self.segments.count

    def _fixed_uncached(self, psi):
        co, cross = self.grid.field(psi)
        return FixedField(psi=psi, co=co, cross=cross)

    def fixed_field(self, psi):
        return self._fixed(float(psi))

    def segment_response(self, psi):
        return segment_response(psi, self.segments, self.model, self.feed, currents=self._currents)

    def uniform_reference(self):
        """Boresight co-pol of the standard dish (all weights 1); floor reference."""
        return self.field(np.ones(self.n_segments), 0.0)[0]

    def field(self, w, psi):
        """Total (co, cross) amplitude at psi for weights w."""
        ef = self.fixed_field(psi)
        co, cross = self.segment_response(psi).field(w)
        return ef.co + co, ef.cross + cross

    def total_pattern(self, w, angles, reference=None):
        angles = np.atleast_1d(np.asarray(angles, dtype=float))
        if len(angles) < 1:
            raise ValueError("need at least one angle")
        w = np.asarray(w, dtype=complex)
        fields = np.array([self.field(w, psi) for psi in angles])
        if reference is None:
            reference = self.uniform_reference()
        return PatternCut(angles=angles, co=fields[:, 0], cross=fields[:, 1], reference=reference)

    def full_dish_field(self, psi, refine=1):
        """Fixed-surface quadrature extended over the whole dish (no discrete rim)."""
        out = integrate_band([psi], self.model, self.feed, 0.0, self.model.rim_edge_angle,
                             refine=refine, cell_fraction=self.cell_fraction)
        return complex(out[0, 0]), complex(out[0, 1])

    def ideal_gain(self):
        return (math.pi * self.model.diameter / self.model.wavelength) ** 2

    def check_quadrature(self, psis, tol=1e-3):
        """Raise QuadratureError unless doubling both grid densities moves E_f by <= tol."""
        psis = np.atleast_1d(psis)
        coarse = integrate_band(psis, self.model, self.feed, 0.0, self.model.rim_start_angle,
                                refine=1, cell_fraction=self.cell_fraction)[:, 0]
        fine = integrate_band(psis, self.model, self.feed, 0.0, self.model.rim_start_angle,
                              refine=2, cell_fraction=self.cell_fraction)[:, 0]
        scale = abs(self.fixed_field(0.0).co)
        change = np.abs(fine - coarse) / np.maximum(np.abs(fine), 1e-3 * scale)
        worst = int(np.argmax(change))
        if change[worst] > tol:
            raise QuadratureError(
                f"fixed-field quadrature moved by {change[worst]:.3e} at psi={np.degrees(psis[worst]):.3f} deg "
                f"under 2x refinement (tolerance {tol:.1e})")
        return float(change[worst])
