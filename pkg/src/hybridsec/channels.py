"""VLC line-of-sight gains and indoor RF channel draws.

The VLC side is deterministic (Lambertian emitter, photodiode with an
optical concentrator).  The RF side is a dual-slope indoor path loss with
log-normal shadowing and Rician small-scale fading.  All randomness comes
from an explicit ``numpy.random.Generator``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError

C_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class Position3D:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise GeometryError(f"non-finite coordinate in {self}")
        if self.z < 0:
            raise GeometryError(f"negative height z={self.z}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


@dataclass(frozen=True)
class VlcFrontEnd:
    """LED/photodiode parameters. Defaults follow the simulation table."""

    pd_area: float = 1e-4  # m^2
    half_power_semiangle: float = 60.0  # deg
    optical_filter_gain: float = 1.0
    refractive_index: float = 1.5
    fov_semiangle: float = 60.0  # deg, not in the table (see README)
    oe_factor: float = 0.53  # A/W, rho
    eo_factor: float = 10.0  # W/A, nu
    noise_psd: float = 1e-21  # A^2/Hz
    bandwidth: float = 20e6  # Hz
    max_current: float = 0.6  # A, I_H

    def __post_init__(self):
        if self.pd_area <= 0:
            raise GeometryError("pd_area must be positive")
        if not 0 < self.half_power_semiangle < 90:
            raise GeometryError("half_power_semiangle must lie in (0, 90)")
        if not 0 < self.fov_semiangle <= 90:
            raise GeometryError("fov_semiangle must lie in (0, 90]")
        if self.refractive_index < 1:
            raise GeometryError("refractive_index must be >= 1")
        if self.max_current <= 0:
            raise GeometryError("max_current must be positive")

    @property
    def lambertian_order(self) -> float:
        return -1.0 / math.log2(math.cos(math.radians(self.half_power_semiangle)))

    @property
    def noise_variance(self) -> float:
        return self.noise_psd * self.bandwidth


@dataclass(frozen=True)
class RfModel:
    carrier: float = 2.4e9
    bandwidth: float = 16e6
    noise_psd_dbm_per_hz: float = -174.0
    breakpoint: float = 5.0
    post_breakpoint_slope: float = 35.0  # dB/decade
    shadow_sigma_before: float = 3.0
    shadow_sigma_after: float = 5.0
    rician_k: float = 1.0
    los_angle: float = 45.0  # deg

    def __post_init__(self):
        if self.breakpoint <= 0:
            raise GeometryError("breakpoint must be positive")
        if self.shadow_sigma_before < 0 or self.shadow_sigma_after < 0:
            raise GeometryError("shadowing sigmas must be non-negative")
        if self.rician_k < 0:
            raise GeometryError("rician_k must be non-negative")

    @property
    def noise_power(self) -> float:
        """Receiver noise power in watts."""
        return 10 ** ((self.noise_psd_dbm_per_hz - 30) / 10) * self.bandwidth


@dataclass(frozen=True)
class ChannelSet:
    """One channel realization; entrusted users ordered so h1 >= h2."""

    h1: float
    h2: float
    hD: np.ndarray
    hE: np.ndarray
    # floor positions of the two entrusted users, rows in the same order as h1, h2
    users: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "hD", np.asarray(self.hD, dtype=complex).reshape(2))
        object.__setattr__(self, "hE", np.asarray(self.hE, dtype=complex).reshape(2))
        if self.h1 < self.h2 or self.h2 < 0:
            raise GeometryError(f"expected h1 >= h2 >= 0, got {self.h1}, {self.h2}")
        if not (np.all(np.isfinite(self.hD)) and np.all(np.isfinite(self.hE))):
            raise GeometryError("non-finite RF channel")

    def replace(self, **changes) -> "ChannelSet":
        kw = dict(h1=self.h1, h2=self.h2, hD=self.hD, hE=self.hE, users=self.users)
        kw.update(changes)
        return ChannelSet(**kw)


def lambertian_gain(ap: Position3D, user: Position3D, fe: VlcFrontEnd) -> float:
    """DC gain of the LoS optical link; LED faces down, photodiode faces up."""
    if ap.z <= user.z:
        raise GeometryError("access point must be above the user")
    d = float(np.linalg.norm(ap.as_array() - user.as_array()))
    cos_t = (ap.z - user.z) / d
    incidence = math.degrees(math.acos(min(1.0, cos_t)))
    if incidence > fe.fov_semiangle:
        return 0.0
    m = fe.lambertian_order
    concentrator = fe.refractive_index**2 / math.sin(math.radians(fe.fov_semiangle)) ** 2
    return ((m + 1) * fe.pd_area / (2 * math.pi * d**2)
            * cos_t**m * fe.optical_filter_gain * concentrator * cos_t)


def rf_path_loss_db(d, m: RfModel):
    """Dual-slope indoor path loss: free space up to the breakpoint, then
    ``post_breakpoint_slope`` dB per decade.  Accepts scalars or arrays."""
    d_arr = np.asarray(d, dtype=float)
    if np.any(~(d_arr > 0)):
        raise GeometryError("path-loss distance must be positive")
    k = 4 * math.pi * m.carrier / C_LIGHT
    free = 20 * np.log10(k * d_arr)
    at_bp = 20 * math.log10(k * m.breakpoint)
    after = at_bp + m.post_breakpoint_slope * np.log10(d_arr / m.breakpoint)
    out = np.where(d_arr <= m.breakpoint, free, after)
    return float(out) if np.ndim(d) == 0 else out


def rf_gain_from_normals(d, m: RfModel, normals) -> np.ndarray:
    """Map standard-normal triples (re, im, shadow) to complex channel gains.

    Kept separate from the sampler so that paired experiments can reuse the
    same normals at different distances.
    """
    d = np.asarray(d, dtype=float)
    z = np.asarray(normals, dtype=float)
    k = m.rician_k
    if math.isinf(k):
        los_w, nlos_w = 1.0, 0.0
    else:
        los_w, nlos_w = math.sqrt(k / (k + 1)), math.sqrt(1 / (k + 1))
    phase = 2 * math.pi * d * m.carrier / C_LIGHT + math.radians(m.los_angle)
    fade = los_w * np.exp(1j * phase) + nlos_w * (z[..., 0] + 1j * z[..., 1]) / math.sqrt(2)
    sigma = np.where(d <= m.breakpoint, m.shadow_sigma_before, m.shadow_sigma_after)
    loss_db = rf_path_loss_db(d, m) + sigma * z[..., 2]
    return fade * 10 ** (-loss_db / 20)


def sample_rf_channel(tx: Position3D, rx: Position3D, m: RfModel,
                      rng: np.random.Generator) -> complex:
    d = float(np.linalg.norm(tx.as_array() - rx.as_array()))
    if d == 0:
        raise GeometryError("transmitter and receiver coincide")
    return complex(rf_gain_from_normals(d, m, rng.standard_normal(3)))


@dataclass(frozen=True)
class Geometry:
    """Room layout; distances of destination/eavesdropper are horizontal."""

    ap_height: float = 3.0
    user_height: float = 0.85
    user_radius: float = 2.0
    d_d: float = 5.0
    d_e: float = 4.0
    d_e_min: float = 4.0
    eavesdropper: bool = True

    def __post_init__(self):
        if self.ap_height <= self.user_height:
            raise GeometryError("ap_height must exceed user_height")
        if self.user_radius <= 0 or self.d_d <= 0 or self.d_e <= 0 or self.d_e_min <= 0:
            raise GeometryError("radii and distances must be positive")


def uniform_disk(rng: np.random.Generator, radius: float, n: int) -> np.ndarray:
    """n points uniform in a disk about the origin, shape (n, 2)."""
    r = radius * np.sqrt(rng.random(n))
    a = 2 * math.pi * rng.random(n)
    return np.column_stack([r * np.cos(a), r * np.sin(a)])


def ring_points(rng: np.random.Generator, radius: float, n: int) -> np.ndarray:
    a = 2 * math.pi * rng.random(n)
    return np.column_stack([radius * np.cos(a), radius * np.sin(a)])


def rf_channels_to(users_xy: np.ndarray, target_xy: np.ndarray, m: RfModel,
                   normals: np.ndarray) -> np.ndarray:
    """Channels from both entrusted users to one or many targets.

    ``target_xy`` has shape (2,) or (n, 2); ``normals`` matches the output
    shape plus a trailing axis of 3.  Everyone sits at the same height, so the
    link distance is horizontal.
    """
    target_xy = np.asarray(target_xy, dtype=float)
    d = np.linalg.norm(target_xy[..., None, :] - users_xy, axis=-1)
    if np.any(d <= 0):
        raise GeometryError("eavesdropper or destination coincides with a user")
    return rf_gain_from_normals(d, m, normals)


def sample_scenario(geo: Geometry, fe: VlcFrontEnd, rf: RfModel,
                    rng: np.random.Generator) -> ChannelSet:
    """Draw user positions and all channels for one trial.

    The number and order of random draws does not depend on any distance, so
    two calls with equal seeds and different ``d_d``/``d_e`` are paired.
    """
    users = uniform_disk(rng, geo.user_radius, 2)
    dest = ring_points(rng, geo.d_d, 1)[0]
    eav = ring_points(rng, geo.d_e, 1)[0]
    zd = rng.standard_normal((2, 3))
    ze = rng.standard_normal((2, 3))

    ap = Position3D(0.0, 0.0, geo.ap_height)
    gains = [lambertian_gain(ap, Position3D(u[0], u[1], geo.user_height), fe) for u in users]
    order = [0, 1] if gains[0] >= gains[1] else [1, 0]
    users = users[order]
    hD = rf_channels_to(users, dest, rf, zd)
    hE = rf_channels_to(users, eav, rf, ze) if geo.eavesdropper else np.zeros(2, complex)
    return ChannelSet(gains[order[0]], gains[order[1]], hD, hE, users=users)
