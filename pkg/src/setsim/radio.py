"""Link budget, antenna patterns and downlink SINR for one cell with a
first-tier interference ring.

All powers inside this module are in mW unless a name says otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import AntennaMode
from .errors import DomainError

#: 3-dB beamwidth per sectored mode and the front-to-back cap (3GPP parabolic pattern).
HALF_POWER_BEAMWIDTH_DEG = {AntennaMode.SECTOR120: 70.0, AntennaMode.SECTOR60: 35.0}
SECTOR_WIDTH_DEG = {AntennaMode.SECTOR120: 120.0, AntennaMode.SECTOR60: 60.0}
MAX_ATTENUATION_DB = 20.0

#: Shadowing is redrawn once the UE has moved this far (1 s at 4.16 m/s).
SHADOW_DECORRELATION_M = 4.16


def db_to_linear(db):
    if np.ndim(db):
        return 10.0 ** (np.asarray(db, dtype=float) / 10.0)
    return 10.0 ** (db / 10.0)


def linear_to_db(lin):
    if np.ndim(lin):
        return 10.0 * np.log10(lin)
    return 10.0 * math.log10(lin)


def watts_to_mw(w):
    return w * 1000.0


def noise_power(density_dbm_hz: float, bandwidth_hz: float) -> float:
    """Thermal noise power in mW over ``bandwidth_hz``."""
    if bandwidth_hz <= 0:
        raise DomainError(f"bandwidth must be > 0, got {bandwidth_hz}")
    return 10.0 ** ((density_dbm_hz + 10.0 * math.log10(bandwidth_hz)) / 10.0)


def path_loss_db(distance_m):
    """TS 25.814 macro-cell path loss, ``128.1 + 37.6 log10(d_km)``.

    Accepts a scalar or an array of distances in metres.
    """
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0):
        raise DomainError("distance must be > 0")
    loss = 128.1 + 37.6 * np.log10(d / 1000.0)
    return float(loss) if loss.ndim == 0 else loss


def normalize_angle(deg):
    """Wrap an angle (or array of angles) into [-180, 180)."""
    return (np.asarray(deg, dtype=float) + 180.0) % 360.0 - 180.0


def antenna_gain_dbi(azimuth_offset_deg, mode: AntennaMode, boresight_gain_dbi: float):
    """Transmit antenna gain toward ``azimuth_offset_deg`` from boresight."""
    mode = AntennaMode(mode)
    offset = normalize_angle(azimuth_offset_deg)
    if mode is AntennaMode.OMNI:
        gain = np.full_like(offset, boresight_gain_dbi)
    else:
        theta_3db = HALF_POWER_BEAMWIDTH_DEG[mode]
        gain = boresight_gain_dbi - np.minimum(12.0 * (offset / theta_3db) ** 2, MAX_ATTENUATION_DB)
    return float(gain) if gain.ndim == 0 else gain


def sector_offset(azimuth_deg, mode: AntennaMode):
    """Offset of ``azimuth_deg`` from the boresight of the sector that serves it.

    Sector boresights sit at multiples of the sector width, starting at 0 deg.
    Omni returns the azimuth unchanged (the pattern ignores it anyway).
    """
    mode = AntennaMode(mode)
    az = np.asarray(azimuth_deg, dtype=float)
    if mode is AntennaMode.OMNI:
        out = normalize_angle(az)
    else:
        width = SECTOR_WIDTH_DEG[mode]
        out = (az + width / 2.0) % width - width / 2.0
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class UePlacement:
    ue_id: int
    distance_m: float
    azimuth_deg: float

    def __post_init__(self):
        if self.distance_m <= 0:
            raise DomainError(f"UE {self.ue_id}: distance must be > 0")

    @property
    def xy(self):
        a = math.radians(self.azimuth_deg)
        return self.distance_m * math.cos(a), self.distance_m * math.sin(a)


@dataclass(frozen=True)
class ChannelSnapshot:
    ue_id: int
    gain_linear: float
    interferer_gains: tuple  # ((power_mw, gain_linear), ...)
    noise_mw: float

    def __post_init__(self):
        if self.gain_linear < 0 or any(g < 0 or p < 0 for p, g in self.interferer_gains):
            raise DomainError("gains and powers must be >= 0")
        if self.noise_mw <= 0:
            raise DomainError("noise power must be > 0")

    @property
    def interference_mw(self):
        return sum(p * g for p, g in self.interferer_gains)

    def sinr_linear(self, serving_power_mw):
        return sinr(serving_power_mw, self)


def channel_gain(placement: UePlacement, tx_gain_dbi, rx_gain_dbi, mode, shadowing_db=0.0):
    """Serving-link gain (dimensionless) including antennas, path loss and shadowing."""
    offset = sector_offset(placement.azimuth_deg, mode)
    tx = antenna_gain_dbi(offset, mode, tx_gain_dbi)
    loss = path_loss_db(placement.distance_m)
    return 10.0 ** ((tx + rx_gain_dbi - loss + shadowing_db) / 10.0)


def sinr(serving_power_mw: float, snapshot: ChannelSnapshot) -> float:
    """Signal over interference-plus-noise, all in linear mW."""
    if serving_power_mw < 0:
        raise DomainError("serving power must be >= 0")
    denom = snapshot.interference_mw + snapshot.noise_mw
    if denom <= 0:
        raise DomainError("interference plus noise must be > 0")
    return serving_power_mw * snapshot.gain_linear / denom


def cell_radius_m(inter_site_distance_m):
    """Circumradius of a hexagonal cell for the given inter-site distance."""
    return inter_site_distance_m / math.sqrt(3.0)


def interferer_sites(inter_site_distance_m):
    """(x, y) of the six first-tier neighbours of a hexagonal layout centred on the origin."""
    angles = np.radians(30.0 + 60.0 * np.arange(6))
    return np.column_stack([np.cos(angles), np.sin(angles)]) * inter_site_distance_m


def place_ues(num_ues, inter_site_distance_m, rng, min_distance_m=35.0):
    """Drop UEs uniformly over the disc inscribed by the cell circumradius."""
    radius = cell_radius_m(inter_site_distance_m)
    r2 = rng.uniform(min_distance_m ** 2, radius ** 2, num_ues)
    dist = np.sqrt(r2)
    az = rng.uniform(0.0, 360.0, num_ues)
    return [UePlacement(i, float(d), float(a)) for i, (d, a) in enumerate(zip(dist, az))]


class CellGeometry:
    """Precomputed long-term link gains for a fixed UE drop.

    ``serving_gain`` excludes shadowing; ``interference_mw`` assumes every
    neighbour transmits at ``neighbour_power_mw`` through the co-channel
    sector that shares the serving sector's orientation.
    """

    def __init__(self, placements, cfg, neighbour_power_mw=None):
        self.placements = list(placements)
        self.mode = AntennaMode(cfg.antenna_mode)
        n = len(self.placements)
        dist = np.array([p.distance_m for p in self.placements])
        az = np.array([p.azimuth_deg for p in self.placements])
        xy = np.column_stack([dist * np.cos(np.radians(az)), dist * np.sin(np.radians(az))])

        offset = sector_offset(az, self.mode)
        boresight = az - offset
        tx = antenna_gain_dbi(offset, self.mode, cfg.tx_antenna_gain_dbi)
        self.serving_gain = np.atleast_1d(
            10.0 ** ((tx + cfg.rx_antenna_gain_dbi - path_loss_db(dist)) / 10.0))

        if neighbour_power_mw is None:
            neighbour_power_mw = watts_to_mw(cfg.max_tx_power_w)
        sites = interferer_sites(cfg.inter_enodeb_distance_m)
        gains = np.empty((n, len(sites)))
        for j, (sx, sy) in enumerate(sites):
            dx, dy = xy[:, 0] - sx, xy[:, 1] - sy
            d = np.hypot(dx, dy)
            bearing = np.degrees(np.arctan2(dy, dx))
            g_tx = antenna_gain_dbi(bearing - boresight, self.mode, cfg.tx_antenna_gain_dbi)
            gains[:, j] = 10.0 ** ((g_tx + cfg.rx_antenna_gain_dbi - path_loss_db(d)) / 10.0)
        self.interferer_gain = gains
        self.neighbour_power_mw = float(neighbour_power_mw)
        self.interference_mw = gains.sum(axis=1) * self.neighbour_power_mw
        self.noise_mw = noise_power(cfg.noise_density_dbm_hz, cfg.bandwidth_hz)

    def snapshot(self, ue_id, shadowing_db=0.0):
        g = float(self.serving_gain[ue_id]) * 10.0 ** (shadowing_db / 10.0)
        pairs = tuple((self.neighbour_power_mw, float(c)) for c in self.interferer_gain[ue_id])
        return ChannelSnapshot(ue_id, g, pairs, self.noise_mw)

    def sinr(self, serving_power_mw, shadowing_db=None):
        """Vectorised SINR for every UE at once."""
        g = self.serving_gain
        if shadowing_db is not None:
            g = g * 10.0 ** (np.asarray(shadowing_db) / 10.0)
        return serving_power_mw * g / (self.interference_mw + self.noise_mw)


def shadow_redraw_interval_ms(ue_speed_mps):
    return 1000.0 * SHADOW_DECORRELATION_M / ue_speed_mps
