"""Link-level physics: array gain, path loss, received power, SINR, throughput.

All gains are linear unless a name says dB.  The transmit pattern is the
uniform-linear-array factor steered in cosine space:

    U(theta, theta_b) = [sin(psi) / psi]^2,
    psi = (n_antennas / 2) * 2*pi*d_a * (cos(theta) - cos(theta_b)),

with d_a in wavelengths, so U peaks at 1 exactly when theta == theta_b and
first nulls sit at |cos(theta) - cos(theta_b)| = 1 / (n_antennas * d_a).
Transmit gain is g_max * U.

Distance attenuation uses the LOS model 128.1 + 37.6*log10(d_km) by default;
this model replaces the free-space (lambda / 4*pi*R)^2 term entirely so that
distance is not double counted.  A "free_space" mode computing the raw
spherical-spreading term is kept for unit tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .codebook import BeamCodebook
from .errors import AssignmentError


@dataclass(frozen=True)
class ChannelParams:
    p_t_dbm: float = 40.0          # transmit power
    noise_dbm: float = -10.0       # total noise power (bandwidth product folded in)
    wavelength_m: float = 0.005    # 60 GHz carrier
    n_antennas: int = 64
    d_a: float = 0.5               # element spacing in wavelengths
    g_r: float = 1.0               # receive antenna gain, linear
    g_max: float | None = None     # peak transmit array gain; defaults to n_antennas
    bandwidth_hz: float = 20e6     # per-UE bandwidth
    path_loss_mode: str = "los_model"   # "los_model" | "free_space"

    def __post_init__(self) -> None:
        if self.wavelength_m <= 0:
            raise ValueError("wavelength must be positive")
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth must be positive")
        if self.n_antennas < 1:
            raise ValueError("need at least one antenna element")
        if not 0 < self.d_a <= 1:
            raise ValueError("element spacing must be in (0, 1] wavelengths")
        if self.g_r < 0:
            raise ValueError("receive gain must be non-negative")
        if self.g_max is not None and self.g_max < 1:
            raise ValueError("peak transmit gain must be >= 1")
        if self.path_loss_mode not in ("los_model", "free_space"):
            raise ValueError(f"unknown path_loss_mode {self.path_loss_mode!r}")

    @property
    def peak_gain(self) -> float:
        return float(self.n_antennas) if self.g_max is None else self.g_max

    @property
    def p_t_watts(self) -> float:
        return dbm_to_watts(self.p_t_dbm)

    @property
    def noise_watts(self) -> float:
        return dbm_to_watts(self.noise_dbm)


def db_to_linear(x_db: float) -> float:
    """10^(x/10): dB to power ratio, or dBm to milliwatts."""
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise ValueError("cannot express a non-positive power in dB")
    return 10.0 * math.log10(x)


def dbm_to_watts(x_dbm: float) -> float:
    return db_to_linear(x_dbm) * 1e-3


def path_loss_db(distance_km: float) -> float:
    """LOS path loss 128.1 + 37.6*log10(d) for d in kilometers."""
    if distance_km <= 0:
        raise ValueError(f"distance must be positive, got {distance_km}")
    return 128.1 + 37.6 * math.log10(distance_km)


def _check_angle(name: str, value) -> None:
    arr = np.asarray(value, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= math.pi):
        raise ValueError(f"{name} must lie in the open interval (0, pi)")


def array_gain(theta, theta_b, params: ChannelParams):
    """Transmit array gain toward angle theta from a beam steered at theta_b.

    Accepts scalars or arrays (broadcast).  Returns g_max * U with U the
    squared-sinc pattern; the theta == theta_b limit evaluates to g_max
    exactly.
    """
    _check_angle("theta", theta)
    _check_angle("theta_b", theta_b)
    dcos = np.cos(theta) - np.cos(theta_b)
    # np.sinc(x) = sin(pi x)/(pi x) and handles x = 0 exactly
    psi_over_pi = params.n_antennas * params.d_a * dcos
    u = np.sinc(psi_over_pi) ** 2
    out = params.peak_gain * u
    return float(out) if np.isscalar(theta) and np.isscalar(theta_b) else out


def path_gain_linear(params: ChannelParams, distance_km: float) -> float:
    """Distance-dependent power factor under the configured mode."""
    if params.path_loss_mode == "free_space":
        r_m = distance_km * 1000.0
        if r_m <= 0:
            raise ValueError("distance must be positive")
        return (params.wavelength_m / (4.0 * math.pi * r_m)) ** 2
    return db_to_linear(-path_loss_db(distance_km))


def received_power(
    params: ChannelParams,
    distance_km: float,
    theta: float,
    theta_b: float,
) -> float:
    """Received power in watts: P_t * G_t(theta; theta_b) * G_r * path gain."""
    g_t = array_gain(theta, theta_b, params)
    return params.p_t_watts * g_t * params.g_r * path_gain_linear(params, distance_km)


def _validate_assignment(assignment: Sequence[int], n_ue: int, n_beams: int) -> np.ndarray:
    arr = np.asarray(assignment)
    if arr.shape != (n_ue,):
        raise AssignmentError(
            f"assignment must give exactly one beam per UE ({n_ue}), got shape {arr.shape}"
        )
    if not np.issubdtype(arr.dtype, np.integer):
        raise AssignmentError("beam indices must be integers")
    if np.any(arr < 0) or np.any(arr >= n_beams):
        raise AssignmentError(f"beam indices must lie in [0, {n_beams})")
    return arr


@dataclass(frozen=True)
class StepOutcome:
    sinr: np.ndarray        # per-UE linear SINR
    rate_bps: np.ndarray    # per-UE W * log2(1 + SINR)
    total_bps: float
    se_total: float         # sum of log2(1 + SINR), bits/s/Hz


def sinr(scene, params: ChannelParams, assignment: Sequence[int], cb: BeamCodebook, u: int) -> float:
    """Linear SINR at UE u: own-beam power over noise plus other-beam power.

    Interference from the beam serving u' is the power received at u's own
    angle and distance from that beam's pattern.
    """
    arr = _validate_assignment(assignment, scene.n_ue, cb.n_beams)
    if not 0 <= u < scene.n_ue:
        raise IndexError(f"UE index {u} out of range")
    theta_u = scene.angle_to_bs(u)
    d_u = scene.distance_km(u)
    p_signal = received_power(params, d_u, theta_u, cb.angle_of(int(arr[u])))
    interference = 0.0
    for v in range(scene.n_ue):
        if v == u:
            continue
        interference += received_power(params, d_u, theta_u, cb.angle_of(int(arr[v])))
    return p_signal / (params.noise_watts + interference)


def throughput(scene, params: ChannelParams, assignment: Sequence[int], cb: BeamCodebook) -> StepOutcome:
    """Per-UE and total rates for a complete assignment."""
    _validate_assignment(assignment, scene.n_ue, cb.n_beams)
    vals = np.array([sinr(scene, params, assignment, cb, u) for u in range(scene.n_ue)])
    se = np.log2(1.0 + vals)
    rates = params.bandwidth_hz * se
    return StepOutcome(
        sinr=vals,
        rate_bps=rates,
        total_bps=float(rates.sum()),
        se_total=float(se.sum()),
    )
