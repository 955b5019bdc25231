"""Gaussian bearing and heading models plus noise sampling.

Angular residuals are wrapped into (-pi, pi] before the Gaussian density is
evaluated, so all likelihoods are invariant under adding full turns to any
angle argument.  Noise magnitudes are scalar standard deviations in radians;
configuration files and CLI flags carry degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometry
from .geometry import Pose2, wrap_angle

_LOG_2PI = math.log(2.0 * math.pi)
_ZERO_SIGMA_TOL = 1e-9


@dataclass(frozen=True)
class NoiseConfig:
    """Bearing and motion-heading noise standard deviations, in radians."""

    sigma_v: float
    sigma_w: float

    def __post_init__(self):
        if self.sigma_v < 0.0 or self.sigma_w < 0.0:
            raise ValueError("noise standard deviations must be >= 0")

    @classmethod
    def from_degrees(cls, sigma_v_deg: float, sigma_w_deg: float) -> "NoiseConfig":
        return cls(math.radians(sigma_v_deg), math.radians(sigma_w_deg))

    @property
    def sigma_v_deg(self) -> float:
        return math.degrees(self.sigma_v)

    @property
    def sigma_w_deg(self) -> float:
        return math.degrees(self.sigma_w)


@dataclass(frozen=True)
class Observation:
    """Bearings to the three landmarks of one triplet at one time step."""

    time_index: int
    triplet_id: tuple
    bearings: tuple[float, float, float]  # to A, B, C; body frame

    def __post_init__(self):
        object.__setattr__(self, "bearings", tuple(wrap_angle(b) for b in self.bearings))


@dataclass(frozen=True)
class Action:
    """Commanded motion heading between a time step and the next."""

    time_index: int
    psi: float

    def __post_init__(self):
        object.__setattr__(self, "psi", wrap_angle(self.psi))


def gaussian_logpdf(residual, sigma):
    """Log density of wrapped angular residuals; sigma=0 degenerates to a
    tolerance delta (0 log-density on the spike, -inf off it)."""
    residual = np.asarray(residual, dtype=float)
    if sigma <= 0.0:
        return np.where(np.abs(residual) <= _ZERO_SIGMA_TOL, 0.0, -np.inf)
    return -0.5 * (residual / sigma) ** 2 - math.log(sigma) - 0.5 * _LOG_2PI


def bearing_loglik(phi: float, landmark, pose: Pose2, sigma_v: float) -> float:
    """Log likelihood of a measured body-frame bearing to a landmark."""
    landmark = np.asarray(landmark, dtype=float)
    dx = landmark[0] - pose.x
    dy = landmark[1] - pose.y
    if dx * dx + dy * dy < 1e-24:
        raise DegenerateGeometry("pose coincides with the landmark")
    predicted = np.arctan2(dy, dx) - pose.alpha
    return float(gaussian_logpdf(wrap_angle(phi - predicted), sigma_v))


def motion_loglik(pose_prev: Pose2, pose_next: Pose2, psi: float, sigma_w: float) -> float:
    """Log likelihood of a heading command given two consecutive positions.

    Only positions enter: the model does not constrain orientation.
    """
    dx = pose_next.x - pose_prev.x
    dy = pose_next.y - pose_prev.y
    if dx * dx + dy * dy < 1e-24:
        raise DegenerateGeometry("consecutive poses share a position")
    return float(gaussian_logpdf(wrap_angle(psi - np.arctan2(dy, dx)), sigma_w))


def true_bearing(pose: Pose2, landmark) -> float:
    landmark = np.asarray(landmark, dtype=float)
    return wrap_angle(np.arctan2(landmark[1] - pose.y, landmark[0] - pose.x) - pose.alpha)


def sample_observation(
    pose: Pose2,
    landmarks,
    triplet_id,
    time_index: int,
    noise: NoiseConfig,
    rng: np.random.Generator,
) -> Observation:
    """Noisy bearings from a true pose to the triplet's three landmarks."""
    bearings = []
    for lm in landmarks:
        b = true_bearing(pose, lm)
        if noise.sigma_v > 0.0:
            b = wrap_angle(b + rng.normal(0.0, noise.sigma_v))
        bearings.append(float(b))
    return Observation(time_index=time_index, triplet_id=tuple(triplet_id), bearings=tuple(bearings))


def sample_action(
    pose_prev: Pose2,
    pose_next: Pose2,
    time_index: int,
    noise: NoiseConfig,
    rng: np.random.Generator,
) -> Action:
    """Noisy heading command between two consecutive true poses."""
    psi = math.atan2(pose_next.y - pose_prev.y, pose_next.x - pose_prev.x)
    if noise.sigma_w > 0.0:
        psi = wrap_angle(psi + rng.normal(0.0, noise.sigma_w))
    return Action(time_index=time_index, psi=float(psi))
