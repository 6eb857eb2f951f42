"""ULA steering vectors, subarray radar beamformer and beampatterns."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidInputError
from .kinematics import AoI

DEFAULT_GRID_STEP_DEG = 0.1


@dataclass(frozen=True)
class ArrayConfig:
    n_antennas: int
    spacing_over_wavelength: float = 0.5

    def __post_init__(self):
        if self.n_antennas < 1:
            raise InvalidInputError("n_antennas must be at least 1")
        if self.spacing_over_wavelength <= 0:
            raise InvalidInputError("spacing_over_wavelength must be positive")


@dataclass(frozen=True)
class RadarLinkBudget:
    """Radar range equation constants.

    Only the fourth-power law between beam power and range matters for the
    antenna split, so these values never enter ``allocate_antennas``.
    """
    antenna_gain: float = 1.0
    wavelength: float = 1.0
    rcs: float = 1.0
    min_detectable_power: float = 1.0
    per_antenna_power: float = 1.0

    @property
    def omega(self) -> float:
        return (self.antenna_gain ** 2 * self.wavelength ** 2 * self.rcs
                / ((4 * np.pi) ** 3 * self.min_detectable_power)) ** 0.25

    def max_range(self, n_antennas: int) -> float:
        return self.omega * (n_antennas * self.per_antenna_power) ** 0.25


@dataclass(frozen=True)
class RadarBeamformer:
    matrix: np.ndarray
    pointing_angles: tuple[float, ...]
    subarray_sizes: tuple[int, ...]

    @property
    def covariance(self) -> np.ndarray:
        return self.matrix @ self.matrix.conj().T


@dataclass(frozen=True)
class Beampattern:
    grid: np.ndarray
    power: np.ndarray

    @property
    def grid_deg(self) -> np.ndarray:
        return np.degrees(self.grid)

    @property
    def power_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.power)


def default_grid(step_deg: float = DEFAULT_GRID_STEP_DEG) -> np.ndarray:
    """Uniform angle grid over [-90, 90] degrees, in radians."""
    n = int(round(180.0 / step_deg))
    return np.radians(np.linspace(-90.0, 90.0, n + 1))


def steering_vector(config: ArrayConfig, angle: float,
                    length: int | None = None) -> np.ndarray:
    """Array response ``[1, e^{j 2pi (d/lambda) sin(angle)}, ...]``."""
    if length is None:
        length = config.n_antennas
    if length < 1:
        raise InvalidInputError("length must be at least 1")
    phase = 2j * np.pi * config.spacing_over_wavelength * np.sin(angle)
    return np.exp(phase * np.arange(length))


def steering_matrix(config: ArrayConfig, angles, length: int | None = None) -> np.ndarray:
    """Steering vectors for several angles, stacked as columns."""
    if length is None:
        length = config.n_antennas
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    phase = 2j * np.pi * config.spacing_over_wavelength * np.sin(angles)
    return np.exp(np.outer(np.arange(length), phase))


def pointing_angles(aoi: AoI) -> np.ndarray:
    """Beam directions towards each AoI centre, measured from the driving axis."""
    dx, dy = aoi.centers[:, 0], aoi.centers[:, 1]
    if np.any((dx == 0) & (dy == 0)):
        raise InvalidInputError("degenerate-waypoint: centre coincides with origin")
    return np.arctan2(dx, dy)


def sensing_distances(aoi: AoI) -> np.ndarray:
    """Range each beam must reach: distance to the centre plus safety radius."""
    return np.hypot(aoi.centers[:, 0], aoi.centers[:, 1]) + aoi.radius


def allocate_antennas(distances, total: int) -> np.ndarray:
    """Split ``total`` antennas in proportion to the fourth power of range.

    Shares are rounded by the largest-remainder method with every subarray
    guaranteed at least one element, so the counts always sum to ``total``.
    """
    d = np.asarray(distances, dtype=float)
    if d.ndim != 1 or d.size == 0:
        raise InvalidInputError("distances must be a non-empty 1-D sequence")
    if np.any(d <= 0):
        raise InvalidInputError("distances must be positive")
    if total < d.size:
        raise InvalidInputError(
            f"insufficient-antennas: {total} antennas for {d.size} subarrays")
    weights = d ** 4
    quota = total * weights / weights.sum()
    counts = np.maximum(np.floor(quota).astype(int), 1)
    # entries lifted to the floor of one have a negative remainder
    remainder = quota - counts
    # stable sorts keep ties in waypoint order
    while counts.sum() < total:
        order = np.argsort(-remainder, kind="stable")
        counts[order[0]] += 1
        remainder[order[0]] = -np.inf
    while counts.sum() > total:
        spare = np.where(counts > 1, quota - counts, np.inf)
        counts[np.argmin(spare)] -= 1
    return counts


def synthesize_radar_beamformer(angles, sizes, config: ArrayConfig) -> RadarBeamformer:
    """Block-diagonal beamformer with one contiguous subarray per angle."""
    angles = np.asarray(angles, dtype=float)
    sizes = np.asarray(sizes, dtype=int)
    if angles.shape != sizes.shape or angles.ndim != 1:
        raise DimensionError("size-mismatch: angles and sizes must align")
    if sizes.sum() != config.n_antennas or np.any(sizes < 1):
        raise DimensionError(
            f"size-mismatch: subarray sizes sum to {sizes.sum()}, "
            f"array has {config.n_antennas}")
    matrix = np.zeros((config.n_antennas, len(sizes)), dtype=complex)
    start = 0
    for k, (theta, n_k) in enumerate(zip(angles, sizes)):
        matrix[start:start + n_k, k] = steering_vector(config, theta, n_k)
        start += n_k
    return RadarBeamformer(matrix, tuple(angles.tolist()), tuple(sizes.tolist()))


def beampattern(covariance: np.ndarray, config: ArrayConfig, grid=None) -> Beampattern:
    """Transmit power ``a(theta)^H R a(theta)`` over an angle grid."""
    R = np.asarray(covariance)
    n = config.n_antennas
    if R.shape != (n, n):
        raise DimensionError(f"covariance must be {n}x{n}, got {R.shape}")
    scale = max(np.abs(R).max(), 1.0)
    if np.abs(R - R.conj().T).max() > 1e-9 * scale:
        raise InvalidInputError("non-hermitian-input")
    if np.linalg.eigvalsh(R).min() < -1e-9 * scale * n:
        raise InvalidInputError("non-hermitian-input: covariance is not PSD")
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    A = steering_matrix(config, grid)
    power = np.einsum("ig,ij,jg->g", A.conj(), R, A).real
    return Beampattern(grid, np.maximum(power, 0.0))


def local_maxima(pattern: Beampattern) -> np.ndarray:
    """Indices of strict interior local maxima, highest first."""
    p = pattern.power
    idx = np.flatnonzero((p[1:-1] > p[:-2]) & (p[1:-1] >= p[2:])) + 1
    return idx[np.argsort(-p[idx], kind="stable")]
