"""Saleh-Valenzuela mmWave channels and their SVD-optimal beamformers.

Random draws go through :func:`child_rng`, which derives an independent
generator from ``(master_seed, *keys)``.  Monte-Carlo workers each get their
own key, so results do not depend on how realizations are scheduled.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
import pathlib

import numpy as np

from .array import ArrayConfig, steering_matrix
from .errors import DimensionError, InvalidInputError, RankDeficientError

RANK_TOL = 1e-9


def child_rng(master_seed: int, *keys) -> np.random.Generator:
    """Generator for one (experiment, realization) stream.

    String keys are hashed with CRC-32 so that the stream depends only on
    the key values, never on call order.
    """
    words = [int(master_seed)]
    for key in keys:
        if isinstance(key, str):
            words.append(zlib.crc32(key.encode()))
        else:
            words.append(int(key))
    return np.random.default_rng(np.random.SeedSequence(words))


def complex_gaussian(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@dataclass(frozen=True)
class ChannelConfig:
    n_tx: int = 81
    n_rx: int = 16
    n_paths: int = 10
    gain_variance: float = 1.0
    angle_range: tuple[float, float] = (-np.pi / 2, np.pi / 2)
    spacing_over_wavelength: float = 0.5

    def __post_init__(self):
        if min(self.n_tx, self.n_rx, self.n_paths) < 1:
            raise InvalidInputError("antenna and path counts must be at least 1")
        if self.gain_variance <= 0:
            raise InvalidInputError("gain_variance must be positive")


@dataclass(frozen=True)
class Path:
    gain: complex
    aod: float
    aoa: float


@dataclass(frozen=True)
class Channel:
    """``matrix`` is N_r x N_t.  ``paths`` is None once the matrix was perturbed."""
    matrix: np.ndarray
    paths: tuple[Path, ...] | None = None
    spacing_over_wavelength: float = 0.5

    @property
    def n_rx(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_tx(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class OptimalPair:
    f_opt: np.ndarray
    w_opt: np.ndarray
    singular_values: np.ndarray = field(repr=False)


def channel_from_paths(paths, n_tx: int, n_rx: int,
                       spacing_over_wavelength: float = 0.5) -> Channel:
    """Sum of rank-one path contributions ``gain * a_r(aoa) a_t(aod)^H``."""
    paths = tuple(paths)
    gains = np.array([p.gain for p in paths], dtype=complex)
    a_t = steering_matrix(ArrayConfig(n_tx, spacing_over_wavelength), [p.aod for p in paths])
    a_r = steering_matrix(ArrayConfig(n_rx, spacing_over_wavelength), [p.aoa for p in paths])
    H = (a_r * gains) @ a_t.conj().T
    return Channel(H, paths, spacing_over_wavelength)


def generate_channel(config: ChannelConfig, seed, *keys) -> Channel:
    """Draw one channel realization.  No normalization factor is applied."""
    rng = child_rng(seed, "channel", *keys)
    L = config.n_paths
    gains = complex_gaussian(rng, L, config.gain_variance)
    lo, hi = config.angle_range
    aod = rng.uniform(lo, hi, L)
    aoa = rng.uniform(lo, hi, L)
    paths = [Path(complex(g), float(t), float(r)) for g, t, r in zip(gains, aod, aoa)]
    return channel_from_paths(paths, config.n_tx, config.n_rx,
                              config.spacing_over_wavelength)


def _fix_phase(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    pivot = vectors[idx, np.arange(vectors.shape[1])]
    return vectors * (np.abs(pivot) / pivot)


def numerical_rank(matrix: np.ndarray, tol: float = RANK_TOL) -> int:
    s = np.linalg.svd(matrix, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def optimal_beamformers(channel: Channel, n_streams: int) -> OptimalPair:
    """Top ``n_streams`` right/left singular vectors of the channel.

    Columns of ``f_opt`` have unit norm (no water-filling), so
    ``||f_opt||_F^2 = n_streams``; ``w_opt`` has orthonormal rows.
    """
    H = channel.matrix
    if n_streams < 1 or n_streams > min(H.shape):
        raise InvalidInputError(f"n_streams={n_streams} out of range for {H.shape}")
    U, s, Vh = np.linalg.svd(H)
    if s[0] == 0 or np.sum(s > RANK_TOL * s[0]) < n_streams:
        raise RankDeficientError(
            f"rank-deficient: channel rank below n_streams={n_streams}")
    V = _fix_phase(Vh[:n_streams].conj().T)
    Ur = _fix_phase(U[:, :n_streams])
    return OptimalPair(f_opt=V, w_opt=Ur.conj().T, singular_values=s[:n_streams])


def perturb(channel: Channel, sigma_e: float, seed, *keys) -> Channel:
    """Add an unknown time-varying part with per-entry variance ``sigma_e**2``."""
    if sigma_e < 0:
        raise InvalidInputError("sigma_e must be non-negative")
    if sigma_e == 0:
        return Channel(channel.matrix.copy(), None, channel.spacing_over_wavelength)
    rng = child_rng(seed, "perturb", *keys)
    H_e = complex_gaussian(rng, channel.matrix.shape, sigma_e ** 2)
    return Channel(channel.matrix + H_e, None, channel.spacing_over_wavelength)


def save_matrix(path, matrix: np.ndarray) -> None:
    """Write a complex matrix as text, one row per line of ``re,im`` pairs.

    Pairs are separated by single spaces; values use 17 significant digits
    so that a round trip is exact.
    """
    lines = [" ".join(f"{z.real:.17g},{z.imag:.17g}" for z in row)
             for row in np.atleast_2d(matrix)]
    pathlib.Path(path).write_text("\n".join(lines) + "\n")


def load_matrix(path) -> np.ndarray:
    rows = []
    for line in pathlib.Path(path).read_text().splitlines():
        if not line.strip():
            continue
        row = []
        for pair in line.split():
            re, im = pair.split(",")
            row.append(complex(float(re), float(im)))
        rows.append(row)
    if len({len(r) for r in rows}) > 1:
        raise DimensionError("ragged matrix file")
    return np.array(rows, dtype=complex)
