"""Spectral efficiency, energy efficiency and beampattern fidelity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .array import Beampattern
from .channel import Channel, optimal_beamformers
from .errors import DimensionError, InvalidInputError


@dataclass(frozen=True)
class LinkBudget:
    rx_power: float = 1.0
    noise_variance: float = 1.0

    def __post_init__(self):
        if self.rx_power <= 0 or self.noise_variance <= 0:
            raise InvalidInputError("powers must be positive")

    @property
    def snr(self) -> float:
        return self.rx_power / self.noise_variance

    @classmethod
    def from_db(cls, snr_db: float) -> "LinkBudget":
        return cls(rx_power=10.0 ** (snr_db / 10.0), noise_variance=1.0)


@dataclass(frozen=True)
class PowerModel:
    """Per-component transmitter power draw in watts."""
    p_bb: float = 10.0
    p_rf: float = 0.3
    p_pa: float = 0.1
    p_ps: float = 0.01

    def __post_init__(self):
        if min(self.p_bb, self.p_rf, self.p_pa, self.p_ps) < 0:
            raise InvalidInputError("power values must be non-negative")


def _matrix(channel) -> np.ndarray:
    return channel.matrix if isinstance(channel, Channel) else np.asarray(channel)


def _logdet2(M) -> float:
    sign, logdet = np.linalg.slogdet(M)
    return float(logdet / np.log(2.0))


def spectral_efficiency(channel, combiner, precoder, budget: LinkBudget) -> float:
    """``log2 det(I + snr W H F F^H H^H W^H)`` in bits/s/Hz."""
    H, W, F = _matrix(channel), np.asarray(combiner), np.asarray(precoder)
    if W.shape[1] != H.shape[0] or H.shape[1] != F.shape[0]:
        raise DimensionError(
            f"dimension-mismatch: W {W.shape}, H {H.shape}, F {F.shape}")
    G = W @ H @ F
    return _logdet2(np.eye(W.shape[0]) + budget.snr * G @ G.conj().T)


def mismatched_spectral_efficiency(known, actual, combiner, precoder,
                                   budget: LinkBudget) -> float:
    """Rate when the beamformers were designed on ``known`` but the link is ``actual``.

    The unknown part ``actual - known`` is treated as interference: its
    contribution ``W (H_d - H) F`` enters the noise covariance instead of
    the signal term.
    """
    H, Hd = _matrix(known), _matrix(actual)
    W, F = np.asarray(combiner), np.asarray(precoder)
    if H.shape != Hd.shape:
        raise DimensionError("known and actual channels differ in shape")
    G = W @ H @ F
    E = W @ (Hd - H) @ F
    noise = W @ W.conj().T + budget.snr * E @ E.conj().T
    signal = budget.snr * G @ G.conj().T
    n = W.shape[0]
    return _logdet2(np.eye(n) + np.linalg.solve(noise, signal))


def spectral_efficiency_upper(channel, n_streams: int, budget: LinkBudget) -> float:
    """Rate of the SVD-optimal transmit/receive pair."""
    pair = optimal_beamformers(channel if isinstance(channel, Channel)
                               else Channel(np.asarray(channel)), n_streams)
    return spectral_efficiency(channel, pair.w_opt, pair.f_opt, budget)


def power_sum(architecture: str, n_tx: int, n_rf: int, model: PowerModel) -> float:
    """Transmitter component power for a full-digital or hybrid front end."""
    if n_tx < 1 or n_rf < 1:
        raise InvalidInputError("counts must be at least 1")
    if architecture == "hybrid":
        return model.p_bb + n_rf * model.p_rf + n_tx * model.p_pa + n_rf * n_tx * model.p_ps
    if architecture == "full-digital":
        return model.p_bb + n_tx * (model.p_rf + model.p_pa + model.p_ps)
    raise InvalidInputError(f"unknown architecture {architecture!r}")


def energy_efficiency(rate: float, total_power: float) -> float:
    if total_power <= 0:
        raise InvalidInputError("zero-power: total power must be positive")
    return rate / total_power


def beampattern_mse(achieved: Beampattern, desired: Beampattern) -> float:
    """Mean squared difference after normalising each pattern to its peak."""
    if achieved.grid.shape != desired.grid.shape or not np.allclose(achieved.grid, desired.grid):
        raise InvalidInputError("grid-mismatch")
    a = achieved.power / achieved.power.max()
    d = desired.power / desired.power.max()
    return float(np.mean((a - d) ** 2))
