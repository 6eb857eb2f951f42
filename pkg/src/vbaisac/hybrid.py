"""Hybrid analog-digital beamformer by alternating minimisation.

The digital stage is a stacked least-squares fit for a fixed analog matrix;
the analog stage runs conjugate gradient on the complex circle manifold for
a fixed digital matrix.  Both stages never increase the weighted objective,
so the recorded trace is monotone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import child_rng
from .errors import InvalidInputError, RankDeficientError
from .fdsolver import weighted_objective
from .manifold import KroneckerObjective, riemannian_cg, unit_modulus


@dataclass(frozen=True)
class HybridConfig:
    n_rf: int
    rho: float
    n_streams: int
    outer_max: int = 50
    outer_tol: float = 1e-5
    inner_tol: float = 1e-6
    inner_max: int = 500

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise InvalidInputError("rho must lie in [0, 1]")
        if self.n_rf < self.n_streams:
            raise InvalidInputError("need at least as many RF chains as streams")


@dataclass
class HybridBeamformer:
    f_rf: np.ndarray
    f_bb: np.ndarray
    objective_trace: list[float] = field(default_factory=list)
    objective: float = np.nan
    iterations: int = 0

    @property
    def precoder(self) -> np.ndarray:
        return self.f_rf @ self.f_bb


def digital_step(f_rf, f_opt, f_rad_aligned, rho) -> np.ndarray:
    """Least-squares digital beamformer ``pinv(A) B`` for the stacked fit."""
    f_rf = np.asarray(f_rf)
    s = np.linalg.svd(f_rf, compute_uv=False)
    if s[-1] <= 1e-10 * s[0]:
        raise RankDeficientError("rank-deficient-analog: F_RF lacks full column rank")
    r, q = np.sqrt(rho), np.sqrt(1.0 - rho)
    A = np.vstack([r * f_rf, q * f_rf])
    B = np.vstack([r * np.asarray(f_opt), q * np.asarray(f_rad_aligned)])
    return np.linalg.pinv(A) @ B


def analog_objective(f_bb, f_opt, f_rad_aligned, rho) -> KroneckerObjective:
    """Objective in ``p = vec(F_RF)`` using ``vec(F_RF F_BB) = (F_BB^T kron I) p``."""
    n_tx = np.shape(f_opt)[0]
    return KroneckerObjective.from_targets(
        f_bb, n_tx, np.asarray(f_opt).reshape(-1, order="F"),
        np.asarray(f_rad_aligned).reshape(-1, order="F"), rho)


def analog_step(f_bb, f_opt, f_rad_aligned, rho, f_rf_init, *, tol=1e-6,
                max_iter=500) -> np.ndarray:
    """Manifold update of the analog beamformer, warm-started at ``f_rf_init``."""
    obj = analog_objective(f_bb, f_opt, f_rad_aligned, rho)
    shape = np.shape(f_rf_init)
    res = riemannian_cg(obj, np.asarray(f_rf_init).reshape(-1, order="F"), tol, max_iter)
    return res.point.reshape(shape, order="F")


def random_analog(n_tx: int, n_rf: int, rng: np.random.Generator) -> np.ndarray:
    return unit_modulus(rng.uniform(0.0, 2 * np.pi, (n_tx, n_rf)))


def svd_analog(channel_matrix: np.ndarray, n_rf: int) -> np.ndarray:
    """Phases of the dominant right singular vectors of the channel."""
    _, _, Vh = np.linalg.svd(channel_matrix)
    V = Vh.conj().T
    if V.shape[1] < n_rf:
        raise InvalidInputError("channel has fewer right singular vectors than RF chains")
    return unit_modulus(np.angle(V[:, :n_rf]))


def alternating_minimize(config: HybridConfig, f_opt, f_rad_aligned, *, seed=0,
                         f_rf_init=None) -> HybridBeamformer:
    """Alternate digital and analog updates, then meet the power budget.

    The trace records the weighted objective after every outer iteration,
    before the final rescaling of F_BB; ``objective`` is the value after it.
    """
    f_opt = np.asarray(f_opt)
    n_tx = f_opt.shape[0]
    if config.n_rf > n_tx:
        raise InvalidInputError("more RF chains than antennas")
    rho = config.rho
    if f_rf_init is None:
        f_rf = random_analog(n_tx, config.n_rf, child_rng(seed, "hybrid-init"))
    else:
        f_rf = np.asarray(f_rf_init, dtype=complex)

    trace = []
    it = 0
    for it in range(1, config.outer_max + 1):
        f_bb = digital_step(f_rf, f_opt, f_rad_aligned, rho)
        f_rf = analog_step(f_bb, f_opt, f_rad_aligned, rho, f_rf,
                           tol=config.inner_tol, max_iter=config.inner_max)
        trace.append(weighted_objective(f_rf @ f_bb, f_opt, f_rad_aligned, rho))
        if len(trace) > 1:
            prev = trace[-2]
            if prev - trace[-1] <= config.outer_tol * max(prev, 1e-300):
                break
    f_bb = f_bb * (np.sqrt(config.n_streams) / np.linalg.norm(f_rf @ f_bb))
    return HybridBeamformer(
        f_rf=f_rf, f_bb=f_bb, objective_trace=trace,
        objective=weighted_objective(f_rf @ f_bb, f_opt, f_rad_aligned, rho),
        iterations=it)
