"""Full-digital ISAC beamformer: weighted target fitting on the power sphere.

The design problem is::

    min_F  rho ||F - F_opt||^2 + (1 - rho) ||F - F_rad||^2   s.t. ||F||^2 = N_s

solved either by semidefinite relaxation of its homogenised QCQP form or in
closed form.  Stacking ``A = [sqrt(rho) I; sqrt(1-rho) I]`` gives
``A^H A = I``, so on the sphere the objective is linear in F and the optimum
is the normalised weighted average of the two targets.  The closed form is
the oracle that the relaxation is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import sdp
from .array import RadarBeamformer
from .errors import DegenerateError, DimensionError, InvalidInputError


@dataclass(frozen=True)
class TradeoffConfig:
    rho: float
    n_streams: int

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise InvalidInputError(f"rho must lie in [0, 1], got {self.rho}")
        if self.n_streams < 1:
            raise InvalidInputError("n_streams must be at least 1")


@dataclass(frozen=True)
class StackedTargets:
    a_matrix: np.ndarray
    b_matrix: np.ndarray


@dataclass(frozen=True)
class QcqpForm:
    c_matrix: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    n_streams: int
    n_tx: int


@dataclass
class FdBeamformer:
    matrix: np.ndarray
    objective: float
    method: str
    sdp_value: float | None = None
    sdp_status: str | None = None
    eigen_ratio: float | None = None

    def residuals(self, f_opt, f_rad):
        """Distances to the communication and radar targets."""
        return (float(np.linalg.norm(self.matrix - f_opt)),
                float(np.linalg.norm(self.matrix - f_rad)))


def weighted_objective(F, f_opt, f_rad, rho) -> float:
    """``rho ||F - F_opt||^2 + (1 - rho) ||F - F_rad||^2``."""
    return float(rho * np.linalg.norm(F - f_opt) ** 2
                 + (1 - rho) * np.linalg.norm(F - f_rad) ** 2)


def _unitary_dft(n: int) -> np.ndarray:
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def align_radar_target(f_rad, n_streams: int, f_opt=None, *, scale: bool = True) -> np.ndarray:
    """Reshape the N_t x K radar beamformer to N_t x N_s.

    For K < N_s the columns are spread by the first K rows of an N_s-point
    unitary DFT, which keeps ``F F^H`` unchanged.  For K > N_s the first N_s
    columns of a K-point DFT are used instead.  With ``scale`` the result is
    normalised to the power budget ``||F||_F^2 = N_s``.

    ``f_opt`` is accepted for interface symmetry and only used to check shape.
    """
    F = f_rad.matrix if isinstance(f_rad, RadarBeamformer) else np.asarray(f_rad)
    n_tx, K = F.shape
    if f_opt is not None and np.shape(f_opt) != (n_tx, n_streams):
        raise DimensionError("f_opt must be N_t x N_s")
    if K < n_streams:
        F = F @ _unitary_dft(n_streams)[:K, :]
    elif K > n_streams:
        F = F @ _unitary_dft(K)[:, :n_streams]
    else:
        F = F.astype(complex, copy=True)
    if scale:
        norm = np.linalg.norm(F)
        if norm < 1e-12:
            raise DegenerateError("radar target has zero norm")
        F = F * (np.sqrt(n_streams) / norm)
    return F


def stack_targets(f_opt, f_rad_aligned, config: TradeoffConfig) -> StackedTargets:
    f_opt = np.asarray(f_opt)
    f_rad_aligned = np.asarray(f_rad_aligned)
    if f_opt.shape != f_rad_aligned.shape or f_opt.shape[1] != config.n_streams:
        raise DimensionError(
            f"dimension-mismatch: {f_opt.shape} vs {f_rad_aligned.shape}")
    n_tx = f_opt.shape[0]
    r, q = np.sqrt(config.rho), np.sqrt(1.0 - config.rho)
    eye = np.eye(n_tx)
    return StackedTargets(
        a_matrix=np.vstack([r * eye, q * eye]).astype(complex),
        b_matrix=np.vstack([r * f_opt, q * f_rad_aligned]).astype(complex),
    )


def closed_form_solution(f_opt, f_rad_aligned, config: TradeoffConfig) -> FdBeamformer:
    """Global optimum ``sqrt(N_s) M / ||M||`` with ``M`` the weighted average."""
    rho = config.rho
    M = rho * np.asarray(f_opt) + (1 - rho) * np.asarray(f_rad_aligned)
    norm = np.linalg.norm(M)
    if norm < 1e-12:
        raise DegenerateError("degenerate-target: weighted target is zero")
    F = np.sqrt(config.n_streams) * M / norm
    return FdBeamformer(F, weighted_objective(F, f_opt, f_rad_aligned, rho), "closed-form")


def homogenize(targets: StackedTargets, n_streams: int) -> QcqpForm:
    """Homogeneous QCQP data for ``min ||A F - B||^2`` over vec(F) and t."""
    A, B = targets.a_matrix, targets.b_matrix
    n_tx = A.shape[1]
    big_a = np.kron(np.eye(n_streams), A)
    vec_b = B.reshape(-1, order="F")
    n = n_tx * n_streams
    cross = -big_a.conj().T @ vec_b
    C = np.empty((n + 1, n + 1), dtype=complex)
    C[:n, :n] = big_a.conj().T @ big_a
    C[:n, n] = cross
    C[n, :n] = cross.conj()
    C[n, n] = np.vdot(vec_b, vec_b).real
    a1 = np.zeros((n + 1, n + 1), dtype=complex)
    a1[:n, :n] = np.eye(n)
    a2 = np.zeros((n + 1, n + 1), dtype=complex)
    a2[n, n] = 1.0
    return QcqpForm(C, a1, a2, n_streams, n_tx)


def lifted_vector(F, t=1.0) -> np.ndarray:
    """``[vec(F); t]``, the rank-one factor of the lifted variable."""
    return np.append(np.asarray(F).reshape(-1, order="F"), t)


def _objective_from_form(form: QcqpForm, F) -> float:
    f = lifted_vector(F)
    return float(np.vdot(f, form.c_matrix @ f).real)


def _rescale(F, n_streams):
    return F * (np.sqrt(n_streams) / np.linalg.norm(F))


def solve_sdr(form: QcqpForm, sdp_tol: float = 1e-7, *, max_iter: int = 100,
              randomization: int = 0, seed: int = 0) -> FdBeamformer:
    """Semidefinite relaxation followed by rank-one extraction.

    The dominant eigenvector of the relaxed solution is split into its
    beamformer and ``t`` parts; the beamformer part is divided by the phase
    of ``t`` and rescaled onto the power sphere.  ``randomization > 0`` also
    tries that many Gaussian draws from the relaxed covariance and keeps the
    best candidate.
    """
    n_s, n_tx = form.n_streams, form.n_tx
    problem = sdp.SdpProblem(form.c_matrix, [(form.a1, float(n_s)), (form.a2, 1.0)])
    sol = sdp.solve(problem, tol=sdp_tol, max_iter=max_iter)
    X = 0.5 * (sol.x_matrix + sol.x_matrix.conj().T)
    w, V = np.linalg.eigh(X)
    u = V[:, -1] * np.sqrt(max(w[-1], 0.0))
    ratio = float(w[-1] / w[-2]) if w[-2] > 0 else np.inf

    def extract(vec):
        head, t = vec[:-1], vec[-1]
        if abs(t) < 1e-8:
            head = head * (abs(head[np.argmax(np.abs(head))]) / head[np.argmax(np.abs(head))])
        else:
            head = head / (t / abs(t))
        F = head.reshape(n_tx, n_s, order="F")
        if np.linalg.norm(F) < 1e-14:
            raise DegenerateError("extraction-degenerate: zero beamformer part")
        return _rescale(F, n_s)

    best = extract(u)
    best_obj = _objective_from_form(form, best)
    if randomization:
        rng = np.random.default_rng(seed)
        root = V * np.sqrt(np.clip(w, 0, None))
        for _ in range(randomization):
            z = (rng.standard_normal(len(w)) + 1j * rng.standard_normal(len(w))) / np.sqrt(2)
            cand = extract(root @ z)
            obj = _objective_from_form(form, cand)
            if obj < best_obj:
                best, best_obj = cand, obj
    return FdBeamformer(best, best_obj, "sdr", sdp_value=sol.primal_value,
                        sdp_status=sol.status, eigen_ratio=ratio)


def solve_full_digital(f_opt, f_rad_aligned, config: TradeoffConfig, method: str = "sdr",
                       sdp_tol: float = 1e-7) -> FdBeamformer:
    """Convenience front end for both methods."""
    if method == "closed-form":
        return closed_form_solution(f_opt, f_rad_aligned, config)
    if method == "sdr":
        form = homogenize(stack_targets(f_opt, f_rad_aligned, config), config.n_streams)
        return solve_sdr(form, sdp_tol)
    raise InvalidInputError(f"unknown full-digital method {method!r}")
