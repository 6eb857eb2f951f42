"""Conjugate-gradient optimisation on the complex circle manifold.

Points are complex vectors with unit-modulus entries.  The real inner
product ``Re <u, v>`` is used throughout, so the Euclidean gradient of a
real function of ``p`` is the vector ``g`` with ``df = Re(g^H dp)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, DimensionError

ARMIJO_C = 1e-4
SHRINK = 0.5
MAX_PHASE_STEP = 1.0


def _inner(u, v) -> float:
    return float(np.vdot(u, v).real)


def project_tangent(base: np.ndarray, ambient: np.ndarray) -> np.ndarray:
    """Remove the radial component of ``ambient`` at each entry of ``base``."""
    return ambient - (ambient * base.conj()).real * base


def retract(base: np.ndarray, step: np.ndarray) -> np.ndarray:
    """Entry-wise normalisation of ``base + step``."""
    moved = base + step
    mod = np.abs(moved)
    if np.any(mod < 1e-14):
        raise DegenerateError("degenerate-retraction: entry collapsed to zero")
    return moved / mod


def unit_modulus(phases) -> np.ndarray:
    return np.exp(1j * np.asarray(phases, dtype=float))


@dataclass
class QuadraticObjective:
    """``rho ||Q p - b_opt||^2 + (1 - rho) ||Q p - b_rad||^2``.

    Stored in the expanded form ``||Q p||^2 - 2 Re<Q p, target> + constant``
    with ``target = rho b_opt + (1 - rho) b_rad``.
    """
    q_matrix: np.ndarray
    target: np.ndarray
    constant: float
    _gram: np.ndarray = field(init=False, repr=False)
    _qt: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.q_matrix.shape[0] != self.target.shape[0]:
            raise DimensionError("q_matrix rows must match target length")
        self._gram = self.q_matrix.conj().T @ self.q_matrix
        self._qt = self.q_matrix.conj().T @ self.target

    @classmethod
    def from_targets(cls, q_matrix, b_opt, b_rad, rho):
        target = rho * b_opt + (1 - rho) * b_rad
        constant = (rho * np.vdot(b_opt, b_opt).real
                    + (1 - rho) * np.vdot(b_rad, b_rad).real)
        return cls(np.asarray(q_matrix), np.asarray(target), float(constant))

    def apply(self, p) -> np.ndarray:
        return self.q_matrix @ p

    def gram_apply(self, p) -> np.ndarray:
        return self._gram @ p

    def value(self, p) -> float:
        return float(np.vdot(p, self.gram_apply(p)).real
                     - 2 * np.vdot(self._qt, p).real + self.constant)

    def gradient(self, p) -> np.ndarray:
        return 2.0 * (self.gram_apply(p) - self._qt)


class KroneckerObjective(QuadraticObjective):
    """Quadratic objective with ``Q = F^T kron I_n`` kept in factored form.

    ``Q p = vec(P F)`` where ``P`` is ``p`` reshaped column-major to n rows,
    so nothing of size ``(n k)^2`` is ever formed.
    """

    def __init__(self, factor, n_rows, target, constant):
        self.factor = np.asarray(factor)
        self.n_rows = int(n_rows)
        self.target = np.asarray(target)
        self.constant = float(constant)
        self._ffh = self.factor @ self.factor.conj().T
        self._qt = self._mat(self.target) @ self.factor.conj().T
        self._qt = self._qt.reshape(-1, order="F")

    @classmethod
    def from_targets(cls, factor, n_rows, b_opt, b_rad, rho):
        base = QuadraticObjective.from_targets(np.zeros((len(b_opt), 0)), b_opt, b_rad, rho)
        return cls(factor, n_rows, base.target, base.constant)

    def _mat(self, v):
        return np.asarray(v).reshape(self.n_rows, -1, order="F")

    @property
    def q_matrix(self) -> np.ndarray:
        return np.kron(self.factor.T, np.eye(self.n_rows))

    def apply(self, p) -> np.ndarray:
        return (self._mat(p) @ self.factor).reshape(-1, order="F")

    def gram_apply(self, p) -> np.ndarray:
        return (self._mat(p) @ self._ffh).reshape(-1, order="F")


def euclidean_gradient(obj: QuadraticObjective, p) -> np.ndarray:
    """``2 Q^H (Q p - target)``; the negative is the steepest-descent direction."""
    return obj.gradient(p)


@dataclass
class CgResult:
    point: np.ndarray
    value: float
    iterations: int
    converged: bool
    trace: list[dict] = field(default_factory=list, repr=False)


def riemannian_cg(obj: QuadraticObjective, start, tol: float = 1e-6,
                  max_iter: int = 500) -> CgResult:
    """Polak-Ribiere+ conjugate gradient with Armijo backtracking.

    Directions are carried between iterates by tangent projection.  The
    first trial step of each line search is a Barzilai-Borwein estimate,
    capped so that no phase moves by more than ``MAX_PHASE_STEP`` radians.
    """
    p = retract(np.asarray(start, dtype=complex), 0)
    n = p.size
    f = obj.value(p)
    grad = project_tangent(p, euclidean_gradient(obj, p))
    gnorm2 = _inner(grad, grad)
    direction = -grad
    alpha_bb = None
    trace = [dict(iteration=0, objective=f, gradnorm=np.sqrt(gnorm2), step=0.0)]
    since_reset = 0

    for it in range(1, max_iter + 1):
        if np.sqrt(gnorm2) < tol:
            return CgResult(p, f, it - 1, True, trace)
        slope = _inner(grad, direction)
        if slope >= 0:
            direction = -grad
            slope = -gnorm2
        dmax = np.abs(direction).max()
        alpha = alpha_bb if alpha_bb is not None else 1.0 / dmax
        alpha = min(alpha, MAX_PHASE_STEP / dmax)

        while True:
            candidate = retract(p, alpha * direction)
            f_new = obj.value(candidate)
            if f_new <= f + ARMIJO_C * alpha * slope:
                break
            alpha *= SHRINK
            if alpha * dmax < 1e-16:
                # no representable decrease left
                return CgResult(p, f, it - 1, np.sqrt(gnorm2) < tol, trace)

        grad_new = project_tangent(candidate, euclidean_gradient(obj, candidate))
        grad_old_moved = project_tangent(candidate, grad)
        dir_moved = project_tangent(candidate, direction)
        gnorm2_new = _inner(grad_new, grad_new)
        beta = max(0.0, _inner(grad_new, grad_new - grad_old_moved) / gnorm2)
        since_reset += 1
        if since_reset >= n:
            beta, since_reset = 0.0, 0

        s = project_tangent(candidate, alpha * direction)
        yv = grad_new - grad_old_moved
        sy = abs(_inner(s, yv))
        alpha_bb = _inner(s, s) / sy if sy > 0 else None

        p, f, grad, gnorm2 = candidate, f_new, grad_new, gnorm2_new
        direction = -grad + beta * dir_moved
        trace.append(dict(iteration=it, objective=f, gradnorm=np.sqrt(gnorm2),
                          step=alpha))

    return CgResult(p, f, max_iter, np.sqrt(gnorm2) < tol, trace)


def write_trace(path, result: CgResult) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["iteration", "objective", "gradnorm", "step"])
        writer.writeheader()
        for row in result.trace:
            writer.writerow({k: (f"{v:.12g}" if isinstance(v, float) else v)
                             for k, v in row.items()})
