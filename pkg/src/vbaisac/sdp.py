"""Dense primal-dual interior-point solver for small complex SDPs.

Solves::

    min  Tr(C X)   s.t.  Tr(A_i X) = b_i,  X >= 0

with Hermitian data.  The complex problem is embedded into a real symmetric
one of twice the size through ``Z -> [[Re Z, -Im Z], [Im Z, Re Z]]``; the
embedded data matrices are halved so objective values carry over unchanged.
Iterations use the HKM search direction with a Mehrotra predictor-corrector.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DimensionError, InvalidInputError

STEP_FRACTION = 0.99


@dataclass
class SdpProblem:
    objective: np.ndarray
    constraints: list[tuple[np.ndarray, float]]

    def __post_init__(self):
        n = self.objective.shape[0]
        if n < 1 or self.objective.shape != (n, n):
            raise DimensionError("objective must be a non-empty square matrix")
        for A, _ in self.constraints:
            if A.shape != (n, n):
                raise DimensionError("constraint matrices must match the objective")
        for M in [self.objective] + [A for A, _ in self.constraints]:
            if np.abs(M - M.conj().T).max() > 1e-12 * max(1.0, np.abs(M).max()):
                raise InvalidInputError("SDP data must be Hermitian")

    @property
    def size(self) -> int:
        return self.objective.shape[0]


@dataclass
class SdpSolution:
    x_matrix: np.ndarray
    primal_value: float
    dual_value: float
    iterations: int
    status: str
    dual_vector: np.ndarray = field(default=None, repr=False)
    history: list[dict] = field(default_factory=list, repr=False)


def realify(Z: np.ndarray) -> np.ndarray:
    """Real symmetric embedding of a Hermitian matrix."""
    return np.block([[Z.real, -Z.imag], [Z.imag, Z.real]])


def complexify(Y: np.ndarray) -> np.ndarray:
    """Hermitian matrix whose embedding is closest to ``Y``."""
    n = Y.shape[0] // 2
    re = 0.5 * (Y[:n, :n] + Y[n:, n:])
    im = 0.5 * (Y[n:, :n] - Y[:n, n:])
    return re + 1j * im


def _sym(M):
    return 0.5 * (M + M.T)


def _inv_chol(M):
    """Inverse of the lower Cholesky factor of ``M``."""
    L = np.linalg.cholesky(M)
    Linv, info = sla.lapack.dtrtri(L, lower=1)
    if info != 0:
        raise np.linalg.LinAlgError("singular Cholesky factor")
    return Linv


def _max_step(Linv, dX):
    """Largest alpha keeping ``X + alpha dX`` PSD; ``Linv`` inverts the Cholesky factor of X."""
    W = Linv @ dX @ Linv.T
    lam_min = sla.eigh(_sym(W), eigvals_only=True, subset_by_index=[0, 0])[0]
    if lam_min >= 0:
        return np.inf
    return -1.0 / lam_min


def solve(problem: SdpProblem, tol: float = 1e-7, max_iter: int = 100) -> SdpSolution:
    """Primal-dual path-following solve of ``problem``.

    Converges when the relative duality gap and the primal and dual residuals
    all fall below ``tol``.  On hitting ``max_iter`` the last iterate is
    returned with status ``"max-iter"``; diverging iterates give
    ``"infeasible"``.
    """
    C = _sym(realify(problem.objective)) / 2.0
    As = [_sym(realify(A)) / 2.0 for A, _ in problem.constraints]
    b = np.array([float(bi) for _, bi in problem.constraints])
    m, N = len(As), C.shape[0]
    Avec = np.array([A.ravel() for A in As]) if m else np.zeros((0, N * N))

    def op(X):
        return Avec @ X.ravel()

    def adj(y):
        return (y @ Avec).reshape(N, N) if m else np.zeros((N, N))

    normA = np.linalg.norm(Avec, axis=1) if m else np.zeros(0)
    normC = np.linalg.norm(C)
    xi = max(10.0, np.sqrt(N), N * max(((1 + np.abs(b)) / (1 + normA)).max(initial=1.0), 1.0))
    eta = max(10.0, np.sqrt(N), normC, normA.max(initial=0.0))
    X = xi * np.eye(N)
    S = eta * np.eye(N)
    y = np.zeros(m)

    history = []
    status = "max-iter"
    it = 0
    for it in range(1, max_iter + 1):
        Rp = b - op(X)
        Rd = C - adj(y) - S
        mu = np.sum(X * S) / N
        pobj = np.sum(C * X)
        dobj = b @ y
        gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        pinf = np.linalg.norm(Rp) / (1 + np.linalg.norm(b))
        dinf = np.linalg.norm(Rd) / (1 + normC)
        history.append(dict(iteration=it - 1, primal=pobj, dual=dobj, gap=gap,
                            primal_residual=pinf, dual_residual=dinf, mu=mu))
        if gap < tol and pinf < tol and dinf < tol:
            status = "optimal"
            it -= 1
            break
        if not np.isfinite(mu) or np.abs(X).max() > 1e14 or np.abs(S).max() > 1e14:
            status = "infeasible"
            break

        try:
            LX = _inv_chol(X)
            LS = _inv_chol(S)
        except np.linalg.LinAlgError:
            status = "infeasible"
            break
        Sinv = LS.T @ LS
        XA = [X @ A @ Sinv for A in As]
        M = np.array([[np.sum(Ai * XAj.T) for XAj in XA] for Ai in As])
        XRdSinv = X @ Rd @ Sinv

        def direction(G):
            # G collects the complementarity terms: dX = G - X dS S^{-1}
            rhs = Rp - op(G - XRdSinv)
            dy = np.linalg.solve(M, rhs) if m else np.zeros(0)
            dS = Rd - adj(dy)
            dX = _sym(G - X @ dS @ Sinv)
            return dX, dy, dS

        dXa, dya, dSa = direction(-X)
        ap = min(1.0, _max_step(LX, dXa))
        ad = min(1.0, _max_step(LS, dSa))
        mu_aff = np.sum((X + ap * dXa) * (S + ad * dSa)) / N
        sigma = min(1.0, (mu_aff / mu) ** 3)

        G = (sigma * mu * np.eye(N) - dXa @ dSa) @ Sinv - X
        dX, dy, dS = direction(G)
        ap = min(1.0, STEP_FRACTION * _max_step(LX, dX))
        ad = min(1.0, STEP_FRACTION * _max_step(LS, dS))
        X = _sym(X + ap * dX)
        y = y + ad * dy
        S = _sym(S + ad * dS)

    return SdpSolution(
        x_matrix=complexify(X),
        primal_value=float(np.sum(C * X)),
        dual_value=float(b @ y),
        iterations=it,
        status=status,
        dual_vector=y,
        history=history,
    )


def write_history(path, solution: SdpSolution) -> None:
    """Dump per-iteration gap and residuals as CSV."""
    fields = ["iteration", "primal", "dual", "gap", "primal_residual",
              "dual_residual", "mu"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in solution.history:
            writer.writerow({k: (f"{v:.12g}" if isinstance(v, float) else v)
                             for k, v in row.items()})
