"""Dense primal-dual interior-point solver for small SDPs.

Problem form (after substituting the pinned y-coordinates):

    maximize    c . z
    subject to  A(z) = F0 + sum_i z_i F_i  is positive semidefinite,

with Lagrange dual  minimize <F0, X>  over  X PSD, <F_i, X> = -c_i.  The
complementarity gap of a primal/dual pair is <Z, X>.

The solver is an infeasible-start path follower: iterates (z, Z, X) start at
z = 0, Z = X = (1 + data norm) I and need not satisfy Z = A(z) or the dual
equalities; both residuals shrink by the factor (1 - alpha) per step.  Search
directions come from the HKM linearization Z dX + dZ X = C - Z X (solutions
symmetrized), with the right-hand side C chosen by a Mehrotra
predictor-corrector: an affine probe (C = 0) picks the centering weight
sigma = (mu_aff/mu)^3, and the corrector reuses the affine second-order term.
The Schur complement H_ij = <F_i, Z^-1 F_j X> is formed densely and solved by
factorization with escalating diagonal jitter.  Steps use a 0.98
fraction-to-boundary rule with a shared primal/dual step length, backtracked
geometrically so the complementarity gap never increases across accepted
steps.  Everything is plain numpy; given identical inputs the iterate
sequence is bitwise reproducible.

Infeasibility is certified through the normalized dual iterate: whenever
X / tr(X) annihilates every F_i but pairs negatively with F0, no z can make
A(z) PSD, and that matrix is returned as the certificate.  Unboundedness is
declared when the objective passes 1e12 while the primal residual is tiny.
A candidate optimum must also pass a shifted-Cholesky feasibility check
(eigen-floor >= -psd_tol) on the assembled A(z) before it is called Optimal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .errors import InputError
from .momentsdp import SdpProblem

OPTIMAL = "Optimal"
NEAR_OPTIMAL = "NearOptimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"
ITER_LIMIT = "IterLimit"


@dataclass
class SolverOptions:
    feas_tol: float = 1e-8
    gap_tol: float = 1e-7
    max_iter: int = 200
    psd_tol: float = 1e-7
    step_fraction: float = 0.98
    unbounded_threshold: float = 1e12

    def __post_init__(self):
        if self.feas_tol <= 0 or self.gap_tol <= 0:
            raise InputError("tolerances must be positive")
        if self.max_iter < 0:
            raise InputError("max_iter must be >= 0")
        if not 0 < self.step_fraction < 1:
            raise InputError("step_fraction must lie in (0, 1)")


@dataclass
class SdpSolution:
    y: List[float]
    objective: float
    status: str
    duality_gap: float
    min_eig: float
    iterations: int
    certificate: Optional[List[List[float]]] = None
    gap_history: List[float] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "y": list(self.y),
            "objective": self.objective,
            "status": self.status,
            "dualityGap": self.duality_gap,
            "minEig": self.min_eig,
            "iterations": self.iterations,
            "certificate": self.certificate,
        }


def _cholesky_jittered(matrix: np.ndarray):
    """Cholesky factor, adding escalating diagonal jitter when needed."""
    scale = max(abs(np.trace(matrix)) / matrix.shape[0], 1.0)
    jitter = 0.0
    for _ in range(12):
        try:
            return np.linalg.cholesky(matrix + jitter * np.eye(matrix.shape[0]))
        except np.linalg.LinAlgError:
            jitter = 1e-14 * scale if jitter == 0.0 else jitter * 100.0
    raise np.linalg.LinAlgError("matrix not factorizable even with jitter")


def _solve_psd(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    scale = max(abs(np.trace(matrix)) / max(matrix.shape[0], 1), 1.0)
    jitter = 0.0
    for _ in range(12):
        try:
            low = np.linalg.cholesky(matrix + jitter * np.eye(matrix.shape[0]))
            half = np.linalg.solve(low, rhs)
            return np.linalg.solve(low.T, half)
        except np.linalg.LinAlgError:
            jitter = 1e-13 * scale if jitter == 0.0 else jitter * 100.0
    return np.linalg.lstsq(matrix, rhs, rcond=None)[0]


def _step_to_boundary(factor: np.ndarray, direction: np.ndarray) -> float:
    """Largest step keeping M + alpha*D PSD, where factor = chol(M)."""
    half = np.linalg.solve(factor, direction)
    whitened = np.linalg.solve(factor, half.T).T
    lam = float(np.linalg.eigvalsh(0.5 * (whitened + whitened.T))[0])
    if lam >= -1e-14:
        return np.inf
    return -1.0 / lam


def _min_eig(matrix: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (matrix + matrix.T))[0])


def solve(problem: SdpProblem, options: Optional[SolverOptions] = None) -> SdpSolution:
    """Solve an SdpProblem; see the module docstring for the algorithm."""
    opts = options or SolverOptions()
    m = problem.side

    free = sorted(l for l in range(problem.y_dim) if l not in problem.fixed)
    index_of = {l: i for i, l in enumerate(free)}
    d = len(free)

    f_zero = np.zeros((m, m))
    f_mats = [np.zeros((m, m)) for _ in range(d)]
    for (i, j), vec in problem.cells.items():
        for l, coeff in vec.items():
            if l in problem.fixed:
                f_zero[i, j] += coeff * problem.fixed[l]
                if i != j:
                    f_zero[j, i] += coeff * problem.fixed[l]
            else:
                f_mats[index_of[l]][i, j] += coeff
                if i != j:
                    f_mats[index_of[l]][j, i] += coeff

    c_vec = np.array([problem.objective.get(l, 0.0) for l in free])
    const = sum(problem.objective.get(l, 0.0) * v for l, v in problem.fixed.items())

    def finish(z, status, gap, iters, certificate=None, history=None):
        assembled = f_zero + sum(z[i] * f_mats[i] for i in range(d)) if d else f_zero
        min_eig = _min_eig(assembled)
        if status == OPTIMAL and min_eig < -opts.psd_tol:
            status = NEAR_OPTIMAL  # failed the certified feasibility check
        y_full = [0.0] * problem.y_dim
        for l, v in problem.fixed.items():
            y_full[l] = float(v)
        for i, l in enumerate(free):
            y_full[l] = float(z[i])
        return SdpSolution(
            y=y_full,
            objective=float(c_vec @ z + const) if d else float(const),
            status=status,
            duality_gap=float(gap),
            min_eig=min_eig,
            iterations=iters,
            certificate=certificate,
            gap_history=list(history or []),
        )

    if d == 0:
        min_eig = _min_eig(f_zero)
        if min_eig >= -opts.psd_tol:
            return finish(np.zeros(0), OPTIMAL, 0.0, 0)
        vals, vecs = np.linalg.eigh(0.5 * (f_zero + f_zero.T))
        ray = np.outer(vecs[:, 0], vecs[:, 0])
        return finish(np.zeros(0), INFEASIBLE, 0.0, 0, certificate=ray.tolist())

    norm_f0 = float(np.linalg.norm(f_zero))
    norms_f = [float(np.linalg.norm(f)) for f in f_mats]
    norm_c = float(np.linalg.norm(c_vec))
    data_norm = max([norm_f0, norm_c] + norms_f)

    f_arr = np.array(f_mats)
    f_stack = f_arr.reshape(d, m * m)

    z = np.zeros(d)
    big_z = (1.0 + data_norm) * np.eye(m)
    big_x = (1.0 + data_norm) * np.eye(m)

    history: List[float] = []
    status = None
    certificate = None
    iters = 0
    rel_gap = np.inf

    for it in range(opts.max_iter + 1):
        assembled = f_zero + np.tensordot(z, f_arr, axes=1)
        residual_p = assembled - big_z
        residual_d = np.array(
            [-c_vec[i] - float(np.sum(f_mats[i] * big_x)) for i in range(d)]
        )
        gap = float(np.sum(big_z * big_x))
        p_obj = float(c_vec @ z)
        d_obj = float(np.sum(f_zero * big_x))
        rel_p = np.linalg.norm(residual_p) / (1.0 + norm_f0)
        rel_d = np.linalg.norm(residual_d) / (1.0 + norm_c)
        rel_gap = abs(gap) / (1.0 + abs(p_obj) + abs(d_obj))
        history.append(gap)

        if rel_p <= opts.feas_tol and rel_d <= opts.feas_tol and rel_gap <= opts.gap_tol:
            status = OPTIMAL
            break

        # dual improving ray => primal infeasible
        trace_x = float(np.trace(big_x))
        if trace_x > 0:
            x_hat = big_x / trace_x
            pairing = max(
                abs(float(np.sum(f_mats[i] * x_hat))) / (1.0 + norms_f[i])
                for i in range(d)
            )
            drift = float(np.sum(f_zero * x_hat)) / (1.0 + norm_f0)
            if pairing <= 1e-9 and drift <= -1e-7:
                status = INFEASIBLE
                certificate = x_hat.tolist()
                break

        if p_obj > opts.unbounded_threshold and rel_p <= 1e-5:
            status = UNBOUNDED
            break

        if it == opts.max_iter:
            break

        factor = _cholesky_jittered(big_z)
        mu = max(gap, 1e-300) / m

        # K_j = Z^-1 F_j X and the Schur complement H_ij = <F_i, K_j>
        k_mats = np.empty((d, m, m))
        for j in range(d):
            half = np.linalg.solve(factor, f_mats[j])
            zinv_f = np.linalg.solve(factor.T, half)
            k_mats[j] = zinv_f @ big_x
        schur = f_stack @ k_mats.reshape(d, m * m).T
        schur = 0.5 * (schur + schur.T)

        half = np.linalg.solve(factor, residual_p @ big_x)
        zinv_rx = np.linalg.solve(factor.T, half)

        def direction(c_target):
            if c_target is None:
                w = -big_x - zinv_rx
            else:
                half_c = np.linalg.solve(factor, c_target)
                w = np.linalg.solve(factor.T, half_c) - big_x - zinv_rx
            rhs = f_stack @ w.ravel() - residual_d
            dz = _solve_psd(schur, rhs)
            d_big_z = residual_p + np.tensordot(dz, f_arr, axes=1)
            d_big_x = w - np.tensordot(dz, k_mats, axes=1)
            d_big_x = 0.5 * (d_big_x + d_big_x.T)
            return dz, d_big_z, d_big_x

        # predictor
        dz_aff, dzm_aff, dxm_aff = direction(None)
        x_factor = _cholesky_jittered(big_x)
        alpha_p = min(1.0, _step_to_boundary(factor, dzm_aff))
        alpha_d = min(1.0, _step_to_boundary(x_factor, dxm_aff))
        mu_aff = float(
            np.sum((big_z + alpha_p * dzm_aff) * (big_x + alpha_d * dxm_aff))
        ) / m
        sigma = float(np.clip((max(mu_aff, 0.0) / mu) ** 3, 1e-10, 0.999))

        # corrector
        c_target = sigma * mu * np.eye(m) - dzm_aff @ dxm_aff
        dz, d_big_z, d_big_x = direction(c_target)

        # primal improving ray: a direction whose matrix movement is PSD while
        # the objective gains proves unboundedness outright once any feasible
        # point is at hand; ride it past the reporting threshold.
        dz_norm = float(np.linalg.norm(dz))
        if dz_norm > 0:
            d_hat = dz / dz_norm
            ray_gain = float(c_vec @ d_hat)
            if ray_gain > 1e-7 * (1.0 + norm_c):
                ray_dir = np.tensordot(d_hat, f_arr, axes=1)
                ray_floor = -1e-12 * (1.0 + float(np.linalg.norm(ray_dir)))
                here_floor = -opts.psd_tol * (1.0 + norm_f0)
                if _min_eig(ray_dir) >= ray_floor and _min_eig(assembled) >= here_floor:
                    t = (1.01 * opts.unbounded_threshold + abs(p_obj)) / ray_gain
                    z = z + t * d_hat
                    status = UNBOUNDED
                    break

        alpha = min(
            1.0,
            opts.step_fraction * _step_to_boundary(factor, d_big_z),
            opts.step_fraction * _step_to_boundary(x_factor, d_big_x),
        )
        # keep the complementarity gap non-increasing across accepted steps
        for _ in range(40):
            new_gap = float(np.sum((big_z + alpha * d_big_z) * (big_x + alpha * d_big_x)))
            if new_gap <= gap * (1.0 + 1e-9):
                break
            alpha *= 0.7

        z = z + alpha * dz
        big_z = big_z + alpha * d_big_z
        big_x = big_x + alpha * d_big_x
        iters += 1

    if status is None:
        if (
            rel_p <= 100 * opts.feas_tol
            and rel_d <= 100 * opts.feas_tol
            and rel_gap <= 100 * opts.gap_tol
        ):
            status = NEAR_OPTIMAL
        else:
            status = ITER_LIMIT

    return finish(z, status, rel_gap, iters, certificate=certificate, history=history)
