"""Damped Newton solver for the real-form affine Toda equations.

The unknown is a real Cartan-valued grid field Omega (coroot coordinates).
The discrete residual is

    R(Omega) = -(1/2) Lap Omega + sum_i r_i e^{2 alpha_i(Omega)} h_i
               + |q|^2 e^{-2 delta(Omega)} h_{-delta}

with the five-point Laplacian (Omega_{z zbar} = Lap/4).  Multiplying the
coordinate Jacobian by the Gram matrix of the coroots under the
invariant-form pairing makes the Newton system symmetric positive
definite (the equations are the gradient of a convex energy), so each
step is solved with preconditioned conjugate gradients.
"""
from __future__ import annotations

import concurrent.futures
import os
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .chevalley import ChevalleyAlgebra, PrincipalSL2
from .grids import DomainGrid, HFieldGrid, QDifferential, constant_field, random_trig_field
from .rootdata import RootSystem, affine_cartan, x_coefficients


@dataclass(frozen=True)
class InitSpec:
    kind: str = "oracle"  # zero | oracle | perturbed | file
    seed: int = 0
    amplitude: float = 0.1
    path: Optional[str] = None

    @staticmethod
    def parse(text: str) -> "InitSpec":
        """CLI syntax: zero | oracle | perturbed:SEED:AMP | file:PATH."""
        parts = text.split(":")
        if parts[0] in ("zero", "oracle") and len(parts) == 1:
            return InitSpec(parts[0])
        if parts[0] == "perturbed" and len(parts) == 3:
            return InitSpec("perturbed", seed=int(parts[1]), amplitude=float(parts[2]))
        if parts[0] == "file" and len(parts) >= 2:
            return InitSpec("file", path=":".join(parts[1:]))
        raise ValueError(f"cannot parse init specification {text!r}")


@dataclass
class SolverConfig:
    lie_type: "object"  # LieType
    grid: DomainGrid
    q: QDifferential
    tol: float = 1e-10
    max_iter: int = 60
    damping: float = 1.0
    init: InitSpec = field(default_factory=InitSpec)

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if not (0 < self.damping <= 1):
            raise ValueError("damping must lie in (0, 1]")


@dataclass
class Solution:
    omega: HFieldGrid
    residual_history: List[float]
    iterations: int
    converged: bool

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1] if self.residual_history else float("inf")


# ---------------------------------------------------------------------------
# pointwise data shared by residual / Jacobian / oracle
# ---------------------------------------------------------------------------


class _TodaData:
    """Per-type float data for the residual and its Jacobian."""

    def __init__(self, rs: RootSystem):
        l = rs.rank
        self.rs = rs
        self.l = l
        self.P = np.array(
            [[rs.cartan_matrix[a][i] for a in range(l)] for i in range(l)], dtype=float
        )  # P[i, a] = alpha_i(h_a)
        self.r = np.array([float(c) for c in x_coefficients(rs)])
        self.delta_marks = np.array(rs.highest_root, dtype=float)
        self.delta_co = np.array(rs.coroot(rs.highest_root), dtype=float)
        self.deltaP = self.delta_marks @ self.P  # delta(h_a)
        # invariant-form Gram matrix of the coroots: 4 (a_i, a_j) / (|a_i|^2 |a_j|^2)
        G = np.zeros((l, l))
        for i in range(l):
            for j in range(l):
                G[i, j] = float(
                    rs.dot(rs.simple_root(i), rs.simple_root(j))
                    / (rs.half_norm(rs.simple_root(i)) * rs.half_norm(rs.simple_root(j)))
                )
        self.G = G
        self.inv_half_norm = np.array(
            [1.0 / float(rs.half_norm(rs.simple_root(i))) for i in range(l)]
        )
        self.inv_half_norm_delta = 1.0 / float(rs.half_norm(rs.highest_root))

    def exponentials(self, vals: np.ndarray, q2: np.ndarray):
        av = vals @ self.P.T
        dv = av @ self.delta_marks
        return self.r * np.exp(2 * av), q2 * np.exp(-2 * dv)

    def pointwise_residual(self, vals: np.ndarray, q2: np.ndarray) -> np.ndarray:
        expo, exp0 = self.exponentials(vals, q2)
        return expo - exp0[..., None] * self.delta_co


def residual(data: _TodaData, grid: DomainGrid, vals: np.ndarray, q2: np.ndarray) -> np.ndarray:
    R = -0.5 * grid.laplacian(vals) + data.pointwise_residual(vals, q2)
    if not grid.periodic:
        R[~grid.interior_mask()] = 0.0
    return R


def jacobian_apply(
    data: _TodaData, grid: DomainGrid, vals: np.ndarray, q2: np.ndarray, s: np.ndarray
) -> np.ndarray:
    """Directional derivative of the residual at vals along s."""
    expo, exp0 = data.exponentials(vals, q2)
    a_s = s @ data.P.T
    d_s = a_s @ data.delta_marks
    out = -0.5 * grid.laplacian(s) + 2 * expo * a_s + 2 * (exp0 * d_s)[..., None] * data.delta_co
    if not grid.periodic:
        out[~grid.interior_mask()] = 0.0
    return out


# ---------------------------------------------------------------------------
# constant solution oracle
# ---------------------------------------------------------------------------


def constant_solution(rs: RootSystem, q_sq: float) -> Tuple[np.ndarray, float]:
    """The spatially constant solution for constant |q|^2 > 0.

    Writing s = |q|^2 exp(-2 delta(Omega)), the h_i components decouple to
    r_i exp(2 alpha_i(Omega)) = c_i s with the comarks c_i, and the scalar
    s solves a monotone equation in log s whose closed form is evaluated
    directly.  Returns (coroot coordinates, pointwise residual norm).
    """
    if q_sq <= 0:
        raise ValueError("constant solution needs |q|^2 > 0")
    data = _TodaData(rs)
    aff = affine_cartan(rs)
    marks = np.array(aff.marks[1:], dtype=float)
    comarks = np.array(aff.comarks[1:], dtype=float)
    h = float(sum(aff.marks))
    assert aff.marks[0] == 1 and aff.comarks[0] == 1
    log_s = (np.log(q_sq) - float(marks @ np.log(comarks / data.r))) / h
    targets = 0.5 * np.log(comarks * np.exp(log_s) / data.r)  # alpha_i(Omega)
    om = np.linalg.solve(data.P, targets)
    res = data.pointwise_residual(om[None, None, :], np.array([[q_sq]]))
    return om, float(np.abs(res).max())


# ---------------------------------------------------------------------------
# Newton solver
# ---------------------------------------------------------------------------


def _initial_field(cfg: SolverConfig, rs: RootSystem, q2: np.ndarray) -> HFieldGrid:
    l = rs.rank
    grid = cfg.grid
    kind = cfg.init.kind
    if kind == "zero":
        return constant_field(grid, [0.0] * l)
    if kind == "oracle":
        om0, _ = constant_solution(rs, float(np.mean(q2)))
        return constant_field(grid, om0)
    if kind == "perturbed":
        om0, _ = constant_solution(rs, float(np.mean(q2)))
        base = constant_field(grid, om0)
        bump = random_trig_field(l, seed=cfg.init.seed, amplitude=cfg.init.amplitude)
        return HFieldGrid(grid, base.values + bump.sample(grid).values)
    if kind == "file":
        from .grids import read_field_binary

        return read_field_binary(cfg.init.path, grid)
    raise ValueError(f"unknown init kind {kind!r}")


def _newton_step(
    data: _TodaData, grid: DomainGrid, vals: np.ndarray, q2: np.ndarray, R: np.ndarray
) -> np.ndarray:
    """Solve the symmetrized Newton system G J s = -G R by diagonal-
    preconditioned CG; boundary slots pass through untouched."""
    l = data.l
    shape = vals.shape
    G = data.G
    interior = grid.interior_mask()
    expo, exp0 = data.exponentials(vals, q2)

    def apply_H(flat: np.ndarray) -> np.ndarray:
        s = flat.reshape(shape)
        Js = jacobian_apply(data, grid, vals, q2, s)
        Hs = Js @ G  # G is symmetric
        if not grid.periodic:
            Hs[~interior] = s[~interior]
        return Hs.ravel()

    # diagonal of the symmetric operator for Jacobi preconditioning
    diag = np.empty(shape)
    lap_diag = 1.0 / grid.dx**2 + 1.0 / grid.dy**2
    for a in range(l):
        point = (
            4 * expo * (data.P[:, a] ** 2) * data.inv_half_norm
        ).sum(axis=-1) + 4 * exp0 * data.deltaP[a] ** 2 * data.inv_half_norm_delta
        diag[..., a] = lap_diag * G[a, a] + point
    if not grid.periodic:
        diag[~interior] = 1.0
    inv_diag = 1.0 / diag

    rhs = -(R @ G)
    if not grid.periodic:
        rhs[~interior] = 0.0
    n = rhs.size
    H = LinearOperator((n, n), matvec=apply_H)
    M = LinearOperator((n, n), matvec=lambda x: (x.reshape(shape) * inv_diag).ravel())
    sol, info = cg(H, rhs.ravel(), rtol=1e-12, atol=0.0, maxiter=40 * max(grid.nx, grid.ny), M=M)
    if info != 0:
        raise RuntimeError(f"inner CG did not converge (info={info})")
    return sol.reshape(shape)


def solve(cfg: SolverConfig, alg: ChevalleyAlgebra, sl2: PrincipalSL2) -> Solution:
    """Damped Newton iteration with Armijo backtracking on |R|^2.

    Deterministic for a fixed config (seeded perturbations, fixed-order
    reductions).  Divergence (no residual progress over a patience window)
    yields a non-converged Solution; NaN raises.
    """
    rs = alg.rs
    if rs.type != cfg.lie_type:
        raise ValueError("algebra type does not match config")
    data = _TodaData(rs)
    grid = cfg.grid
    q2 = np.abs(cfg.q.sample(grid)) ** 2
    omega = _initial_field(cfg, rs, q2)
    vals = omega.values.copy()

    history: List[float] = []
    best = np.inf
    stall = 0
    converged = False
    it = 0
    for it in range(cfg.max_iter):
        R = residual(data, grid, vals, q2)
        if not np.all(np.isfinite(R)):
            raise FloatingPointError("residual became non-finite")
        res_inf = grid.max_norm(np.abs(R).max(axis=-1))
        history.append(res_inf)
        if res_inf <= cfg.tol:
            converged = True
            break
        if res_inf < best * (1 - 1e-12):
            best = res_inf
            stall = 0
        else:
            stall += 1
            if stall >= 6:
                break  # diverged / stagnated
        s = _newton_step(data, grid, vals, q2, R)
        norm2 = float((R * R).sum())
        t = cfg.damping
        while t > 1e-12:
            trial = vals + t * s
            Rt = residual(data, grid, trial, q2)
            if float((Rt * Rt).sum()) <= (1 - 1e-4 * t) * norm2:
                break
            t *= 0.5
        else:
            break  # no acceptable step: give up, report non-converged
        vals = vals + t * s
    else:
        R = residual(data, grid, vals, q2)
        res_inf = grid.max_norm(np.abs(R).max(axis=-1))
        history.append(res_inf)
        converged = res_inf <= cfg.tol
        it = cfg.max_iter

    return Solution(
        omega=HFieldGrid(grid, vals),
        residual_history=history,
        iterations=it,
        converged=converged,
    )


def sigma_symmetry_defect(sol: Solution, alg: ChevalleyAlgebra, sl2: PrincipalSL2) -> float:
    """Max-node norm of sigma(Omega) - Omega for the solved field."""
    l = alg.rank
    S = sl2.sigma_mat[:l, :l]  # sigma preserves the Cartan block
    vals = sol.omega.values
    defect = vals @ S.T - vals
    return sol.omega.grid.max_norm(np.abs(defect).max(axis=-1))


def uniqueness_probe(
    cfg: SolverConfig,
    seeds: Sequence[int],
    alg: ChevalleyAlgebra,
    sl2: PrincipalSL2,
    amplitude: Optional[float] = None,
) -> float:
    """Max pairwise distance between converged runs from perturbed starts.

    Non-converged runs are excluded.  TODA_THREADS (>= 1) caps how many
    solves run concurrently.
    """
    if len(seeds) < 2:
        raise ValueError("need at least two seeds")
    amp = cfg.init.amplitude if amplitude is None else amplitude
    configs = [
        SolverConfig(
            lie_type=cfg.lie_type, grid=cfg.grid, q=cfg.q, tol=cfg.tol,
            max_iter=cfg.max_iter, damping=cfg.damping,
            init=InitSpec("perturbed", seed=s, amplitude=amp),
        )
        for s in seeds
    ]
    workers = thread_cap()
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            sols = list(pool.map(lambda c: solve(c, alg, sl2), configs))
    else:
        sols = [solve(c, alg, sl2) for c in configs]
    for seed, s in zip(seeds, sols):
        if not s.converged:
            warnings.warn(f"seed {seed} did not converge; excluded from the probe")
    fields = [s.omega.values for s in sols if s.converged]
    worst = 0.0
    for i in range(len(fields)):
        for j in range(i + 1, len(fields)):
            worst = max(worst, float(np.abs(fields[i] - fields[j]).max()))
    return worst


def thread_cap() -> int:
    """Parallelism cap from TODA_THREADS (integer >= 1, default 1)."""
    raw = os.environ.get("TODA_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"TODA_THREADS must be an integer >= 1, got {raw!r}") from exc
    if n < 1:
        raise ValueError(f"TODA_THREADS must be an integer >= 1, got {raw!r}")
    return n
