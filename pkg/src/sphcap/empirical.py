"""Monte Carlo feasibility experiments on random perceptron instances.

An instance is an m x n random pattern matrix H together with a margin
kappa; the question is whether some unit vector x satisfies Hx >= kappa*1
componentwise.  The working objective is the positive-part residual norm

    g(x) = || (kappa*1 - Hx)_+ ||_2,

which is zero exactly on feasible points and otherwise equals the inner
maximum of the min-max reformulation.  Local search is projected
subgradient descent on the unit sphere with random restarts.

For kappa >= 0 feasibility is decided by convex optimization: the minimum
norm point of the convex hull of the rows of H.  Writing
theta* = min_{lam in simplex} ||H' lam||_2, Sion's minimax theorem gives

    theta* = max_{||x||_2 <= 1} min_i (Hx)_i ,

so any simplex lam with ||H' lam|| < kappa proves that no unit x reaches
margin kappa anywhere on the ball (a checkable infeasibility certificate),
while the scaled point H' lam / ||H' lam|| achieves margin >= theta* once
lam is near-optimal (a constructive feasibility certificate).  At kappa = 0
the infeasible case is certified by a nonnegative, affinely normalized
near-null vector of H' driven to machine precision; the statement is then
"no unit x attains margin > theta_hat" with theta_hat reported (~1e-15 in
practice), which decides strict feasibility exactly and the non-strict one
up to a measure-zero boundary event.

For kappa < 0 no convex certificate exists; failure of local search is
reported as evidence (certificate "local_search"), never proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

ENTRY_DISTS = ("gaussian", "bernoulli_pm1")

DESCENT_ITERS = 2000
STALL_WINDOW = 50
STALL_REL_TOL = 1e-10
DEFAULT_RESTARTS_NEG = 30   # nonconvex landscape at kappa < 0
DEFAULT_RESTARTS_NONNEG = 5


def feasibility_tolerance(m: int) -> float:
    """g scales like sqrt(m); a relative tolerance avoids n-dependent
    false negatives."""
    return 1e-6 * math.sqrt(m)


@dataclass
class PerceptronInstance:
    h_matrix: np.ndarray   # m x n pattern matrix
    n: int
    m: int
    kappa: float
    entry_dist: str
    seed: int


@dataclass
class EmpiricalTrialResult:
    best_x: np.ndarray            # unit vector
    best_objective: float         # g at best_x
    feasible: bool
    certificate: str              # "local_search" | "convex_global" | "none"
    restarts_used: int


@dataclass
class ConvexCertificate:
    """Outcome of the convex feasibility analysis (kappa >= 0 only).

    global_min_lower is a certified lower bound on min g over the unit
    ball (hence over the sphere): every reported value is of the form
    kappa * sum(lam) - ||H' lam|| for an explicit lam >= 0, ||lam|| = 1.
    margin_upper is a certified upper bound on max_{||x|| <= 1} min_i (Hx)_i.
    """

    global_min_lower: float
    margin_upper: float
    margin_tolerance: float
    certified_infeasible: bool
    feasible_point: Optional[np.ndarray]


def sample_instance(
    n: int, alpha: float, kappa: float, entry_dist: str = "gaussian", seed: int = 0
) -> PerceptronInstance:
    """Sample an m x n instance with m = ceil(alpha * n); deterministic in seed."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if entry_dist not in ENTRY_DISTS:
        raise ValueError(f"entry_dist must be one of {ENTRY_DISTS}, got {entry_dist!r}")
    m = math.ceil(alpha * n)
    rng = np.random.default_rng(seed)
    if entry_dist == "gaussian":
        h = rng.standard_normal((m, n))
    else:
        h = rng.integers(0, 2, size=(m, n)).astype(np.float64) * 2.0 - 1.0
    return PerceptronInstance(
        h_matrix=h, n=n, m=m, kappa=float(kappa), entry_dist=entry_dist, seed=seed
    )


def inner_max(v: np.ndarray) -> tuple[float, np.ndarray]:
    """max of lam'v over lam >= 0, ||lam||_2 = 1.

    Equals ||v_+||_2 with lam* = v_+/||v_+|| when v has a positive
    component; otherwise the largest coordinate of v, attained at the
    corresponding coordinate vector.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size == 0 or not np.any(v != 0.0):
        raise ValueError("v must be a nonzero vector")
    pos = np.maximum(v, 0.0)
    norm_pos = float(np.linalg.norm(pos))
    if norm_pos > 0.0:
        return norm_pos, pos / norm_pos
    lam = np.zeros_like(v)
    i = int(np.argmax(v))
    lam[i] = 1.0
    return float(v[i]), lam


def _check_unit(x: np.ndarray, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (n,):
        raise ValueError(f"x must have shape ({n},), got {x.shape}")
    if abs(np.linalg.norm(x) - 1.0) > 1e-6:
        raise ValueError("x must have unit Euclidean norm")
    return x


def objective_and_subgradient(
    inst: PerceptronInstance, x: np.ndarray
) -> tuple[float, np.ndarray]:
    """g(x) = ||(kappa*1 - Hx)_+||_2 and a subgradient -H'(kappa*1 - Hx)_+/g.

    At g = 0 the zero vector is returned (feasibility reached).
    """
    x = _check_unit(x, inst.n)
    r = np.maximum(inst.kappa - inst.h_matrix @ x, 0.0)
    g = float(np.linalg.norm(r))
    if g == 0.0:
        return 0.0, np.zeros(inst.n)
    return g, -(inst.h_matrix.T @ r) / g


def _descend_batch(
    h: np.ndarray,
    kappa: float,
    x0: np.ndarray,
    iters: int,
    eps_feas: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Projected subgradient descent on the sphere, all restarts at once.

    x0 is n x R (unit columns).  Steps are Polyak-style toward zero scaled
    by 0.5/sqrt(t), which keeps the trajectory invariant under the scaling
    (H, kappa) -> (c H, c kappa).  Columns stop early on feasibility or
    when the best value stalls (relative decrease < 1e-10 over 50 iters).
    """
    x = x0.copy()
    restarts = x.shape[1]
    best_g = np.full(restarts, np.inf)
    best_x = x.copy()
    active = np.ones(restarts, dtype=bool)
    window_ref = np.full(restarts, np.inf)
    for t in range(1, iters + 1):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        xa = x[:, idx]
        resid = np.maximum(kappa - h @ xa, 0.0)
        g = np.linalg.norm(resid, axis=0)
        improved = g < best_g[idx]
        upd = idx[improved]
        best_g[upd] = g[improved]
        best_x[:, upd] = xa[:, improved]
        feas = g <= eps_feas
        active[idx[feas]] = False
        move = ~feas
        if np.any(move):
            cols = idx[move]
            grad = -(h.T @ resid[:, move])          # = g * subgradient
            denom = np.einsum("ij,ij->j", grad, grad)
            ok = denom > 0.0
            step = np.zeros(move.sum())
            gm = g[move]
            step[ok] = (0.5 / math.sqrt(t)) * gm[ok] * gm[ok] / denom[ok]
            xn = xa[:, move] - grad * step
            xn /= np.linalg.norm(xn, axis=0)
            x[:, cols] = xn
        if t % STALL_WINDOW == 0:
            cur = best_g[idx]
            stalled = (window_ref[idx] - cur) < STALL_REL_TOL * np.maximum(cur, 1e-300)
            active[idx[stalled]] = False
            window_ref[idx] = cur
    return best_g, best_x


def _project_simplex(y: np.ndarray) -> np.ndarray:
    u = np.sort(y)[::-1]
    css = np.cumsum(u)
    rho = np.nonzero(u * np.arange(1, y.size + 1) > (css - 1.0))[0][-1]
    tau = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(y - tau, 0.0)


def _min_norm_point(h: np.ndarray, iters: int) -> np.ndarray:
    """FISTA for min ||H' lam||^2 over the probability simplex."""
    m, n = h.shape
    v = np.ones(n) / math.sqrt(n)
    for _ in range(60):   # power iteration for the Lipschitz constant
        v = h.T @ (h @ v)
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return np.full(m, 1.0 / m)
        v /= nv
    lip = 2.0 * float(v @ (h.T @ (h @ v)))
    lam = np.full(m, 1.0 / m)
    y, tk = lam.copy(), 1.0
    for _ in range(iters):
        grad = 2.0 * (h @ (h.T @ y))
        nxt = _project_simplex(y - grad / lip)
        tn = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tk * tk))
        y = nxt + ((tk - 1.0) / tn) * (nxt - lam)
        lam, tk = nxt, tn
    return lam


def _positive_null_vector(
    h: np.ndarray, z0: np.ndarray, iters: int, stop_at: float
) -> tuple[np.ndarray, float]:
    """Alternating projections onto {z >= 0} and {H'z = 0, 1'z = 1}.

    Converges linearly when the intersection has nonempty relative
    interior (the generic infeasible case at kappa = 0); returns the
    final simplex-normalized z and ||H'z||.
    """
    m, n = h.shape
    j = np.vstack([h.T, np.ones(m)])
    jjt = j @ j.T
    jjt[np.diag_indices_from(jjt)] += 1e-12 * np.trace(jjt) / (n + 1)
    chol = np.linalg.cholesky(jjt)
    b = np.zeros(n + 1)
    b[-1] = 1.0
    z = z0.copy()
    theta = math.inf
    for it in range(iters):
        resid = j @ z - b
        w = np.linalg.solve(chol.T, np.linalg.solve(chol, resid))
        z = np.maximum(z - j.T @ w, 0.0)
        if (it + 1) % 20 == 0:
            s = z.sum()
            if s > 0.0:
                theta = float(np.linalg.norm(h.T @ (z / s)))
                if theta <= stop_at:
                    break
    s = z.sum()
    if s <= 0.0:
        return z0, math.inf
    z = z / s
    return z, float(np.linalg.norm(h.T @ z))


def _ball_dual_value(h: np.ndarray, kappa: float, lam: np.ndarray) -> float:
    """kappa * sum(lam) - ||H' lam|| for unit-norm lam >= 0: a certified
    lower bound on g over the unit ball (weak duality)."""
    return kappa * float(lam.sum()) - float(np.linalg.norm(h.T @ lam))


def _ball_min_duals(h: np.ndarray, kappa: float, iters: int) -> float:
    """Minimize ||(kappa*1 - Hx)_+||^2 over the unit ball by FISTA (the
    squared residual is smooth), collecting the residual-based dual bound
    along the way; returns the best bound.

    At the exact ball optimum the residual direction is a dual optimum
    (zero gap by the KKT conditions), so the returned bound converges to
    the true ball minimum of g.
    """
    m, n = h.shape
    v = np.ones(n) / math.sqrt(n)
    for _ in range(60):   # power iteration for the Lipschitz constant
        v = h.T @ (h @ v)
        nv = float(np.linalg.norm(v))
        if nv == 0.0:
            return 0.0
        v /= nv
    lip = 2.0 * float(v @ (h.T @ (h @ v)))
    x = np.zeros(n)
    y = x.copy()
    tk = 1.0
    best = -math.inf
    for _ in range(iters):
        r = np.maximum(kappa - h @ y, 0.0)
        g2 = float(r @ r)
        if g2 == 0.0:
            break
        best = max(best, _ball_dual_value(h, kappa, r / math.sqrt(g2)))
        nxt = y + (2.0 / lip) * (h.T @ r)
        norm_nxt = float(np.linalg.norm(nxt))
        if norm_nxt > 1.0:
            nxt = nxt / norm_nxt
        tn = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tk * tk))
        y = nxt + ((tk - 1.0) / tn) * (nxt - x)
        x, tk = nxt, tn
    r = np.maximum(kappa - h @ x, 0.0)
    g = float(np.linalg.norm(r))
    if g > 0.0:
        best = max(best, _ball_dual_value(h, kappa, r / g))
    return best


def convex_certify(
    inst: PerceptronInstance,
    fista_iters: int = 600,
    pocs_iters: int = 600,
    ball_iters: Optional[int] = None,
) -> ConvexCertificate:
    """Convex feasibility analysis of an instance with kappa >= 0.

    Solves the minimum-norm-point problem over the convex hull of the
    rows of H and derives from its (explicitly re-checked) solution
    either a feasible unit point, or a certificate that no unit x
    reaches margin kappa, plus a certified lower bound on min g over
    the unit ball.  Raises ValueError for kappa < 0, where no convex
    certificate exists.
    """
    if inst.kappa < 0:
        raise ValueError("convex_certify requires kappa >= 0")
    h = inst.h_matrix
    m, n = h.shape
    kappa = inst.kappa

    lam = _min_norm_point(h, fista_iters)
    theta = float(np.linalg.norm(h.T @ lam))
    margin_tol = 1e-7 * math.sqrt(n)

    def extract_point(lam_vec, theta_val):
        if theta_val <= 0.0:
            return None
        x = (h.T @ lam_vec) / theta_val
        return x if float(np.min(h @ x)) >= kappa else None

    feasible_point = extract_point(lam, theta)
    if feasible_point is None and kappa > 0.0 and theta >= kappa:
        # undecided at this budget; one deeper pass before giving up
        lam = _min_norm_point(h, 4 * fista_iters)
        theta = float(np.linalg.norm(h.T @ lam))
        feasible_point = extract_point(lam, theta)
    margin_upper = theta

    certified_infeasible = False
    if feasible_point is None:
        if kappa > 0.0 and theta < kappa:
            certified_infeasible = True
        elif theta <= margin_tol or kappa == 0.0:
            z, theta_z = _positive_null_vector(h, lam, pocs_iters, 0.01 * margin_tol)
            if theta_z < margin_upper:
                margin_upper = theta_z
            if margin_upper <= margin_tol and kappa <= margin_tol:
                certified_infeasible = True

    if feasible_point is not None:
        value = 0.0
    else:
        lam_norm = float(np.linalg.norm(lam))
        v_hull = _ball_dual_value(h, kappa, lam / lam_norm) if lam_norm > 0 else 0.0
        if ball_iters is None:
            if m * n <= 10_000:
                ball_iters = 20_000
            elif m * n <= 200_000:
                ball_iters = 1500
            else:
                ball_iters = 300
        value = max(0.0, v_hull, _ball_min_duals(h, kappa, ball_iters))

    return ConvexCertificate(
        global_min_lower=value,
        margin_upper=margin_upper,
        margin_tolerance=margin_tol,
        certified_infeasible=certified_infeasible,
        feasible_point=feasible_point,
    )


def minimize_sphere(
    inst: PerceptronInstance,
    restarts: Optional[int] = None,
    seed: int = 0,
    iters: int = DESCENT_ITERS,
) -> EmpiricalTrialResult:
    """Best of `restarts` projected subgradient descents on the unit sphere.

    For kappa >= 0 the convex analysis then upgrades the certificate: a
    constructively feasible point replaces the incumbent, and a margin
    certificate settles infeasibility.  For kappa < 0 the verdict rests on
    local search only.
    """
    if restarts is None:
        restarts = DEFAULT_RESTARTS_NEG if inst.kappa < 0 else DEFAULT_RESTARTS_NONNEG
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    eps = feasibility_tolerance(inst.m)
    rng = np.random.default_rng(seed)
    x0 = rng.standard_normal((inst.n, restarts))
    x0 /= np.linalg.norm(x0, axis=0)
    best_g, best_x = _descend_batch(inst.h_matrix, inst.kappa, x0, iters, eps)
    k = int(np.argmin(best_g))
    g_best = float(best_g[k])
    x_best = best_x[:, k]
    x_best = x_best / float(np.linalg.norm(x_best))

    certificate = "local_search"
    feasible = g_best <= eps
    if inst.kappa >= 0:
        cert = convex_certify(inst)
        if cert.feasible_point is not None:
            x_cand = cert.feasible_point
            g_cand = float(np.linalg.norm(np.maximum(inst.kappa - inst.h_matrix @ x_cand, 0.0)))
            if g_cand <= g_best:
                x_best, g_best = x_cand, g_cand
            feasible = True
            certificate = "convex_global"
        elif cert.certified_infeasible and not feasible:
            certificate = "convex_global"
    return EmpiricalTrialResult(
        best_x=x_best,
        best_objective=g_best,
        feasible=feasible,
        certificate=certificate,
        restarts_used=restarts,
    )


@dataclass(frozen=True)
class FeasibilitySummary:
    fraction_feasible: float
    mean_xi_over_sqrt_n: float
    results: tuple  # per-trial EmpiricalTrialResult, in trial order


def estimate_feasibility(
    n: int,
    alpha: float,
    kappa: float,
    trials: int,
    restarts: Optional[int] = None,
    seed: int = 0,
    entry_dist: str = "gaussian",
) -> FeasibilitySummary:
    """Fraction of feasible trials and the mean of g/sqrt(n) over the
    infeasible ones (0.0 if every trial is feasible).

    Per-trial seeds are spawned from the root seed with a splittable
    generator, so trials are independent and the whole run is
    reproducible.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    states = np.random.SeedSequence(seed).generate_state(2 * trials)
    results = []
    for t in range(trials):
        inst = sample_instance(
            n, alpha, kappa, entry_dist=entry_dist, seed=int(states[2 * t])
        )
        results.append(
            minimize_sphere(inst, restarts=restarts, seed=int(states[2 * t + 1]))
        )
    n_feas = sum(1 for r in results if r.feasible)
    infeas = [r.best_objective for r in results if not r.feasible]
    mean_xi = float(np.mean(infeas) / math.sqrt(n)) if infeas else 0.0
    return FeasibilitySummary(n_feas / trials, mean_xi, results)


def verify_stability(inst: PerceptronInstance, x: np.ndarray) -> bool:
    """Exact margin check Hx >= kappa * 1 componentwise (the fixed-point
    condition the capacity question quantifies)."""
    x = _check_unit(x, inst.n)
    return bool(np.all(inst.h_matrix @ x >= inst.kappa))
