"""Small semidefinite programs for two-relay beamforming.

Both programs have a 2x2 complex Hermitian matrix variable.  It is handled
through its real 4x4 embedding ``[[Re S, -Im S], [Im S, Re S]]`` and solved
with a dense primal-dual path-following method (HKM direction, Mehrotra-style
centering).  Problem sizes are fixed and tiny, so everything is dense numpy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

RANK_ONE_TOL = 1e-6
GAP_OPTIMAL = 1e-7


def hermitian_basis_embedding() -> np.ndarray:
    """Real 4x4 embeddings of the basis (E11, E22, E12+E21, j(E12-E21))."""
    out = np.zeros((4, 4, 4))
    for k, S in enumerate((np.array([[1, 0], [0, 0]], complex),
                           np.array([[0, 0], [0, 1]], complex),
                           np.array([[0, 1], [1, 0]], complex),
                           np.array([[0, 1j], [-1j, 0]]))):
        out[k] = embed(S)
    return out


def embed(S: np.ndarray) -> np.ndarray:
    R, I = S.real, S.imag
    return np.block([[R, -I], [I, R]])


def trace_coeffs(M: np.ndarray) -> np.ndarray:
    """Coefficients c with tr(S M) = c . (s11, s22, Re s12, Im s12)."""
    return np.array([M[0, 0].real, M[1, 1].real, 2 * M[0, 1].real, 2 * M[0, 1].imag])


def unpack(x) -> np.ndarray:
    return np.array([[x[0], x[2] + 1j * x[3]], [x[2] - 1j * x[3], x[1]]])


_BASIS = hermitian_basis_embedding()


@dataclass
class LmiResult:
    x: np.ndarray
    Z: np.ndarray
    primal: float
    dual: float
    gap: float  # relative: |primal - dual| / (1 + |primal|)
    dual_residual: float
    iterations: int
    converged: bool


try:
    from numba import njit
except ImportError:  # pragma: no cover - pure-python fallback, same arithmetic
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@njit(cache=True)
def _assemble(F0, F, x):
    X = F0.copy()
    for k in range(F.shape[0]):
        X += x[k] * F[k]
    return X


@njit(cache=True)
def _trace_with(F, Y):
    out = np.zeros(F.shape[0])
    for k in range(F.shape[0]):
        out[k] = np.sum(F[k] * Y)
    return out


@njit(cache=True)
def _inv_and_inv_sqrt(X):
    ev, Q = np.linalg.eigh(X)
    if not ev[0] > 0:
        return X, X, ev[0]
    return (Q * (1.0 / ev)) @ Q.T, (Q * (1.0 / np.sqrt(ev))) @ Q.T, ev[0]


@njit(cache=True)
def _max_step(R, D):
    lo = np.linalg.eigvalsh(R @ D @ R)[0]
    if lo >= 0:
        return np.inf
    return -1.0 / lo


@njit(cache=True)
def _direction(F, Gram_inv, Xi, Z, Mq, Mev, FXi, FZ, rd, target):
    rhs = target * FXi - FZ - rd
    dx = Mq @ ((Mq.T @ rhs) / Mev)
    dX = np.zeros_like(Z)
    for k in range(F.shape[0]):
        dX += dx[k] * F[k]
    T = Xi @ dX @ Z
    dZ = target * Xi - Z - 0.5 * (T + T.T)
    dZ = 0.5 * (dZ + dZ.T)
    # restore tr(F_k dZ) = rd_k lost to cancellation when X is nearly singular
    y = Gram_inv @ (rd - _trace_with(F, dZ))
    for k in range(F.shape[0]):
        dZ += y[k] * F[k]
    return dx, dX, dZ


@njit(cache=True)
def _ipm_kernel(c, F0, F, x0, tol, max_iter):
    m, n = F.shape[0], F.shape[1]
    x = x0.copy()
    X = _assemble(F0, F, x)
    Z = np.eye(n) * (10.0 * max(1.0, np.max(np.abs(c))))
    c_scale = 1.0 + np.sqrt(np.sum(c * c))
    Gram = np.empty((m, m))
    for i in range(m):
        for j in range(m):
            Gram[i, j] = np.sum(F[i] * F[j])
    Gram_inv = np.linalg.inv(Gram)
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        rd = c - _trace_with(F, Z)
        comp = np.sum(X * Z)
        pobj = np.sum(c * x)
        if comp <= tol * (1.0 + abs(pobj)) and np.sqrt(np.sum(rd * rd)) <= tol * c_scale:
            converged = True
            break
        mu = comp / n
        Xi, Rx, xlo = _inv_and_inv_sqrt(X)
        _, Rz, zlo = _inv_and_inv_sqrt(Z)
        if not (xlo > 0 and zlo > 0):
            break
        M = np.zeros((m, m))
        FX = np.empty((m, n, n))
        FZm = np.empty((m, n, n))
        for k in range(m):
            FX[k] = F[k] @ Xi
            FZm[k] = F[k] @ Z
        for i in range(m):
            for j in range(i, m):
                v = np.sum(FX[i] * FZm[j].T)
                M[i, j] = v
                M[j, i] = v
        Mev, Mq = np.linalg.eigh(M)
        if not Mev[-1] > 0:
            break
        # near a low-rank optimum roundoff can push the smallest eigenvalues of
        # the Schur complement to or below zero; floor them instead of stopping
        Mev = np.maximum(Mev, 1e-14 * Mev[-1])
        FXi = _trace_with(F, Xi)
        FZ = c - rd
        _, dX, dZ = _direction(F, Gram_inv, Xi, Z, Mq, Mev, FXi, FZ, rd, 0.0)
        ap = min(1.0, _max_step(Rx, dX))
        ad = min(1.0, _max_step(Rz, dZ))
        mu_aff = np.sum((X + ap * dX) * (Z + ad * dZ)) / n
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3
        dx, dX, dZ = _direction(F, Gram_inv, Xi, Z, Mq, Mev, FXi, FZ, rd, sigma * mu)
        ap = min(1.0, 0.98 * _max_step(Rx, dX))
        ad = min(1.0, 0.98 * _max_step(Rz, dZ))
        if not (np.all(np.isfinite(dx)) and np.all(np.isfinite(dZ))):
            break
        # roundoff can leave a full step numerically indefinite; back off
        for _ in range(40):
            Xn = _assemble(F0, F, x + ap * dx)
            if np.linalg.eigvalsh(Xn)[0] > 0:
                break
            ap *= 0.5
        for _ in range(40):
            Zn = Z + ad * dZ
            if np.linalg.eigvalsh(Zn)[0] > 0:
                break
            ad *= 0.5
        if ap < 1e-12 and ad < 1e-12:
            break
        x = x + ap * dx
        X = Xn
        Z = Zn
    return x, Z, it, converged


def solve_lmi(c, F0, F, x0, tol=1e-9, max_iter=100) -> LmiResult:
    """minimize c.x  subject to  F0 + sum_k x_k F_k >= 0 (PSD).

    ``x0`` must be strictly feasible.  The dual is
    maximize -tr(F0 Z) s.t. tr(F_k Z) = c_k, Z >= 0.
    """
    c = np.ascontiguousarray(c, dtype=float)
    x, Z, it, converged = _ipm_kernel(c, np.ascontiguousarray(F0, dtype=float),
                                      np.ascontiguousarray(F, dtype=float),
                                      np.asarray(x0, dtype=float), float(tol), int(max_iter))
    rd = c - np.einsum("kab,ba->k", F, Z)
    # the iterates can stall with a small dual residual near a rank-deficient
    # optimum; project Z back onto the dual equalities when it stays PSD
    Gram = np.einsum("iab,jab->ij", F, F)
    Zp = Z + np.einsum("k,kab->ab", np.linalg.solve(Gram, rd), F)
    ev = np.linalg.eigvalsh(Zp)
    if ev[0] >= -1e-14 * abs(ev[-1]):
        Z = Zp
        rd = c - np.einsum("kab,ba->k", F, Z)
    pobj = float(c @ x)
    dobj = -float(np.sum(F0 * Z))
    c_scale = 1 + np.linalg.norm(c)
    gap = abs(pobj - dobj) / (1 + abs(pobj))
    dres = float(np.linalg.norm(rd)) / c_scale
    # a numerical breakdown after reaching the reporting tolerance still counts
    converged = bool(converged or (gap <= GAP_OPTIMAL and dres <= GAP_OPTIMAL))
    return LmiResult(x=x, Z=Z, primal=pobj, dual=dobj, gap=gap, dual_residual=dres,
                     iterations=int(it), converged=converged)


def _lmi_blocks(psd_vars: int, lin_A: np.ndarray, lin_b: np.ndarray):
    """Assemble F0, F for  [S-embedding >= 0] and  lin_A x + lin_b >= 0.

    The first four variables parameterize S; any remaining ones enter only
    the linear rows.
    """
    m = lin_A.shape[1]
    nl = lin_A.shape[0]
    n = 4 + nl
    F0 = np.zeros((n, n))
    F0[4:, 4:] = np.diag(lin_b)
    F = np.zeros((m, n, n))
    F[:psd_vars, :4, :4] = _BASIS[:psd_vars]
    idx = np.arange(4, n)
    F[:, idx, idx] = lin_A.T
    return F0, F


@dataclass
class SdpOutcome:
    matrix: np.ndarray  # 2x2 Hermitian
    scalar: float  # mu (secrecy problem) or beta (artificial-noise problem)
    status: str  # "optimal" | "near-rank-one" | "infeasible"
    duality_gap: float
    objective: float = math.nan
    # certified bound on the relaxation value (secrecy problem only)
    upper_bound: float = math.nan
    rank_ratio: float = 0.0
    iterations: int = 0
    # beamformer-space matrix W (= S / mu for the secrecy problem)
    beam_matrix: np.ndarray | None = None


def rank_ratio(S: np.ndarray) -> float:
    ev = np.linalg.eigvalsh(0.5 * (S + S.conj().T))
    return 0.0 if ev[-1] <= 0 else max(0.0, ev[0]) / ev[-1]


def _status(res: LmiResult, ratio: float) -> str:
    if res.converged and res.gap <= GAP_OPTIMAL and ratio <= RANK_ONE_TOL:
        return "optimal"
    return "near-rank-one"


def solve_secrecy_cc_sdp(HD, HE, pr1, pr2, sigma_rf_sq, tol=1e-9, max_iter=100) -> SdpOutcome:
    """Charnes-Cooper relaxation of  max (s2 + w^H HD w)/(s2 + w^H HE w)
    subject to |w_i|^2 <= pr_i.

    Internally w = diag(sqrt(pr)) v and channels are scaled by the noise, so
    the solver sees unit caps.  With mu eliminated through the
    normalization equality the program reads
        max 1 + tr(S (A - B))  s.t.  S_ii + tr(S B) <= 1,  S >= 0
    where mu = 1 - tr(S B).
    """
    if pr1 <= 0 or pr2 <= 0:
        raise ValueError("power caps must be positive")
    Dg = np.diag(np.sqrt([pr1, pr2]))
    A = Dg @ np.asarray(HD) @ Dg / sigma_rf_sq
    B = Dg @ np.asarray(HE) @ Dg / sigma_rf_sq
    a, bcoef = trace_coeffs(A), trace_coeffs(B)
    c = -(a - bcoef)
    lin_A = np.array([-(np.array([1, 0, 0, 0]) + bcoef),
                      -(np.array([0, 1, 0, 0]) + bcoef)])
    F0, F = _lmi_blocks(4, lin_A, np.ones(2))
    t0 = 0.5 / (2 + max(0.0, np.trace(B).real))
    res = solve_lmi(c, F0, F, [t0, t0, 0, 0], tol=tol, max_iter=max_iter)
    S_n = unpack(res.x)
    mu_n = 1 - float(np.real(np.trace(S_n @ B)))
    V = S_n / mu_n
    W = Dg @ V @ Dg
    mu = mu_n / sigma_rf_sq
    S = mu * W
    ratio = rank_ratio(W)
    # The slack multipliers y give the dual  min 1 + y1 + y2  s.t.
    # y1 G1 + y2 G2 >= A - B  with G_i = e_i e_i^T + B.  Since G1 + G2 >= I,
    # raising both by the worst violation makes any y exactly feasible.
    y = np.maximum(np.diag(res.Z)[4:6], 0.0)
    C = A - B
    M = y[0] * (np.diag([1.0, 0.0]) + B) + y[1] * (np.diag([0.0, 1.0]) + B) - C
    t = max(0.0, -float(np.linalg.eigvalsh(0.5 * (M + M.conj().T))[0]))
    lower = 1 - res.primal
    upper = max(lower, 1 + y.sum() + 2 * t)
    gap = (upper - lower) / (1 + abs(lower))
    status = "optimal" if gap <= GAP_OPTIMAL and ratio <= RANK_ONE_TOL else "near-rank-one"
    return SdpOutcome(matrix=S, scalar=mu, status=status, duality_gap=gap,
                      objective=lower, upper_bound=upper, rank_ratio=ratio,
                      iterations=res.iterations, beam_matrix=W)


def jamming_gains(hD, shared_gain=False) -> np.ndarray:
    """Per-user |n_a,i|^2 / beta^2 for the construction n_a = beta (hD2, -hD1)."""
    hD = np.asarray(hD)
    if shared_gain:
        return np.array([abs(hD[0]) ** 2, abs(hD[0]) ** 2])
    return np.array([abs(hD[1]) ** 2, abs(hD[0]) ** 2])


def solve_an_power_sdp(HD, hD, pr1, pr2, rth_d, sigma_rf_sq, shared_gain=False,
                       tol=1e-9, max_iter=100) -> SdpOutcome:
    """Maximize the jamming scale beta with the destination QoS held.

        max beta  s.t.  W_ii + beta^2 g_i <= pr_i,  tr(W HD) >= s2 (2^(2R) - 1),  W >= 0

    solved in gamma = beta^2 (same maximizer).
    """
    if pr1 <= 0 or pr2 <= 0:
        raise ValueError("power caps must be positive")
    pr = np.array([pr1, pr2], float)
    g = jamming_gains(hD, shared_gain)
    q = 2 ** (2 * rth_d) - 1
    gamma_cap = float(np.min(pr / g))
    if q <= 0:
        return SdpOutcome(matrix=np.zeros((2, 2), complex), scalar=math.sqrt(gamma_cap),
                          status="optimal", duality_gap=0.0, objective=math.sqrt(gamma_cap),
                          beam_matrix=np.zeros((2, 2), complex))
    Dg = np.diag(np.sqrt(pr))
    A = Dg @ np.asarray(HD) @ Dg / sigma_rf_sq
    q_max = float(np.sum(np.sqrt(np.maximum(np.diag(A).real, 0)))) ** 2
    if q > q_max * (1 + 1e-12):
        return SdpOutcome(matrix=np.zeros((2, 2), complex), scalar=0.0, status="infeasible",
                          duality_gap=math.nan, objective=math.nan)
    if q >= q_max * (1 - 1e-9):
        # feasible set has no interior: full-power phase-aligned w, no jamming
        v = np.exp(1j * np.angle(np.asarray(hD)))
        W = Dg @ np.outer(v, v.conj()) @ Dg
        return SdpOutcome(matrix=W, scalar=0.0, status="optimal", duality_gap=0.0,
                          objective=0.0, beam_matrix=W)
    kappa = g / pr
    kmax = float(np.max(kappa))
    kr = kappa / kmax
    a = trace_coeffs(A)
    # variables (v11, v22, Re v12, Im v12, t) with t = gamma * kmax
    lin_A = np.array([[-1, 0, 0, 0, -kr[0]],
                      [0, -1, 0, 0, -kr[1]],
                      [*a, 0],
                      [0, 0, 0, 0, 1]], float)
    lin_b = np.array([1, 1, -q, 0], float)
    F0, F = _lmi_blocks(4, lin_A, lin_b)
    c = np.array([0, 0, 0, 0, -1.0])
    # strictly feasible start: shrink the phase-aligned full-power matrix
    tau = min(0.1, (q_max - q) / (4 * q_max))
    v = np.exp(1j * np.angle(np.asarray(hD)))
    V0 = (1 - 2 * tau) * np.outer(v, v.conj()) + tau * np.eye(2)
    x0 = [V0[0, 0].real, V0[1, 1].real, V0[0, 1].real, V0[0, 1].imag, tau / 2]
    res = solve_lmi(c, F0, F, x0, tol=tol, max_iter=max_iter)
    V = unpack(res.x[:4])
    W = Dg @ V @ Dg
    gamma = max(0.0, res.x[4]) / kmax
    ratio = rank_ratio(W)
    beta = math.sqrt(gamma)
    return SdpOutcome(matrix=W, scalar=beta, status=_status(res, ratio), duality_gap=res.gap,
                      objective=beta, rank_ratio=ratio, iterations=res.iterations,
                      beam_matrix=W)


def extract_rank_one(S: np.ndarray) -> tuple[np.ndarray, bool]:
    """Dominant eigen-component sqrt(lambda_max) u_max and a not-rank-one flag."""
    S = 0.5 * (np.asarray(S) + np.asarray(S).conj().T)
    ev, U = np.linalg.eigh(S)
    if ev[-1] <= 0:
        return np.zeros(S.shape[0], complex), False
    return math.sqrt(ev[-1]) * U[:, -1], max(0.0, ev[0]) / ev[-1] > RANK_ONE_TOL


def scale_to_caps(v: np.ndarray, caps) -> np.ndarray:
    """Largest multiple of ``v`` meeting |v_i|^2 <= caps_i."""
    mag = np.abs(v)
    if not np.any(mag > 0):
        return v
    nz = mag > 0
    s = np.min(np.sqrt(np.asarray(caps, float))[nz] / mag[nz])
    return v * s


def gaussian_randomization(S: np.ndarray, power_caps, objective: Callable[[np.ndarray], float],
                           n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Best cap-feasible candidate among the scaled principal eigenvector and
    ``n_samples`` draws from CN(0, S), each scaled to the per-element caps."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    S = 0.5 * (np.asarray(S) + np.asarray(S).conj().T)
    ev, U = np.linalg.eigh(S)
    root = U * np.sqrt(np.clip(ev, 0, None))
    w0, _ = extract_rank_one(S)
    cands = [w0, scale_to_caps(w0, power_caps)]
    xi = (rng.standard_normal((n_samples, 2)) + 1j * rng.standard_normal((n_samples, 2))) / math.sqrt(2)
    caps = np.asarray(power_caps, float)
    for z in xi @ root.T:
        cands.append(scale_to_caps(z, caps))
    best, best_val = cands[0], -math.inf
    for w in cands:
        if np.any(np.abs(w) ** 2 > caps * (1 + 1e-12)):
            continue
        val = objective(w)
        if val > best_val:
            best, best_val = w, val
    return best


def secrecy_ratio(w, hD, hE, sigma_rf_sq):
    """(s2 + |hD^H w|^2) / (s2 + |hE^H w|^2), broadcasting over ``w``'s leading axes."""
    num = sigma_rf_sq + np.abs(np.sum(np.conj(hD) * w, axis=-1)) ** 2
    den = sigma_rf_sq + np.abs(np.sum(np.conj(hE) * w, axis=-1)) ** 2
    return num / den


@dataclass
class BeamformerSolution:
    w: np.ndarray
    n_a: np.ndarray
    a: float = math.nan  # zero-forcing scale
    beta: float = 0.0  # jamming scale
    alpha: tuple[float, float] = (math.nan, math.nan)
    achieved_objective: float = math.nan
    flag: str = ""

    def transmit_powers(self) -> np.ndarray:
        return np.abs(self.w) ** 2 + np.abs(self.n_a) ** 2


def _golden_max(f, lo, hi, tol=1e-13, max_iter=200):
    inv = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    cands = [(f(a), a), (fc, c), (fd, d), (f(b), b)]
    return max(cands)[1]


def brute_force_oracle(hD, hE, pr1, pr2, sigma_rf_sq, grid_density=64) -> BeamformerSolution:
    """Exhaustive grid over w = (r1, r2 e^{j delta}) with a golden-section polish.

    The global phase of w does not change the secrecy ratio, leaving three
    real search dimensions (phases use twice the radial density).  Scaling w
    up moves the ratio monotonically, so a maximizer other than w = 0 sits on
    a face where one relay transmits at full power; the polish runs a nested
    golden-section search (magnitude outside, phase inside) on both faces.
    """
    if grid_density < 64:
        raise ValueError("grid_density must be >= 64")
    hD, hE = np.asarray(hD, complex), np.asarray(hE, complex)
    caps = (math.sqrt(pr1), math.sqrt(pr2))

    def ratio(r1, r2, d):
        w2 = r2 * np.exp(1j * d)
        num = sigma_rf_sq + np.abs(np.conj(hD[0]) * r1 + np.conj(hD[1]) * w2) ** 2
        den = sigma_rf_sq + np.abs(np.conj(hE[0]) * r1 + np.conj(hE[1]) * w2) ** 2
        return num / den

    r1g = np.linspace(0, caps[0], grid_density)
    r2g = np.linspace(0, caps[1], grid_density)
    dg = np.linspace(0, 2 * math.pi, 2 * grid_density, endpoint=False)
    vals = ratio(r1g[:, None, None], r2g[None, :, None], dg[None, None, :])
    i, j, k = np.unravel_index(int(np.argmax(vals)), vals.shape)
    best = (float(vals[i, j, k]), r1g[i], r2g[j], dg[k])

    phase_grid = np.linspace(0, 2 * math.pi, 8 * grid_density, endpoint=False)
    dphi = phase_grid[1]

    def best_phase(r1, r2):
        v = ratio(r1, r2, phase_grid)
        d0 = phase_grid[int(np.argmax(v))]
        d = _golden_max(lambda t: float(ratio(r1, r2, t)), d0 - dphi, d0 + dphi)
        return float(ratio(r1, r2, d)), d

    for face in (0, 1):
        free = 1 - face
        grid = np.linspace(0, caps[free], grid_density)

        def at(r, face=face):
            return (caps[0], r) if face == 0 else (r, caps[1])

        prof = [best_phase(*at(r))[0] for r in grid]
        g = int(np.argmax(prof))
        lo, hi = grid[max(g - 1, 0)], grid[min(g + 1, grid_density - 1)]
        r = _golden_max(lambda t: best_phase(*at(t))[0], lo, hi)
        val, d = best_phase(*at(r))
        if val > best[0]:
            best = (val, *at(r), d)
    val, r1, r2, d = best
    w = np.array([r1, r2 * np.exp(1j * d)])
    return BeamformerSolution(w=w, n_a=np.zeros(2, complex), achieved_objective=float(ratio(r1, r2, d)))
