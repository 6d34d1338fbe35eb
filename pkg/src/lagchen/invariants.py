"""Cubic form, curvature and Chen-type invariants of horizontal immersions into S^7(1).

For a horizontal lift E0 of a Lagrangian immersion into CP^3(4) the
J-pairing C(X, Y, Z) = <h(X, Y), JZ> is read off as Re<D_X dE0(Y), i dE0(Z)>.
The curvature follows from the Gauss equation with ambient constant 1:

    R(X,Y,Z,W) = <X,W><Y,Z> - <X,Z><Y,W>
                 + sum_m [C(X,W,m) C(Y,Z,m) - C(X,Z,m) C(Y,W,m)]

and K(X, Y) = R(X, Y, Y, X).
"""
import itertools
from dataclasses import dataclass, field

import numpy as np

from ._accel import njit
from .assembly import T, ProfileJet, directional, unit_t_field
from .errors import FrameError, NotLagrangianError
from .vectors import gram_schmidt, real_inner

N = 3
CHEN_CONSTANT = 2.0  # (n-2)(n+1)/2 for n = 3 with ambient constant 1
IMPROVED_COEFF = 1.5  # n^2/2 * (2n-3)/(2n+3)
CLASSICAL_COEFF = 2.25  # n^2/2 * (n-2)/(n-1)
MINIMALITY_THRESHOLD = 1e-6
HORIZONTALITY_TOL = 1e-6
SPHERE_POINTS = 2000

_PERMS = list(itertools.permutations(range(3)))


@dataclass(frozen=True)
class CubicTensor:
    comp: np.ndarray
    symmetry_residual: float = 0.0

    @classmethod
    def from_raw(cls, raw):
        raw = np.asarray(raw, dtype=float)
        sym = sum(raw.transpose(p) for p in _PERMS) / len(_PERMS)
        resid = max(float(np.max(np.abs(raw - raw.transpose(p)))) for p in _PERMS)
        return cls(sym, resid)

    def __getitem__(self, idx):
        return self.comp[idx]

    def rotated(self, Q):
        """Components in the frame e'_i = sum_j Q[i, j] e_j."""
        return CubicTensor(np.einsum("ia,jb,kc,abc->ijk", Q, Q, Q, self.comp), self.symmetry_residual)


def adapted_structure(lam2, a=0.0, b=0.0):
    """Cubic tensor in the normal form of an equality point (lam1 = 4 lam2)."""
    C = np.zeros((3, 3, 3))

    def put(i, j, k, val):
        for p in set(itertools.permutations((i, j, k))):
            C[p] = val

    put(0, 0, 0, 4 * lam2)
    put(0, 1, 1, lam2)
    put(0, 2, 2, lam2)
    put(1, 1, 1, a)
    put(1, 2, 2, -a)
    put(1, 1, 2, b)
    put(2, 2, 2, -b)
    return CubicTensor(C)


@dataclass(frozen=True)
class TangentFrame:
    """Orthonormal tangent frame e_i = sum_a X[i, a] d_a E0."""

    vectors: np.ndarray  # E_1, E_2, E_3 in C^4
    coefficients: np.ndarray  # X, 3 x 3
    gram_residual: float


def tangent_frame(jet):
    """Gram-Schmidt of (d_t E0, d_u E0, d_v E0); e_1 stays along the first coordinate."""
    fr = gram_schmidt(jet.first)
    return TangentFrame(fr.vectors, fr.coefficients, fr.gram_residual)


def horizontality(jet):
    return max(abs(real_inner(d, 1j * jet.value)) for d in jet.first)


def cubic_form(jet, frame, tol=HORIZONTALITY_TOL):
    """C(i,j,k) = Re<sum X_i^a X_j^b d_a d_b E0, i E_k>, symmetrized.

    The derivative-of-coefficient terms are tangent and pair to zero with
    i E_k on a horizontal immersion, so only second partials enter.
    """
    resid = horizontality(jet)
    if resid > tol:
        raise NotLagrangianError(f"horizontality residual {resid:.3e} exceeds {tol:g}; C is not defined")
    X = frame.coefficients
    hess = np.einsum("ia,jb,abm->ijm", X, X, jet.second)
    iE = 1j * frame.vectors
    raw = np.einsum("ijm,km->ijk", hess.real, iE.real) + np.einsum("ijm,km->ijk", hess.imag, iE.imag)
    return CubicTensor.from_raw(raw)


def mean_curvature_vector(C):
    """Components <H, J e_k> = (1/n) sum_i C(i, i, k)."""
    return np.einsum("iik->k", C.comp) / N


def mean_curvature_sq(C):
    return float(np.sum(mean_curvature_vector(C) ** 2))


# -- curvature kernels -------------------------------------------------------


@njit
def _curvature_loops(C):
    R = np.zeros((3, 3, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                for l in range(3):
                    val = 0.0
                    if i == l and j == k:
                        val += 1.0
                    if i == k and j == l:
                        val -= 1.0
                    for m in range(3):
                        val += C[i, l, m] * C[j, k, m] - C[i, k, m] * C[j, l, m]
                    R[i, j, k, l] = val
    return R


def _curvature_numpy(C):
    d = np.eye(3)
    return (
        np.einsum("il,jk->ijkl", d, d)
        - np.einsum("ik,jl->ijkl", d, d)
        + np.einsum("ilm,jkm->ijkl", C, C)
        - np.einsum("ikm,jlm->ijkl", C, C)
    )


@njit
def _plane_curvatures_loops(R, normals):
    n = normals.shape[0]
    out = np.empty(n)
    for p in range(n):
        u0, u1, u2 = normals[p, 0], normals[p, 1], normals[p, 2]
        # X = pivot-safe unit vector orthogonal to u, Y = u x X
        if abs(u0) < 0.9:
            x0, x1, x2 = 0.0, -u2, u1
        else:
            x0, x1, x2 = u2, 0.0, -u0
        nx = np.sqrt(x0 * x0 + x1 * x1 + x2 * x2)
        x0, x1, x2 = x0 / nx, x1 / nx, x2 / nx
        y0 = u1 * x2 - u2 * x1
        y1 = u2 * x0 - u0 * x2
        y2 = u0 * x1 - u1 * x0
        X = (x0, x1, x2)
        Y = (y0, y1, y2)
        k = 0.0
        for i in range(3):
            for j in range(3):
                for a in range(3):
                    for b in range(3):
                        k += R[i, j, a, b] * X[i] * Y[j] * Y[a] * X[b]
        out[p] = k
    return out


def _completions(normals):
    normals = np.atleast_2d(normals)
    helper = np.where(np.abs(normals[:, :1]) < 0.9, np.array([[1.0, 0.0, 0.0]]), np.array([[0.0, 1.0, 0.0]]))
    X = np.cross(normals, helper)
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    Y = np.cross(normals, X)
    return X, Y


def _plane_curvatures_numpy(R, normals):
    X, Y = _completions(normals)
    return np.einsum("ijab,pi,pj,pa,pb->p", R, X, Y, Y, X)


def curvature_tensor(C, use_numba=None):
    comp = C.comp if isinstance(C, CubicTensor) else np.asarray(C, dtype=float)
    if use_numba is False:
        return _curvature_numpy(comp)
    return _curvature_loops(np.ascontiguousarray(comp))


def plane_curvatures(R, normals, use_numba=None):
    """K(u^perp) for each unit normal u (rows of ``normals``)."""
    normals = np.ascontiguousarray(np.atleast_2d(normals), dtype=float)
    if use_numba is False:
        return _plane_curvatures_numpy(R, normals)
    return _plane_curvatures_loops(np.ascontiguousarray(R), normals)


def sectional_curvature(R, X, Y, tol=1e-10):
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    G = np.array([[X @ X, X @ Y], [Y @ X, Y @ Y]])
    if np.max(np.abs(G - np.eye(2))) > tol:
        raise ValueError("plane vectors must be orthonormal")
    return float(np.einsum("ijkl,i,j,k,l->", R, X, Y, Y, X))


def scalar_tau(R):
    e = np.eye(3)
    return sum(sectional_curvature(R, e[i], e[j]) for i in range(3) for j in range(i + 1, 3))


def fibonacci_sphere(n=SPHERE_POINTS):
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    r = np.sqrt(1.0 - z * z)
    phi = np.pi * (3.0 - np.sqrt(5.0)) * k
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def normal_operator(R):
    """Symmetric Q with K(u^perp) = u^T Q u for unit u (dimension three only)."""
    star = [(1, 2), (2, 0), (0, 1)]  # e_a -> e_b ^ e_c
    Q = np.empty((3, 3))
    for a, (i, j) in enumerate(star):
        for b, (k, l) in enumerate(star):
            Q[a, b] = R[i, j, l, k]
    return 0.5 * (Q + Q.T)


@dataclass(frozen=True)
class PlaneMinimum:
    inf_K: float
    normal: np.ndarray
    grid_value: float
    grid_normal: np.ndarray
    iterations: int


def inf_sectional(R, n_points=SPHERE_POINTS, grad_tol=1e-8, max_iter=50):
    """Minimum of K over 2-planes u^perp, by sphere sampling then Newton refinement on S^2."""
    grid = fibonacci_sphere(n_points)
    ks = plane_curvatures(R, grid)
    best = int(np.argmin(ks))
    u = grid[best].copy()
    Q = normal_operator(R)
    k_val = float(u @ Q @ u)
    it = 0
    for it in range(1, max_iter + 1):
        grad = 2.0 * (Q @ u - k_val * u)
        if np.linalg.norm(grad) < grad_tol:
            break
        P = np.eye(3) - np.outer(u, u)
        H = 2.0 * (P @ Q @ P - k_val * P)
        # Newton in the tangent plane, falling back to a gradient step when
        # the projected Hessian is not positive there
        step = -np.linalg.lstsq(H + np.outer(u, u), grad, rcond=None)[0]
        step = P @ step
        if grad @ step >= 0:
            step = -0.25 * grad
        trial = u + step
        trial /= np.linalg.norm(trial)
        k_trial = float(trial @ Q @ trial)
        while k_trial > k_val and np.linalg.norm(step) > 1e-16:
            step *= 0.5
            trial = u + step
            trial /= np.linalg.norm(trial)
            k_trial = float(trial @ Q @ trial)
        if k_trial > k_val:
            break
        u, k_val = trial, k_trial
    # u and -u name the same plane; report the one with non-negative leading entry
    lead = int(np.argmax(np.abs(u)))
    if u[lead] < 0:
        u = -u
    return PlaneMinimum(float(min(k_val, ks[best])), u, float(ks[best]), grid[best], it)


def chen_rhs(H_norm_sq, version="improved"):
    if H_norm_sq < 0:
        raise ValueError("H_norm_sq must be non-negative")
    coeff = {"improved": IMPROVED_COEFF, "classical": CLASSICAL_COEFF}[version]
    return CHEN_CONSTANT + coeff * H_norm_sq


@dataclass(frozen=True)
class AdaptedFrame:
    rotation: np.ndarray  # rows: e'_i in the old frame
    C: CubicTensor
    lam1: float
    lam2: float
    minimal: bool


def adapted_frame(C, threshold=MINIMALITY_THRESHOLD):
    """Rotate so that H = |H| J e'_1; e'_2, e'_3 complete it in any orientation."""
    h = mean_curvature_vector(C)
    nh = float(np.linalg.norm(h))
    if nh <= threshold:
        return AdaptedFrame(np.eye(3), C, float(C[0, 0, 0]), float(C[0, 1, 1]), True)
    e1 = h / nh
    X, Y = _completions(e1)
    Qrot = np.vstack([e1, X[0], Y[0]])
    Cn = C.rotated(Qrot)
    return AdaptedFrame(Qrot, Cn, float(Cn[0, 0, 0]), float(Cn[0, 1, 1]), False)


def equality_conditions_check(C):
    """Residuals of the normal form at an equality point, in rotation-invariant form.

    (i)   C(1,1,2) = C(1,1,3) = 0
    (ii)  C(1,2,2) = C(1,3,3) = C(1,1,1)/4,  C(1,2,3) = 0
    (iii) C(2,2,2) + C(2,3,3) = 0,  C(2,2,3) + C(3,3,3) = 0
    """
    c = C.comp
    r1 = max(abs(c[0, 0, 1]), abs(c[0, 0, 2]))
    quarter = c[0, 0, 0] / 4.0
    r2 = max(abs(c[0, 1, 1] - quarter), abs(c[0, 2, 2] - quarter), abs(c[0, 1, 2]))
    r3 = max(abs(c[1, 1, 1] + c[1, 2, 2]), abs(c[1, 1, 2] + c[2, 2, 2]))
    # given (i), (iii) is equivalent to the trace of C having no e_2, e_3
    # part; reported separately so the redundancy can be asserted
    h = mean_curvature_vector(C)
    trace_transverse = max(abs(h[1]), abs(h[2])) * N
    return {"i": float(r1), "ii": float(r2), "iii": float(r3), "trace_transverse": float(trace_transverse)}


@dataclass
class ChenReport:
    tau: float
    inf_K: float
    min_plane: np.ndarray
    delta: float
    H_norm_sq: float
    improved_rhs: float
    classical_rhs: float
    improved_gap: float
    classical_slack: float
    condition_residuals: dict = field(default_factory=dict)
    lam1: float = 0.0
    lam2: float = 0.0
    minimal: bool = False
    symmetry_residual: float = 0.0


def chen_report(C):
    R = curvature_tensor(C)
    tau = scalar_tau(R)
    pm = inf_sectional(R)
    hsq = mean_curvature_sq(C)
    improved = chen_rhs(hsq, "improved")
    classical = chen_rhs(hsq, "classical")
    delta = tau - pm.inf_K
    ad = adapted_frame(C)
    return ChenReport(
        tau=tau,
        inf_K=pm.inf_K,
        min_plane=pm.normal,
        delta=delta,
        H_norm_sq=hsq,
        improved_rhs=improved,
        classical_rhs=classical,
        improved_gap=improved - delta,
        classical_slack=classical - delta,
        condition_residuals=equality_conditions_check(ad.C),
        lam1=ad.lam1,
        lam2=ad.lam2,
        minimal=ad.minimal,
        symmetry_residual=C.symmetry_residual,
    )


@dataclass(frozen=True)
class StructureResiduals:
    eq_e1e1: float  # |D_{E1} E1 - (4 lam2 i E1 - E0)|
    eq_eje1: tuple  # |D_{Ej} E1 - (b1 + i lam2) Ej|, j = 2, 3
    dlam2_along: tuple  # E_j(lam2), j = 2, 3
    t_rate: float  # E_1(t) - 3 lam2


def structure_equation_residuals(jet, profile, frame):
    """Check D_{E1}E1 = 4 lam2 i E1 - E0 and D_{Ej}E1 = (b1 + i lam2) Ej on a constructed immersion."""
    pj = profile if isinstance(profile, ProfileJet) else ProfileJet.from_state(profile)
    E1, dE1, f = unit_t_field(jet)
    if abs(abs(real_inner(E1, frame.vectors[0])) - 1.0) > 1e-8:
        raise FrameError("frame e_1 is not the unit t-direction")
    X = frame.coefficients
    E0 = jet.value
    lam, b = pj.lam2, pj.b1
    r5 = float(np.linalg.norm(directional(dE1, X[0]) - (4 * lam * 1j * E1 - E0)))
    r6 = tuple(float(np.linalg.norm(directional(dE1, X[j]) - (b + 1j * lam) * frame.vectors[j])) for j in (1, 2))
    dl = tuple(float(X[j, T] * pj.dlam2) for j in (1, 2))
    return StructureResiduals(r5, r6, dl, float(X[0, T] - 3 * lam))
