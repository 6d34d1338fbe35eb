"""Linear algebra on C^m (m = 3, 4) viewed as R^{2m}.

Vectors are plain ``complex128`` numpy arrays.  Their memory layout is the
interleaved pairs (re_1, im_1, ..., re_m, im_m), which is exactly the real
identification used throughout; :func:`as_real` exposes it without copying.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, DimensionError

FRAME_TOL = 1e-12
PIVOT_TOL = 1e-8


def vector(*components):
    """Build an ambient vector from complex components."""
    return np.asarray(components, dtype=np.complex128)


def as_real(v):
    """View a complex vector as interleaved real coordinates."""
    v = np.ascontiguousarray(v, dtype=np.complex128)
    return v.view(np.float64)


def from_real(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape[-1] % 2:
        raise DimensionError(f"odd real length {x.shape[-1]} cannot be paired into complex components")
    return x.view(np.complex128)


def J(v):
    """Complex structure: componentwise multiplication by i."""
    return 1j * np.asarray(v, dtype=np.complex128)


def _check_dims(u, v):
    if np.shape(u) != np.shape(v):
        raise DimensionError(f"dimension mismatch: {np.shape(u)} vs {np.shape(v)}")


def hermitian_inner(u, v):
    """Sum of u_k * conj(v_k); conjugate-linear in the second slot."""
    _check_dims(u, v)
    return complex(np.sum(np.asarray(u) * np.conj(v)))


def real_inner(u, v):
    """Riemannian metric on R^{2m}: the real part of the Hermitian form."""
    _check_dims(u, v)
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    return float(np.dot(u.real, v.real) + np.dot(u.imag, v.imag))


def norm(v):
    return float(np.sqrt(real_inner(v, v)))


@dataclass(frozen=True)
class OrthonormalFrame:
    """Real-orthonormal vectors in C^m.

    ``coefficients[i, j]`` expresses ``vectors[i]`` in terms of the original
    inputs of :func:`gram_schmidt` (identity when built directly).
    """

    vectors: np.ndarray
    gram_residual: float
    coefficients: np.ndarray = None

    def __len__(self):
        return len(self.vectors)

    def __getitem__(self, i):
        return self.vectors[i]


def gram_matrix(vectors):
    vs = np.asarray(vectors, dtype=np.complex128)
    return vs.real @ vs.real.T + vs.imag @ vs.imag.T


def frame_residual(vectors):
    g = gram_matrix(vectors)
    return float(np.max(np.abs(g - np.eye(len(g))))) if len(g) else 0.0


def make_frame(vectors):
    vs = np.array(vectors, dtype=np.complex128)
    return OrthonormalFrame(vs, frame_residual(vs), np.eye(len(vs)))


def gram_schmidt(vectors, pivot_tol=PIVOT_TOL):
    """Orthonormalize over R, keeping the span and the direction of the first input.

    Modified Gram-Schmidt with one reorthogonalization pass.  A pivot whose
    remaining norm falls below ``pivot_tol`` times the largest input norm
    raises :class:`DegenerateInputError` naming that pivot.
    """
    vs = np.array(vectors, dtype=np.complex128)
    if vs.ndim != 2:
        raise DimensionError("gram_schmidt expects a sequence of vectors")
    k = len(vs)
    scale = max(np.max(np.linalg.norm(vs, axis=1)), np.finfo(float).tiny)
    out = np.zeros_like(vs)
    coef = np.zeros((k, k))
    for i in range(k):
        w = vs[i].copy()
        c = np.zeros(k)
        c[i] = 1.0
        for _ in range(2):
            for j in range(i):
                p = real_inner(w, out[j])
                w = w - p * out[j]
                c = c - p * coef[j]
        n = np.linalg.norm(w)
        if n < pivot_tol * scale:
            raise DegenerateInputError(
                f"rank deficiency at pivot {i}: residual norm {n:.3e} below {pivot_tol:g} x {scale:.3e}",
                pivot=i,
            )
        out[i] = w / n
        coef[i] = c / n
    return OrthonormalFrame(out, frame_residual(out), coef)


def project_orthogonal(v, frame):
    """Remove from ``v`` its real-orthogonal projection onto the frame's span."""
    v = np.asarray(v, dtype=np.complex128)
    vectors = frame.vectors if isinstance(frame, OrthonormalFrame) else np.asarray(frame)
    out = v.copy()
    for e in vectors:
        _check_dims(v, e)
        out = out - real_inner(out, e) * e
    return out
