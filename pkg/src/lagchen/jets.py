"""Finite-difference jets (value, first and second partials) of parametric maps into C^m."""
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundaryError, DimensionError

FIRST_STEP = 1e-3
SECOND_STEP = 10 ** -2.5


@dataclass(frozen=True)
class ParametricMap:
    """A smooth map from a coordinate box in R^d (d = 1, 2, 3) to C^m.

    ``evaluator`` takes a tuple of floats and returns a complex array of
    length ``codomain``; it must be pure and reentrant.
    """

    evaluator: object
    domain_dim: int
    codomain: int
    domain_box: tuple
    name: str = ""

    def __post_init__(self):
        if self.domain_dim not in (1, 2, 3):
            raise DimensionError(f"domain_dim must be 1, 2 or 3, got {self.domain_dim}")
        if len(self.domain_box) != self.domain_dim:
            raise DimensionError("domain_box needs one interval per coordinate")

    def __call__(self, *point):
        return np.asarray(self.evaluator(tuple(float(p) for p in point)), dtype=np.complex128)

    @property
    def widths(self):
        return np.array([hi - lo for lo, hi in self.domain_box], dtype=float)


@dataclass(frozen=True)
class JetConfig:
    """Step sizes for :func:`jet_at`.

    With ``relative=True`` both steps are multiplied by the width of the
    domain box along each coordinate.
    """

    first_step: float = FIRST_STEP
    second_step: float = SECOND_STEP
    richardson: bool = True
    relative: bool = True

    def steps(self, widths):
        widths = np.asarray(widths, dtype=float)
        scale = widths if self.relative else np.ones_like(widths)
        return self.first_step * scale, self.second_step * scale

    def margins(self, widths):
        h1, h2 = self.steps(widths)
        return np.maximum(2.0 * h1, h2)


@dataclass(frozen=True)
class JetPoint:
    point: tuple
    value: np.ndarray
    first: np.ndarray  # (d, m)
    second: np.ndarray  # (d, d, m), symmetric in the first two axes
    step: tuple = field(default=())

    @property
    def domain_dim(self):
        return len(self.point)


def check_interior(pmap, point, config=JetConfig()):
    margins = config.margins(pmap.widths)
    for a, ((lo, hi), x, m) in enumerate(zip(pmap.domain_box, point, margins)):
        if x - m < lo or x + m > hi:
            raise BoundaryError(
                f"coordinate {a} = {x:.6g} is within the stencil radius of the domain [{lo:.6g}, {hi:.6g}];"
                f" required margin {m:.3e}",
                required_margin=float(m),
            )


def jet_at(pmap, point, config=JetConfig()):
    """Value, first partials (5-point central) and second partials at ``point``.

    Second partials use 3-point central / symmetric cross stencils, optionally
    combined over steps h and h/2 by Richardson extrapolation.
    """
    x0 = np.array(point, dtype=float)
    d = pmap.domain_dim
    if x0.shape != (d,):
        raise DimensionError(f"point has {x0.size} coordinates, map expects {d}")
    check_interior(pmap, x0, config)
    h1, h2 = config.steps(pmap.widths)

    def f(offset):
        return pmap(*(x0 + offset))

    f0 = f(np.zeros(d))
    m = f0.shape[0]
    first = np.zeros((d, m), dtype=np.complex128)
    second = np.zeros((d, d, m), dtype=np.complex128)
    eye = np.eye(d)

    for a in range(d):
        e = eye[a] * h1[a]
        first[a] = (-f(2 * e) + 8 * f(e) - 8 * f(-e) + f(-2 * e)) / (12 * h1[a])

    def diag(a, h):
        e = eye[a] * h
        return (f(e) - 2 * f0 + f(-e)) / (h * h)

    def cross(a, b, ha, hb):
        ea, eb = eye[a] * ha, eye[b] * hb
        return (f(ea + eb) - f(ea - eb) - f(-ea + eb) + f(-ea - eb)) / (4 * ha * hb)

    for a in range(d):
        if config.richardson:
            second[a, a] = (4 * diag(a, h2[a] / 2) - diag(a, h2[a])) / 3
        else:
            second[a, a] = diag(a, h2[a])
        for b in range(a + 1, d):
            if config.richardson:
                val = (4 * cross(a, b, h2[a] / 2, h2[b] / 2) - cross(a, b, h2[a], h2[b])) / 3
            else:
                val = cross(a, b, h2[a], h2[b])
            second[a, b] = val
            second[b, a] = val

    return JetPoint(tuple(float(v) for v in x0), f0, first, second, (tuple(h1), tuple(h2)))


def pushforward(jet, X):
    """dE(X) = sum_a X^a d_a E."""
    X = np.asarray(X, dtype=float)
    if X.shape != (jet.domain_dim,):
        raise DimensionError(f"expected {jet.domain_dim} coefficients, got {X.shape}")
    return np.tensordot(X, jet.first, axes=1)


def second_directional(jet, X, Y):
    """sum_{a,b} X^a Y^b d_a d_b E (coordinate part of D_X dE(Y))."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return np.einsum("a,b,abm->m", X, Y, jet.second)
