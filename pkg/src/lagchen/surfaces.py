"""Horizontal minimal surfaces in S^5(1) subset C^3 and checkers for them."""
from dataclasses import dataclass

import numpy as np

from .errors import ImmersionError
from .jets import JetConfig, ParametricMap, jet_at
from .vectors import gram_matrix, real_inner

TWO_PI = 2.0 * np.pi
_INV_SQRT3 = 1.0 / np.sqrt(3.0)


@dataclass(frozen=True)
class HorizontalSurface:
    map: ParametricMap
    label: str

    @property
    def domain_box(self):
        return self.map.domain_box

    def __call__(self, u, v):
        return self.map(u, v)


def _clifford(p):
    u, v = p
    return _INV_SQRT3 * np.array([np.exp(1j * u), np.exp(1j * v), np.exp(-1j * (u + v))])


def _geodesic_sphere(p):
    u, v = p
    cu = np.cos(u)
    return np.array([cu * np.cos(v), cu * np.sin(v), np.sin(u)], dtype=np.complex128)


def clifford_surface():
    """(e^{iu}, e^{iv}, e^{-i(u+v)}) / sqrt(3): the flat minimal Lagrangian torus."""
    box = ((0.0, TWO_PI), (0.0, TWO_PI))
    return HorizontalSurface(ParametricMap(_clifford, 2, 3, box, "clifford"), "clifford")


def geodesic_sphere_surface():
    """Real unit 2-sphere, totally geodesic in S^5; poles excluded."""
    box = ((-np.pi / 3, np.pi / 3), (0.0, TWO_PI))
    return HorizontalSurface(ParametricMap(_geodesic_sphere, 2, 3, box, "geodesic_sphere"), "geodesic_sphere")


# Negative controls.  Neither is horizontal, and the second is not minimal;
# they exist so the checkers can be shown to fire.

def _tilted_sphere(p):
    return np.exp(1j * p[0]) * _geodesic_sphere(p)


SMALL_SPHERE_RADIUS = 0.5


def _small_sphere(p):
    u, v = p
    r = SMALL_SPHERE_RADIUS
    return np.array(
        [r * np.cos(u) * np.cos(v), r * np.cos(u) * np.sin(v), r * np.sin(u) + 1j * np.sqrt(1 - r * r)]
    )


def tilted_sphere_surface():
    box = ((-np.pi / 3, np.pi / 3), (0.0, TWO_PI))
    return HorizontalSurface(ParametricMap(_tilted_sphere, 2, 3, box, "tilted_sphere"), "tilted_sphere")


def small_sphere_surface():
    """Latitude 2-sphere of radius 1/2 in S^5: umbilic, far from minimal."""
    box = ((-np.pi / 3, np.pi / 3), (0.0, TWO_PI))
    return HorizontalSurface(ParametricMap(_small_sphere, 2, 3, box, "small_sphere"), "small_sphere")


CATALOG = {
    "clifford": clifford_surface,
    "geodesic_sphere": geodesic_sphere_surface,
}

CONTROLS = {
    "tilted_sphere": tilted_sphere_surface,
    "small_sphere": small_sphere_surface,
}


def get_surface(name):
    factory = CATALOG.get(name) or CONTROLS.get(name)
    if factory is None:
        raise KeyError(f"unknown surface {name!r}; choose from {sorted(CATALOG) + sorted(CONTROLS)}")
    return factory()


def _map_of(surface):
    return surface.map if isinstance(surface, HorizontalSurface) else surface


def horizontality_residual(surface, point, config=JetConfig(), jet=None):
    """Return (max_a |<d_a W, iW>|, | |W|^2 - 1 |) at ``point``."""
    jet = jet if jet is not None else jet_at(_map_of(surface), point, config)
    W = jet.value
    horiz = max(abs(real_inner(d, 1j * W)) for d in jet.first)
    return horiz, abs(real_inner(W, W) - 1.0)


def induced_metric(jet):
    return gram_matrix(jet.first)


def surface_mean_curvature_norm(surface, point, config=JetConfig(), jet=None, det_tol=1e-8):
    """Norm of g^{ab} II_ab, with II the part of d_a d_b W normal to W and dW."""
    jet = jet if jet is not None else jet_at(_map_of(surface), point, config)
    g = induced_metric(jet)
    det = np.linalg.det(g)
    if det < det_tol:
        raise ImmersionError(f"induced metric degenerate at {jet.point}: det g = {det:.3e}")
    ginv = np.linalg.inv(g)
    W = jet.value
    # real basis of the span {W, W_u, W_v} in R^6
    basis = np.vstack([W, jet.first])
    B = np.hstack([basis.real, basis.imag])
    Q, _ = np.linalg.qr(B.T)
    H = np.zeros(2 * W.size)
    for a in range(2):
        for b in range(2):
            s = np.concatenate([jet.second[a, b].real, jet.second[a, b].imag])
            H += ginv[a, b] * (s - Q @ (Q.T @ s))
    return float(np.linalg.norm(H))


def nondegeneracy_gram(surface, point, config=JetConfig(), jet=None):
    """Gram determinant of {W, W_u, W_v, iW, iW_u, iW_v} as real vectors of R^6."""
    jet = jet if jet is not None else jet_at(_map_of(surface), point, config)
    vs = np.vstack([jet.value, jet.first])
    vs = np.vstack([vs, 1j * vs])
    return float(np.linalg.det(gram_matrix(vs)))


def interior_grid(box, counts, margins):
    """Cell-centred sample coordinates per axis, clipped away from the box edges."""
    axes = []
    for (lo, hi), n, m in zip(box, counts, margins):
        lo2, hi2 = lo + m, hi - m
        if n == 1:
            axes.append(np.array([0.5 * (lo2 + hi2)]))
        else:
            axes.append(lo2 + (np.arange(n) + 0.5) * (hi2 - lo2) / n)
    return axes


def surface_grid_check(surface, n=10, config=JetConfig()):
    """Worst-case catalog diagnostics over an n x n interior grid."""
    smap = _map_of(surface)
    margins = 3 * config.margins(smap.widths)
    us, vs = interior_grid(smap.domain_box, (n, n), margins)
    worst = dict(horizontality=0.0, unit_norm=0.0, mean_curvature=0.0, min_metric_det=np.inf, min_span_gram=np.inf)
    for u in us:
        for v in vs:
            jet = jet_at(smap, (u, v), config)
            h, un = horizontality_residual(smap, (u, v), jet=jet)
            worst["horizontality"] = max(worst["horizontality"], h)
            worst["unit_norm"] = max(worst["unit_norm"], un)
            worst["min_metric_det"] = min(worst["min_metric_det"], float(np.linalg.det(induced_metric(jet))))
            worst["mean_curvature"] = max(worst["mean_curvature"], surface_mean_curvature_norm(smap, (u, v), jet=jet))
            worst["min_span_gram"] = min(worst["min_span_gram"], nondegeneracy_gram(smap, (u, v), jet=jet))
    return worst
