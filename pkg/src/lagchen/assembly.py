"""Assemble the immersion E0(t, u, v) into S^7(1) from a surface W and a profile (b1, lam2).

    E0 = ( (-b1 + i lam2) e^{it},  e^{it/3} W(u, v) ) / sqrt(1 + b1^2 + lam2^2)

The first complex slot carries the circle V = (e^{it}, 0, 0, 0); slots 2-4
carry the surface.  This placement is the gauge used by every round-trip
check below.
"""
from dataclasses import dataclass

import numpy as np

from .errors import FrameError
from .jets import ParametricMap
from .profile import ProfileState, ProfileTrajectory, dense_eval, rhs
from .surfaces import HorizontalSurface
from .vectors import real_inner

T, U, V = 0, 1, 2


@dataclass(frozen=True)
class ConstructedImmersion:
    surface: HorizontalSurface
    trajectory: ProfileTrajectory
    map: ParametricMap
    phase_perturbation: float = 0.0

    def profile(self, t):
        return dense_eval(self.trajectory, t)

    def __call__(self, t, u, v):
        return self.map(t, u, v)


def build_E0(surface, traj, phase_perturbation=0.0):
    """Immersion of the (t, u, v) box.

    ``phase_perturbation`` multiplies the first slot by exp(i eps t).  Any
    nonzero value breaks horizontality; it exists only as a negative control.
    """
    eps = float(phase_perturbation)

    def evaluate(p):
        t, u, v = p
        st = dense_eval(traj, t)
        b, lam = st.b1, st.lam2
        s = np.sqrt(1.0 + b * b + lam * lam)
        out = np.empty(4, dtype=np.complex128)
        out[0] = (-b + 1j * lam) * np.exp(1j * (1.0 + eps) * t) / s
        out[1:] = np.exp(1j * t / 3.0) * surface(u, v) / s
        return out

    box = (traj.span,) + tuple(surface.domain_box)
    name = f"E0[{surface.label}]" + (f"+phase{eps:g}" if eps else "")
    return ConstructedImmersion(surface, traj, ParametricMap(evaluate, 3, 4, box, name), eps)


def rp3_reference():
    """Totally geodesic real lift S^3 subset R^4 subset C^4 (projects to RP^3)."""

    def evaluate(p):
        psi, phi, chi = p
        return np.array(
            [np.cos(psi) * np.cos(phi), np.cos(psi) * np.sin(phi), np.sin(psi) * np.cos(chi), np.sin(psi) * np.sin(chi)],
            dtype=np.complex128,
        )

    box = ((0.3, np.pi / 2 - 0.3), (0.0, 2 * np.pi), (0.0, 2 * np.pi))
    return ParametricMap(evaluate, 3, 4, box, "rp3")


@dataclass(frozen=True)
class ProfileJet:
    """b1, lam2, s = sqrt(1 + b1^2 + lam2^2) and their t-derivatives."""

    b1: float
    lam2: float
    db1: float
    dlam2: float

    @classmethod
    def from_state(cls, state):
        db, dl = rhs(state)
        return cls(state.b1, state.lam2, db, dl)

    @property
    def s(self):
        return float(np.sqrt(1.0 + self.b1 ** 2 + self.lam2 ** 2))

    @property
    def ds(self):
        return (self.b1 * self.db1 + self.lam2 * self.dlam2) / self.s

    def coord_derivative(self, a):
        """(d_a b1, d_a lam2, d_a s) for coordinate a of (t, u, v)."""
        if a == T:
            return self.db1, self.dlam2, self.ds
        return 0.0, 0.0, 0.0


def unit_t_field(jet):
    """E1 = d_t E0 / |d_t E0| together with its coordinate partials."""
    dt = jet.first[T]
    n2 = real_inner(dt, dt)
    if n2 <= 1e-16:
        raise FrameError(f"d_t E0 vanishes at {jet.point}")
    f = 1.0 / np.sqrt(n2)
    E1 = f * dt
    dE1 = np.empty_like(jet.first)
    for a in range(jet.domain_dim):
        df = -(f ** 3) * real_inner(jet.second[a, T], dt)
        dE1[a] = df * dt + f * jet.second[a, T]
    return E1, dE1, f


def compute_V(jet, state):
    """V = (-(b1 + i lam2) E0 + E1) / s and its coordinate partials."""
    pj = state if isinstance(state, ProfileJet) else ProfileJet.from_state(state)
    E0 = jet.value
    E1, dE1, _ = unit_t_field(jet)
    z = pj.b1 + 1j * pj.lam2
    s = pj.s
    Vv = (-z * E0 + E1) / s
    dV = np.empty_like(jet.first)
    for a in range(jet.domain_dim):
        db, dl, ds = pj.coord_derivative(a)
        dV[a] = (-(db + 1j * dl) * E0 - z * jet.first[a] + dE1[a]) / s - Vv * ds / s
    return Vv, dV


def compute_W_from_immersion(jet, state, t=None):
    """W = e^{-it/3} (E0 - (-b1 + i lam2) E1) / s and its coordinate partials."""
    pj = state if isinstance(state, ProfileJet) else ProfileJet.from_state(state)
    t = jet.point[T] if t is None else t
    E0 = jet.value
    E1, dE1, _ = unit_t_field(jet)
    z = -pj.b1 + 1j * pj.lam2
    s = pj.s
    phase = np.exp(-1j * t / 3.0)
    Wv = phase * (E0 - z * E1) / s
    dW = np.empty_like(jet.first)
    for a in range(jet.domain_dim):
        db, dl, ds = pj.coord_derivative(a)
        inner = jet.first[a] - (-db + 1j * dl) * E1 - z * dE1[a]
        dW[a] = phase * inner / s - Wv * ds / s
        if a == T:
            dW[a] += (-1j / 3.0) * Wv
    return Wv, dW


def profile_jet(immersion, t):
    return ProfileJet.from_state(immersion.profile(t))


def directional(partials, X):
    """sum_a X^a partials[a]."""
    return np.tensordot(np.asarray(X, dtype=float), partials, axes=1)


__all__ = [
    "ConstructedImmersion",
    "ProfileJet",
    "ProfileState",
    "build_E0",
    "compute_V",
    "compute_W_from_immersion",
    "directional",
    "profile_jet",
    "rp3_reference",
    "unit_t_field",
]
