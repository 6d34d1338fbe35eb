"""Profile system for (b1, lam2) as functions of the circle parameter t.

    db1/dt   = -(1 + 3 lam2^2 + b1^2) / (3 lam2)
    dlam2/dt = (2/3) b1

with first integral I = lam2 (1 + lam2^2 + b1^2).  The solutions reach the
singular locus lam2 = 0 in finite t in both directions, so trajectories stop
early with an explicit status rather than running to ``t_end``.
"""
import csv
import math
from dataclasses import dataclass

import numpy as np

from ._accel import njit
from .errors import DivergenceError, RangeError, SingularityError

LAM_THRESHOLD = 1e-6
B_CAP = 1e6
MIN_STEP = 1e-12
LOCAL_TOL = 1e-13

COMPLETE = "complete"
STATUS_NAMES = {
    0: COMPLETE,
    1: "lam2_below_threshold",
    2: "b1_exceeds_cap",
    3: "step_underflow",
    4: "non_finite",
    5: "capacity_exhausted",
}


@dataclass(frozen=True)
class ProfileState:
    t: float
    b1: float
    lam2: float


def rhs(state, threshold=LAM_THRESHOLD):
    """Right-hand side (db1/dt, dlam2/dt) at ``state``."""
    b1, lam2 = state.b1, state.lam2
    if not abs(lam2) > threshold:
        raise SingularityError(f"lam2 = {lam2:g} is on the singular (minimal) locus |lam2| <= {threshold:g}", state)
    return -(1.0 + 3.0 * lam2 * lam2 + b1 * b1) / (3.0 * lam2), (2.0 / 3.0) * b1


def first_integral(state):
    return state.lam2 * (1.0 + state.lam2 ** 2 + state.b1 ** 2)


@njit
def _rhs(b, lam):
    return -(1.0 + 3.0 * lam * lam + b * b) / (3.0 * lam), (2.0 / 3.0) * b


@njit
def _rk4(b, lam, h):
    k1b, k1l = _rhs(b, lam)
    k2b, k2l = _rhs(b + 0.5 * h * k1b, lam + 0.5 * h * k1l)
    k3b, k3l = _rhs(b + 0.5 * h * k2b, lam + 0.5 * h * k2l)
    k4b, k4l = _rhs(b + h * k3b, lam + h * k3l)
    return (
        b + h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b),
        lam + h / 6.0 * (k1l + 2.0 * k2l + 2.0 * k3l + k4l),
    )


@njit
def _integrate_kernel(t0, b0, lam0, t_end, h, lam_tol, b_cap, h_min, local_tol, capacity):
    ts = np.empty(capacity)
    bs = np.empty(capacity)
    ls = np.empty(capacity)
    ts[0] = t0
    bs[0] = b0
    ls[0] = lam0
    n = 1
    sign = 1.0 if t_end > t0 else -1.0
    hcur = abs(h)
    t, b, lam = t0, b0, lam0
    status = 0
    while sign * (t_end - t) > 0.0:
        remaining = sign * (t_end - t)
        last = hcur >= remaining
        step = sign * (remaining if last else hcur)
        b1, l1 = _rk4(b, lam, step)
        bh, lh = _rk4(b, lam, 0.5 * step)
        b2, l2 = _rk4(bh, lh, 0.5 * step)
        ok = np.isfinite(b1) and np.isfinite(l1) and np.isfinite(b2) and np.isfinite(l2)
        if ok:
            # relative per component: I = lam2 (1 + lam2^2 + b1^2) is only as
            # accurate as lam2 relative to itself when lam2 is small
            err = max(abs(b1 - b2) / max(abs(b), 1.0), abs(l1 - l2) / abs(lam))
            ok = err <= local_tol and l1 * lam > 0.0
        if not ok:
            hcur *= 0.5
            if hcur < h_min:
                status = 3
                break
            continue
        t = t_end if last else t + step
        b, lam = b2, l2
        if n >= capacity:
            status = 5
            break
        ts[n] = t
        bs[n] = b
        ls[n] = lam
        n += 1
        if abs(lam) < lam_tol:
            status = 1
            break
        if abs(b) > b_cap:
            status = 2
            break
    return ts[:n], bs[:n], ls[:n], status


@dataclass(frozen=True)
class ProfileTrajectory:
    t: np.ndarray
    b1: np.ndarray
    lam2: np.ndarray
    db1: np.ndarray
    dlam2: np.ndarray
    first_integral_value: float
    max_drift: float
    status: str
    t_end_requested: float

    @property
    def samples(self):
        return [ProfileState(float(t), float(b), float(l)) for t, b, l in zip(self.t, self.b1, self.lam2)]

    @property
    def complete(self):
        return self.status == COMPLETE

    @property
    def span(self):
        return (float(min(self.t[0], self.t[-1])), float(max(self.t[0], self.t[-1])))

    @property
    def last_state(self):
        return ProfileState(float(self.t[-1]), float(self.b1[-1]), float(self.lam2[-1]))

    def first_integrals(self):
        return self.lam2 * (1.0 + self.lam2 ** 2 + self.b1 ** 2)

    def to_csv(self, path):
        """Write ``t,b1,lam2,first_integral`` rows with 17 significant digits."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "b1", "lam2", "first_integral"])
            for row in zip(self.t, self.b1, self.lam2, self.first_integrals()):
                w.writerow([f"{x:.17g}" for x in row])


def integrate(init, t_end, step=1e-3, threshold=LAM_THRESHOLD, b_cap=B_CAP, min_step=MIN_STEP, local_tol=LOCAL_TOL):
    """RK4 at fixed ``step``, halving only where a step-doubling check fails.

    Returns a :class:`ProfileTrajectory`; ``status`` is ``"complete"`` when
    ``t_end`` was reached and names the stopping reason otherwise.
    """
    if not all(math.isfinite(x) for x in (init.t, init.b1, init.lam2)):
        raise DivergenceError("non-finite initial state", last_state=init)
    if not abs(init.lam2) > threshold:
        raise SingularityError(f"initial lam2 = {init.lam2:g} is on the singular locus", init)
    if t_end == init.t:
        raise RangeError("t_end must differ from the initial time")
    if step <= 0:
        raise ValueError("step must be positive")
    capacity = int(abs(t_end - init.t) / step) + 20000
    ts, bs, ls, code = _integrate_kernel(
        float(init.t), float(init.b1), float(init.lam2), float(t_end), float(step),
        float(threshold), float(b_cap), float(min_step), float(local_tol), capacity,
    )
    ts, bs, ls = np.array(ts), np.array(bs), np.array(ls)
    if code == 4 or not (np.all(np.isfinite(bs)) and np.all(np.isfinite(ls))):
        good = np.isfinite(bs) & np.isfinite(ls)
        k = int(np.argmin(good)) - 1
        raise DivergenceError("non-finite state during integration", ProfileState(ts[k], bs[k], ls[k]))
    db = -(1.0 + 3.0 * ls * ls + bs * bs) / (3.0 * ls)
    dl = (2.0 / 3.0) * bs
    integrals = ls * (1.0 + ls * ls + bs * bs)
    i0 = integrals[0]
    drift = float(np.max(np.abs(integrals - i0)) / abs(i0))
    return ProfileTrajectory(ts, bs, ls, db, dl, float(i0), drift, STATUS_NAMES[code], float(t_end))


def _locate(traj, t):
    ts = traj.t
    forward = ts[-1] > ts[0]
    lo, hi = traj.span
    if not (lo <= t <= hi):
        raise RangeError(f"t = {t!r} outside trajectory span [{lo:.17g}, {hi:.17g}]")
    if forward:
        k = int(np.searchsorted(ts, t, side="right")) - 1
    else:
        k = len(ts) - 1 - int(np.searchsorted(ts[::-1], t, side="left"))
    return min(max(k, 0), len(ts) - 2)


def dense_eval(traj, t):
    """Cubic Hermite interpolation between the bracketing knots."""
    t = float(t)
    k = _locate(traj, t)
    t0, t1 = traj.t[k], traj.t[k + 1]
    if t == t0:
        return ProfileState(t, float(traj.b1[k]), float(traj.lam2[k]))
    if t == t1:
        return ProfileState(t, float(traj.b1[k + 1]), float(traj.lam2[k + 1]))
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    b = h00 * traj.b1[k] + h10 * h * traj.db1[k] + h01 * traj.b1[k + 1] + h11 * h * traj.db1[k + 1]
    lam = h00 * traj.lam2[k] + h10 * h * traj.dlam2[k] + h01 * traj.lam2[k + 1] + h11 * h * traj.dlam2[k + 1]
    return ProfileState(t, float(b), float(lam))
