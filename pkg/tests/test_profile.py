import csv

import numpy as np
import pytest
import sympy as sp

from lagchen.errors import DivergenceError, RangeError, SingularityError
from lagchen.profile import ProfileState, dense_eval, first_integral, integrate, rhs

# Maximal forward time from (b1, lam2) = (0, 1/2): t* = int_0^{1/2} 3 / (2 sqrt(I/l - 1 - l^2)) dl
# with I = 5/8, evaluated by mpmath quadrature at 30 digits.
T_STAR_HALF = 0.93613188986494403


def test_rhs_examples():
    assert rhs(ProfileState(0.0, 0.0, 1.0)) == pytest.approx((-4 / 3, 0.0), abs=1e-15)
    assert rhs(ProfileState(0.0, 3.0, 1.0)) == pytest.approx((-13 / 3, 2.0), abs=1e-15)


def test_rhs_singular():
    with pytest.raises(SingularityError):
        rhs(ProfileState(0.0, 1.0, 1e-7))


def test_rhs_chain_rule(rng):
    # along e_1: E1(lam2) = 2 lam2 b1, E1(b1) = -(1 + b1^2 + 3 lam2^2), E1(t) = 3 lam2
    for _ in range(100):
        b, lam = rng.uniform(-3, 3), rng.uniform(0.05, 3) * rng.choice([-1, 1])
        db, dl = rhs(ProfileState(0.0, b, lam))
        e1_t = 3 * lam
        assert dl == pytest.approx(2 * lam * b / e1_t, rel=1e-14, abs=1e-15)
        assert db == pytest.approx(-(1 + b * b + 3 * lam * lam) / e1_t, rel=1e-14)


def test_first_integral_values():
    assert first_integral(ProfileState(0, 0.0, 1.0)) == 2
    assert first_integral(ProfileState(0, 1.0, 0.5)) == pytest.approx(9 / 8)


def test_first_integral_symbolic():
    b, lam = sp.symbols("b lam")
    I = lam * (1 + lam ** 2 + b ** 2)
    db = -(1 + 3 * lam ** 2 + b ** 2) / (3 * lam)
    dl = sp.Rational(2, 3) * b
    assert sp.simplify(sp.diff(I, b) * db + sp.diff(I, lam) * dl) == 0


def test_conservation_default():
    tr = integrate(ProfileState(0.0, 0.0, 0.5), 0.9, step=1e-3)
    assert tr.complete
    assert tr.max_drift < 1e-10


def test_stops_at_singularity():
    tr = integrate(ProfileState(0.0, 0.0, 0.5), 1.0, step=1e-3)
    assert tr.status == "lam2_below_threshold"
    assert tr.max_drift < 1e-10
    assert 0 < T_STAR_HALF - tr.t[-1] < 1e-8


def test_backward_symmetry():
    # (b1, lam2, t) -> (-b1, lam2, -t) maps solutions to solutions
    fwd = integrate(ProfileState(0.0, 0.0, 0.5), 0.5)
    bwd = integrate(ProfileState(0.0, 0.0, 0.5), -0.5)
    assert bwd.t[-1] == -0.5
    assert bwd.b1[-1] == pytest.approx(-fwd.b1[-1], abs=1e-12)
    assert bwd.lam2[-1] == pytest.approx(fwd.lam2[-1], abs=1e-12)


def test_sign_invariance():
    a = integrate(ProfileState(0.0, 0.3, 0.7), 0.4)
    b = integrate(ProfileState(0.0, -0.3, -0.7), 0.4)
    assert np.allclose(a.b1, -b.b1, atol=1e-14) and np.allclose(a.lam2, -b.lam2, atol=1e-14)


def test_trajectory_invariants(rng):
    for _ in range(10):
        init = ProfileState(0.0, rng.uniform(-2, 2), rng.uniform(0.1, 2))
        tr = integrate(init, 2.0)
        assert np.all(np.diff(tr.t) > 0)
        assert np.all(np.sign(tr.lam2) == 1)
        assert np.all(tr.db1 < 0)
        assert tr.max_drift < 1e-10


def test_reversal():
    fwd = integrate(ProfileState(0.0, 0.0, 0.5), 0.8)
    back = integrate(fwd.last_state, 0.0)
    assert abs(back.b1[-1]) < 1e-8 and abs(back.lam2[-1] - 0.5) < 1e-8


def test_step_halving_convergence():
    init = ProfileState(0.0, 0.2, 0.6)
    t_end = 0.5

    def end(h):
        tr = integrate(init, t_end, step=h, local_tol=np.inf)
        return np.array([tr.b1[-1], tr.lam2[-1]])

    h = 0.02
    ref = end(h / 8)
    e1 = np.abs(end(h) - ref).max()
    e2 = np.abs(end(h / 2) - ref).max()
    assert e1 / e2 >= 12


def test_errors():
    with pytest.raises(SingularityError):
        integrate(ProfileState(0.0, 0.0, 0.0), 1.0)
    with pytest.raises(DivergenceError):
        integrate(ProfileState(0.0, np.nan, 0.5), 1.0)
    with pytest.raises(RangeError):
        integrate(ProfileState(0.0, 0.0, 0.5), 0.0)


def test_dense_eval_knots():
    tr = integrate(ProfileState(0.0, 0.0, 0.5), 0.5)
    for k in (0, 17, len(tr.t) - 1):
        st = dense_eval(tr, tr.t[k])
        assert st.b1 == tr.b1[k] and st.lam2 == tr.lam2[k]


def test_dense_eval_midpoints():
    tr = integrate(ProfileState(0.0, 0.0, 0.5), 0.6, step=1e-3)
    fine = integrate(ProfileState(0.0, 0.0, 0.5), 0.6, step=5e-4)
    for k in range(1, len(fine.t) - 1, 2):
        st = dense_eval(tr, fine.t[k])
        assert abs(st.b1 - fine.b1[k]) < 1e-9 and abs(st.lam2 - fine.lam2[k]) < 1e-9


def test_dense_eval_conserves(rng):
    tr = integrate(ProfileState(0.0, 0.0, 0.5), 0.8)
    I0 = tr.first_integral_value
    for t in rng.uniform(0, 0.8, 100):
        assert abs(first_integral(dense_eval(tr, t)) / I0 - 1) < 1e-8


def test_dense_eval_range():
    tr = integrate(ProfileState(0.0, 0.0, 0.5), 0.5)
    with pytest.raises(RangeError):
        dense_eval(tr, 0.6)


def test_dense_eval_backward_trajectory():
    tr = integrate(ProfileState(0.0, 0.0, 0.5), -0.5)
    st = dense_eval(tr, -0.25)
    fwd = integrate(ProfileState(0.0, 0.0, 0.5), 0.5)
    assert st.b1 == pytest.approx(-dense_eval(fwd, 0.25).b1, abs=1e-10)


def test_csv_export(tmp_path):
    tr = integrate(ProfileState(0.0, 0.0, 0.5), 0.01)
    path = tmp_path / "traj.csv"
    tr.to_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["t", "b1", "lam2", "first_integral"]
    assert len(rows) == len(tr.t) + 1
    assert float(rows[5][1]) == tr.b1[4]  # 17 digits round-trip
