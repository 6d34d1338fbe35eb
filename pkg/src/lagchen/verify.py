"""Verification sweep over a sample grid of a constructed (or reference) immersion."""
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .assembly import ProfileJet, build_E0, compute_V, compute_W_from_immersion, directional, rp3_reference
from .errors import GeometryError
from .invariants import (
    chen_report,
    cubic_form,
    horizontality,
    mean_curvature_vector,
    structure_equation_residuals,
    tangent_frame,
)
from .jets import JetConfig, jet_at
from .profile import ProfileState, integrate
from .surfaces import get_surface, horizontality_residual, interior_grid, surface_mean_curvature_norm
from .vectors import as_real, real_inner

DEFAULT_TOLERANCES = {
    "unit_norm": 1e-12,
    "horizontality": 1e-6,
    "c_symmetry": 1e-5,
    "lam_ratio": 1e-4,
    "conditions": 1e-4,
    "structure": 1e-4,
    "equality_gap": 1e-4,
    "h_norm": 1e-4,
    "classical_slack": 1e-4,
    "min_plane": 1e-4,
    "vw": 1e-4,
    "w_roundtrip": 1e-5,
    "surface_horizontality": 1e-6,
    "surface_mean_curvature": 1e-5,
    "rp3": 1e-5,
    "ode_drift": 1e-10,
}

CASES = ("construction", "rp3", "perturbed")
PERTURBATION = 0.05


@dataclass
class RunConfig:
    surface: str = "clifford"
    b1: float = 0.0
    lam2: float = 0.5
    t0: float = 0.0
    t1: float = 0.6
    ode_step: float = 1e-3
    grid: tuple = (3, 3, 3)
    fd_step: float = 1e-3
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    case: str = "construction"
    out: str = None

    def validate(self):
        if self.lam2 == 0:
            raise ValueError("lam2 must be nonzero (lam2 = 0 is the excluded minimal locus)")
        if len(self.grid) != 3 or any(int(n) < 2 for n in self.grid):
            raise ValueError(f"grid counts must be three integers >= 2, got {self.grid}")
        if self.ode_step <= 0 or self.fd_step <= 0:
            raise ValueError("steps must be positive")
        if self.t1 == self.t0:
            raise ValueError("t1 must differ from t0")
        if self.case not in CASES:
            raise ValueError(f"case must be one of {CASES}")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ValueError(f"unknown tolerance keys: {sorted(unknown)}")
        return self

    def normalized(self):
        """Flip (b1, lam2) -> (-b1, -lam2) so that lam2 > 0; the profile system is invariant under it."""
        if self.lam2 < 0:
            d = asdict(self)
            d.update(b1=-self.b1, lam2=-self.lam2)
            return RunConfig(**d)
        return self

    def jet_config(self):
        return JetConfig(first_step=self.fd_step, second_step=self.fd_step * math.sqrt(10.0))

    def to_json(self):
        d = asdict(self)
        d["grid"] = list(self.grid)
        return d


def trajectory_for(config):
    init = ProfileState(config.t0, config.b1, config.lam2)
    return integrate(init, config.t1, step=config.ode_step)


def sample_points(pmap, counts, jet_config):
    margins = 3 * jet_config.margins(pmap.widths)
    axes = interior_grid(pmap.domain_box, counts, margins)
    pts = []
    for i, a in enumerate(axes[0]):
        for j, b in enumerate(axes[1]):
            for k, c in enumerate(axes[2]):
                pts.append(((i, j, k), (float(a), float(b), float(c))))
    return pts


def _max(records, getter):
    vals = [getter(r) for r in records]
    vals = [v for v in vals if v is not None]
    return max(vals) if vals else None


def _point_record(idx, point, jet, frame, C, rep):
    return {
        "index": list(idx),
        "point": list(point),
        "horizontality": horizontality(jet),
        "unit_norm": abs(real_inner(jet.value, jet.value) - 1.0),
        "frame_gram_residual": frame.gram_residual,
        "c_symmetry": C.symmetry_residual,
        "tau": rep.tau,
        "inf_K": rep.inf_K,
        "min_plane": [float(x) for x in rep.min_plane],
        "delta": rep.delta,
        "H_norm_sq": rep.H_norm_sq,
        "improved_rhs": rep.improved_rhs,
        "classical_rhs": rep.classical_rhs,
        "improved_gap": rep.improved_gap,
        "classical_slack": rep.classical_slack,
        "lam1": rep.lam1,
        "lam2": rep.lam2,
        "minimal": rep.minimal,
        "conditions": rep.condition_residuals,
    }


def _construction_extras(record, immersion, jet, frame, C, rep, surface):
    t, u, v = record["point"]
    state = immersion.profile(t)
    pj = ProfileJet.from_state(state)
    lam = state.lam2
    X = frame.coefficients

    sr = structure_equation_residuals(jet, pj, frame)
    record["structure"] = {
        "e1e1": sr.eq_e1e1,
        "e2e1": sr.eq_eje1[0],
        "e3e1": sr.eq_eje1[1],
        "dlam2_e2": sr.dlam2_along[0],
        "dlam2_e3": sr.dlam2_along[1],
        "t_rate": sr.t_rate,
    }

    Vv, dV = compute_V(jet, pj)
    Wv, dW = compute_W_from_immersion(jet, pj)
    s = pj.s
    phase = np.exp(-1j * t / 3.0)
    W_in = surface(u, v)
    record["vw"] = {
        "V_unit": abs(np.linalg.norm(Vv) - 1.0),
        "V_transverse": float(np.linalg.norm(Vv[1:])),
        "DE1V": float(np.linalg.norm(directional(dV, X[0]) - 3 * lam * 1j * Vv)),
        "DE2V": float(np.linalg.norm(directional(dV, X[1]))),
        "DE3V": float(np.linalg.norm(directional(dV, X[2]))),
        "DE1W": float(np.linalg.norm(directional(dW, X[0]))),
        "DE2W": float(np.linalg.norm(directional(dW, X[1]) - s * phase * frame.vectors[1])),
        "DE3W": float(np.linalg.norm(directional(dW, X[2]) - s * phase * frame.vectors[2])),
        "W_perp_V": max(abs(real_inner(Wv, Vv)), abs(real_inner(Wv, 1j * Vv))),
        "W_roundtrip": float(np.linalg.norm(Wv[1:] - W_in)),
    }

    sh, sn = horizontality_residual(surface, (u, v))
    record["surface"] = {
        "horizontality": sh,
        "unit_norm": sn,
        "mean_curvature": surface_mean_curvature_norm(surface, (u, v)),
    }

    h = mean_curvature_vector(C)
    record["lam2_profile"] = lam
    record["lam_ratio"] = record["lam1"] / record["lam2"] if record["lam2"] else None
    record["H_norm"] = math.sqrt(record["H_norm_sq"])
    record["H_vs_2lam2"] = abs(record["H_norm"] - 2 * abs(lam))
    record["slack_vs_3lam2sq"] = abs(record["classical_slack"] - 3 * lam * lam)
    # minimizing plane normal vs e_1 (the frame is built with e_1 first)
    record["min_plane_alignment"] = abs(float(rep.min_plane[0]))
    record["H_direction_e1"] = abs(float(h[0])) / max(float(np.linalg.norm(h)), 1e-300)
    return record


def run_verification(config):
    """Run the sweep and return the report dictionary (no I/O)."""
    config = config.normalized().validate()
    tol = config.tolerances
    jc = config.jet_config()
    failures = []
    samples = []
    meta = {}

    if config.case == "rp3":
        pmap = rp3_reference()
        immersion = surface = None
    else:
        surface = get_surface(config.surface)
        traj = trajectory_for(config)
        meta["ode"] = {
            "status": traj.status,
            "t_reached": float(traj.t[-1]),
            "knots": int(len(traj.t)),
            "first_integral": traj.first_integral_value,
            "max_drift": traj.max_drift,
        }
        if not traj.complete:
            raise ProfileIncomplete(traj)
        eps = PERTURBATION if config.case == "perturbed" else 0.0
        immersion = build_E0(surface, traj, phase_perturbation=eps)
        pmap = immersion.map

    for idx, point in sample_points(pmap, config.grid, jc):
        jet = jet_at(pmap, point, jc)
        try:
            frame = tangent_frame(jet)
            C = cubic_form(jet, frame, tol=tol["horizontality"])
        except GeometryError as exc:
            failures.append({"index": list(idx), "point": list(point), "error": type(exc).__name__, "message": str(exc)})
            samples.append({"index": list(idx), "point": list(point), "horizontality": horizontality(jet),
                            "unit_norm": abs(real_inner(jet.value, jet.value) - 1.0)})
            if surface is not None:
                sh, sn = horizontality_residual(surface, point[1:])
                samples[-1]["surface"] = {"horizontality": sh, "unit_norm": sn,
                                          "mean_curvature": surface_mean_curvature_norm(surface, point[1:])}
            continue
        rep = chen_report(C)
        rec = _point_record(idx, point, jet, frame, C, rep)
        rec["max_abs_C"] = float(np.max(np.abs(C.comp)))
        if immersion is not None:
            try:
                _construction_extras(rec, immersion, jet, frame, C, rep, surface)
            except GeometryError as exc:
                failures.append({"index": list(idx), "point": list(point), "error": type(exc).__name__, "message": str(exc)})
        samples.append(rec)

    maxima = _maxima(samples)
    passed = _criteria(config, maxima, samples, failures, tol)
    if "ode" in meta:
        passed["ode_drift"] = {"value": meta["ode"]["max_drift"], "tol": tol["ode_drift"],
                               "pass": meta["ode"]["max_drift"] < tol["ode_drift"]}
    return {
        "version": __version__,
        "config": config.to_json(),
        "meta": meta,
        "samples": samples,
        "maxima": maxima,
        "failures": failures,
        "pass": passed,
        "all_pass": all(v["pass"] for v in passed.values()) and not failures,
    }


class ProfileIncomplete(GeometryError):
    def __init__(self, traj):
        super().__init__(f"profile stopped early ({traj.status}) at t = {traj.t[-1]:.17g}")
        self.trajectory = traj


def _maxima(samples):
    def g(*path, absval=True):
        def get(r):
            x = r
            for p in path:
                if not isinstance(x, dict) or p not in x:
                    return None
                x = x[p]
            if x is None:
                return None
            return abs(x) if absval else x
        return _max(samples, get)

    m = {
        "unit_norm": g("unit_norm"),
        "horizontality": g("horizontality"),
        "c_symmetry": g("c_symmetry"),
        "max_abs_C": g("max_abs_C"),
        "H_norm_sq": g("H_norm_sq"),
        "improved_gap": g("improved_gap"),
        "cond_i": g("conditions", "i"),
        "cond_ii": g("conditions", "ii"),
        "cond_iii": g("conditions", "iii"),
        "trace_transverse": g("conditions", "trace_transverse"),
    }
    for key in ("e1e1", "e2e1", "e3e1", "dlam2_e2", "dlam2_e3", "t_rate"):
        m["structure_" + key] = g("structure", key)
    for key in ("V_unit", "V_transverse", "DE1V", "DE2V", "DE3V", "DE1W", "DE2W", "DE3W", "W_perp_V", "W_roundtrip"):
        m["vw_" + key] = g("vw", key)
    for key in ("horizontality", "unit_norm", "mean_curvature"):
        m["surface_" + key] = g("surface", key)
    lam_dev = [abs(r["lam_ratio"] - 4.0) for r in samples if r.get("lam_ratio") is not None]
    m["lam_ratio_dev"] = max(lam_dev) if lam_dev else None
    m["H_vs_2lam2"] = g("H_vs_2lam2")
    m["slack_vs_3lam2sq"] = g("slack_vs_3lam2sq")
    align = [1.0 - r["min_plane_alignment"] for r in samples if "min_plane_alignment" in r]
    m["min_plane_misalignment"] = max(align) if align else None
    for key in ("tau", "inf_K", "delta"):
        vals = [r[key] for r in samples if key in r]
        m[key + "_range"] = [min(vals), max(vals)] if vals else None
    return m


def _crit(value, limit, strict=True):
    ok = value is not None and (value < limit if strict else value <= limit)
    return {"value": value, "tol": limit, "pass": bool(ok)}


def _criteria(config, m, samples, failures, tol):
    c = {
        "unit_norm": _crit(m["unit_norm"], tol["unit_norm"]),
        "horizontality": _crit(m["horizontality"], tol["horizontality"]),
        "no_hard_failures": {"value": len(failures), "tol": 0, "pass": not failures},
    }
    if config.case == "rp3":
        c["c_vanishes"] = _crit(m["max_abs_C"], 1e-6)
        c["tau"] = _crit(_range_dev(m["tau_range"], 3.0), tol["rp3"])
        c["inf_K"] = _crit(_range_dev(m["inf_K_range"], 1.0), tol["rp3"])
        c["delta"] = _crit(_range_dev(m["delta_range"], 2.0), tol["rp3"])
        c["H_norm_sq"] = _crit(m["H_norm_sq"], 1e-10)
        c["equality_gap"] = _crit(m["improved_gap"], tol["equality_gap"])
        c["minimal_path"] = {"value": all(r.get("minimal") for r in samples), "tol": True,
                             "pass": bool(samples) and all(r.get("minimal") for r in samples)}
        return c
    c["c_symmetry"] = _crit(m["c_symmetry"], tol["c_symmetry"])
    c["lam_ratio"] = _crit(m["lam_ratio_dev"], tol["lam_ratio"])
    cond = _nanmax(m["cond_i"], m["cond_ii"], m["cond_iii"])
    c["conditions"] = _crit(cond, tol["conditions"])
    c["structure"] = _crit(_nanmax(m["structure_e1e1"], m["structure_e2e1"], m["structure_e3e1"],
                                   m["structure_dlam2_e2"], m["structure_dlam2_e3"]), tol["structure"])
    c["t_rate"] = _crit(m["structure_t_rate"], tol["structure"])
    c["equality_gap"] = _crit(m["improved_gap"], tol["equality_gap"])
    c["H_norm"] = _crit(m["H_vs_2lam2"], tol["h_norm"])
    c["classical_slack"] = _crit(m["slack_vs_3lam2sq"], tol["classical_slack"])
    slack_min = min((r["classical_slack"] for r in samples if "classical_slack" in r), default=None)
    c["classical_strict"] = {"value": slack_min, "tol": 0.0, "pass": slack_min is not None and slack_min > 0}
    c["min_plane"] = _crit(m["min_plane_misalignment"], tol["min_plane"])
    c["vw"] = _crit(_nanmax(m["vw_DE1V"], m["vw_DE2V"], m["vw_DE3V"], m["vw_DE1W"], m["vw_DE2W"], m["vw_DE3W"],
                            m["vw_W_perp_V"], m["vw_V_transverse"]), tol["vw"])
    c["w_roundtrip"] = _crit(m["vw_W_roundtrip"], tol["w_roundtrip"])
    c["surface_horizontality"] = _crit(m["surface_horizontality"], tol["surface_horizontality"])
    c["surface_minimal"] = _crit(m["surface_mean_curvature"], tol["surface_mean_curvature"])
    return c


def _range_dev(rng, target):
    if rng is None:
        return None
    return max(abs(rng[0] - target), abs(rng[1] - target))


def _nanmax(*vals):
    vals = [v for v in vals if v is not None]
    return max(vals) if vals else None


def sample_immersion(config):
    """Sampled E0 records plus metadata, for the build command."""
    config = config.normalized().validate()
    jc = config.jet_config()
    surface = get_surface(config.surface)
    traj = trajectory_for(config)
    if not traj.complete:
        raise ProfileIncomplete(traj)
    immersion = build_E0(surface, traj)
    records = []
    unit = horiz = 0.0
    for _, (t, u, v) in sample_points(immersion.map, config.grid, jc):
        E0 = immersion(t, u, v)
        jet = jet_at(immersion.map, (t, u, v), jc)
        unit = max(unit, abs(real_inner(E0, E0) - 1.0))
        horiz = max(horiz, horizontality(jet))
        records.append({"t": t, "u": u, "v": v, "E0": [float(x) for x in as_real(E0)]})
    meta = {
        "version": __version__,
        "config": config.to_json(),
        "max_unit_norm_deviation": unit,
        "max_horizontality": horiz,
        "ode_status": traj.status,
        "ode_max_drift": traj.max_drift,
        "count": len(records),
    }
    return {"metadata": meta, "records": records}


__all__ = ["RunConfig", "DEFAULT_TOLERANCES", "run_verification", "sample_immersion", "ProfileIncomplete",
           "trajectory_for"]
