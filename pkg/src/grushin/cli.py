"""Command-line front end: ``grushin <subcommand> ...``.

Exit status is 0 on success, 1 when a check fails or a numerical error
occurs (a JSON error object is printed), and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import warnings

import numpy as np

from . import calculus, flows, maps, metric, symmetry
from . import profile as profiles
from .errors import ConvergenceError, GrushinError

# every library operation and the one subcommand that reaches it
OPERATIONS = {
    "make_profile": "profile",
    "estimate_beta": "profile",
    "estimate_doubling": "profile",
    "validate_profile": "profile",
    "solve_M": "dist",
    "quasidistance": "dist",
    "path_length": "ccdist",
    "cc_upper_lshape": "ccdist",
    "cc_estimate": "ccdist",
    "comparability_check": "ccdist",
    "covering_number": "cover",
    "phi": "qscheck",
    "phi_inverse": "qscheck",
    "sup_norm_dist": "qscheck",
    "weak_qs_sample": "qscheck",
    "lemma32_check": "qscheck",
    "lemma33_check": "qscheck",
    "frame_derivative": "beltrami",
    "grushin_beltrami_nu": "beltrami",
    "classical_beltrami_mu": "beltrami",
    "conjugation_consistency": "beltrami",
    "conformality_test": "conformal",
    "xi_eta": "flow",
    "closed_form_flow": "flow",
    "flow_rhs": "flow",
    "integrate_flow": "flow",
    "branch_domain_contains": "flow",
    "flow_conformality_check": "flow",
}


def _floats(text, n=None, what="value"):
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers for {what}, got {text!r}")
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} numbers for {what}, got {text!r}")
    return vals


def point(text):
    return metric.GrushinPoint(*_floats(text, 2, "a point u,v"))


def box(text):
    return tuple(_floats(text, 4, "a box lo,hi,lo,hi"))


def square(text):
    u0, v0, side = _floats(text, 3, "a square u0,v0,side")
    if side <= 0:
        raise argparse.ArgumentTypeError("square side must be positive")
    return (u0, v0), side


def path_nodes(text):
    nodes = [_floats(t, 2, "a path node") for t in text.split(";") if t.strip()]
    if len(nodes) < 2:
        raise argparse.ArgumentTypeError("a path needs at least two nodes")
    return nodes


def profile_arg(text):
    try:
        return profiles.parse_profile(text)
    except (ValueError, OSError, KeyError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def map_arg(text):
    try:
        maps.parse_map(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    return text


def _clean(x):
    """JSON-ready copy: numpy scalars unwrapped, non-finite floats to None, complex to [re, im]."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_clean(float(x.real)), _clean(float(x.imag))]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def render(payload, fmt):
    """Serialize a dict (json) or a {"columns", "rows"} table (csv)."""
    if fmt == "csv":
        if "rows" not in payload:
            payload = {"columns": list(payload), "rows": [list(payload.values())]}
        buf = io.StringIO()
        buf.write(",".join(payload["columns"]) + "\n")
        for row in payload["rows"]:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()
    if "rows" in payload and "columns" in payload:
        payload = {"rows": [dict(zip(payload["columns"], r)) for r in payload["rows"]]}
    return json.dumps(_clean(payload)) + "\n"


# subcommand bodies: each returns (payload, passed)

def cmd_profile(a):
    p = a.profile
    kw = {"u_range": tuple(a.range), "n_samples": a.samples}
    if a.only == "beta":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", profiles.InadmissibleProfileWarning)
            beta = profiles.estimate_beta(p, **kw)
        return {"profile": p.name, "beta_hat": beta, "beta_diverges": p.beta_diverges}, not p.beta_diverges
    if a.only == "doubling":
        return {"profile": p.name, "m_hat": profiles.estimate_doubling(p, **kw)}, True
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        report = profiles.validate_profile(p, **kw)
    out = report.to_dict()
    if p.family != "custom":
        out["descriptor"] = p.to_descriptor()
    return out, report.passed


def cmd_dist(a):
    p = a.profile
    if a.dv is not None:
        return {"dv": a.dv, "M": metric.solve_M(p, a.dv)}, True
    if a.from_ is None or a.to is None:
        raise UsageError("dist needs --from and --to, or --dv")
    return metric.quasidistance(p, a.from_, a.to).to_dict(), True


def cmd_ccdist(a):
    p = a.profile
    if a.method == "path":
        if a.path is None:
            raise UsageError("--method path needs --path")
        hp = metric.make_path(p, a.path)
        return {"length_r": hp.length_r, "nodes": hp.nodes}, True
    if a.from_ is None or a.to is None:
        raise UsageError("ccdist needs --from and --to")
    if a.method == "lshape":
        length, hp = metric.cc_upper_lshape(p, a.from_, a.to)
        return {"lshape": length, "nodes": hp.nodes}, True
    if a.method == "compare":
        rep = metric.comparability_check(p, a.from_, a.to, n_nodes=a.nodes, n_iters=a.iters)
        return rep.to_dict(), rep.passed
    length, hp = metric.cc_estimate(p, a.from_, a.to, n_nodes=a.nodes, n_iters=a.iters)
    return {"cc_estimate": length, "history": list(hp.history), "nodes": hp.nodes}, True


def cmd_qscheck(a):
    p = a.profile
    if a.mode == "weak":
        rep = symmetry.weak_qs_sample(p, a.box, a.n, a.seed, a.backend, a.threads)
        return rep.to_dict(), math.isfinite(rep.c_emp)
    if a.mode == "phi":
        out = {}
        if a.from_ is not None:
            out["phi"] = list(symmetry.phi(p, a.from_))
            if a.to is not None:
                out["phi_to"] = list(symmetry.phi(p, a.to))
                out["sup_norm_dist"] = symmetry.sup_norm_dist(out["phi"], out["phi_to"])
        if a.plane is not None:
            out["phi_inverse"] = list(symmetry.phi_inverse(p, a.plane))
        if not out:
            raise UsageError("qscheck --mode phi needs --from and/or --plane")
        return out, True
    if a.from_ is None or a.to is None:
        raise UsageError("qscheck --mode lemma needs --from and --to")
    r32 = symmetry.lemma32_check(p, a.from_, a.to).to_dict()
    r33 = symmetry.lemma33_check(p, a.from_, a.to).to_dict()
    passed = all(r["passed"] is not False for r in (r32, r33))
    return {"far_from_axis": r32, "near_axis": r33}, passed


def cmd_beltrami(a):
    p = a.profile
    out = {"map": a.map}
    passed = True
    if a.plane is not None:
        f = maps.plane_map(a.map)
        mu = calculus.classical_beltrami_mu(f, complex(*a.plane), a.h)
        out["mu"] = mu
        out["mu_defined"] = mu is not None
    m = maps.conjugated(p, a.map)
    if a.at is not None:
        s = calculus.frame_derivative(m, a.at, a.h)
        out.update({
            "at": list(s.at), "Ug1": s.Ug1, "Vg1": s.Vg1, "Ug2": s.Ug2, "Vg2": s.Vg2,
            "W_tilde_g": s.W_tilde_g, "Wbar_tilde_g": s.Wbar_tilde_g,
            "nu": calculus.grushin_beltrami_nu(m, a.at, a.h),
            "Drg": s.Drg, "drg_defined": s.drg_defined, "fd_step": s.fd_step,
        })
        out["nu_defined"] = out["nu"] is not None
    if a.grid is not None:
        rep = calculus.conjugation_consistency(m, calculus.Region(*a.grid, a.n, a.n), a.h, a.tol, a.margin)
        out["consistency"] = rep.to_dict()
        passed = rep.passed
    if len(out) == 1:
        raise UsageError("beltrami needs --at, --plane or --grid")
    return out, passed


def cmd_conformal(a):
    m = maps.conjugated(a.profile, a.map)
    cert = calculus.conformality_test(m, calculus.Region(*a.region, a.n, a.n), a.h, a.tol)
    out = {"map": a.map, **cert.to_dict()}
    return out, cert.passed


def cmd_flow(a):
    spec = flows.FlowSpec(a.k, a.s, a.profile)
    if a.certify is not None:
        cert = flows.flow_conformality_check(spec, calculus.Region(*a.certify, a.n, a.n), a.h, a.tol, a.margin)
        return {"k": a.k, "s": a.s, **cert.to_dict()}, cert.passed
    if a.from_ is None:
        raise UsageError("flow needs --from (or --certify)")
    w = a.from_
    if a.field:
        field = flows.xi_eta(spec)
        xi, eta = flows.flow_rhs(spec, w)
        return {"k": a.k, "at": list(w), "xi": xi, "eta": eta, "b": complex(field.b(w[0], w[1]))}, True
    if a.check_domain:
        inside = flows.branch_domain_contains(spec, w) if a.k >= 3 else True
        return {"k": a.k, "s": a.s, "at": list(w), "inside": inside, "safe_radius": spec.safe_radius}, True
    p = a.profile
    if a.method == "rk4":
        traj = flows.integrate_flow(spec, w, a.steps, trajectory=True)
        rows = [(t, u, v, float(p.r(u)), v) for t, u, v in traj]
    elif a.method == "adaptive":
        g = flows.integrate_flow_adaptive(spec, w, a.tol_ode)
        rows = [(0.0, w[0], w[1], float(p.r(w[0])), w[1]), (a.s, g.u, g.v, float(p.r(g.u)), g.v)]
    else:
        times = np.linspace(0.0, a.s, a.steps + 1) if a.trajectory else np.array([0.0, a.s])
        rows = []
        for t in times:
            g = flows.closed_form_flow(spec.at_time(float(t)), w)
            rows.append((float(t), g.u, g.v, float(p.r(g.u)), g.v))
    if not a.trajectory:
        rows = rows[-1:]
    table = {"columns": ["s", "u", "v", "x", "y"], "rows": rows}
    if a.format == "json" and not a.trajectory:
        s, u, v, x, y = rows[0]
        return {"k": a.k, "s": s, "method": a.method, "from": list(w), "u": u, "v": v, "x": x, "y": y}, True
    return table, True


def cmd_cover(a):
    eps_values = a.eps if a.eps else [2.0 ** -j for j in range(3, 8)]
    rows = metric.covering_rows(a.profile, a.square, eps_values)
    return {"columns": ["eps", "count", "ratio"], "rows": rows}, True


class UsageError(Exception):
    pass


COMMANDS = {
    "profile": cmd_profile,
    "dist": cmd_dist,
    "ccdist": cmd_ccdist,
    "qscheck": cmd_qscheck,
    "beltrami": cmd_beltrami,
    "conformal": cmd_conformal,
    "flow": cmd_flow,
    "cover": cmd_cover,
}

CSV_DEFAULT = {"cover"}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--profile", type=profile_arg, default="classical",
                        help="classical, power:A, log:P, @file.json or an inline JSON descriptor")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--seed", type=int, default=0, help="overridden by $GRUSHIN_SEED")
    common.add_argument("--threads", type=int, default=1)

    ap = argparse.ArgumentParser(prog="grushin", description="Numerics on generalized Grushin planes.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("profile", parents=[common], help="certify a profile")
    s.add_argument("--range", type=lambda t: _floats(t, 2, "a range lo,hi"), default=[1e-6, 1e6])
    s.add_argument("--samples", type=int, default=600)
    s.add_argument("--only", choices=("all", "beta", "doubling"), default="all")

    s = sub.add_parser("dist", parents=[common], help="quasidistance, or the root M of M r'(M) = dv")
    s.add_argument("--from", dest="from_", type=point)
    s.add_argument("--to", type=point)
    s.add_argument("--dv", type=float)

    s = sub.add_parser("ccdist", parents=[common], help="Carnot-Caratheodory length estimates")
    s.add_argument("--from", dest="from_", type=point)
    s.add_argument("--to", type=point)
    s.add_argument("--method", choices=("estimate", "lshape", "compare", "path"), default="estimate")
    s.add_argument("--path", type=path_nodes, help="nodes 'u,v;u,v;...'")
    s.add_argument("--nodes", type=int, default=12)
    s.add_argument("--iters", type=int, default=3)

    s = sub.add_parser("qscheck", parents=[common], help="quasisymmetry of Phi")
    s.add_argument("--mode", choices=("weak", "lemma", "phi"), default="weak")
    s.add_argument("--box", type=box, default=(-5.0, 5.0, -5.0, 5.0))
    s.add_argument("--n", type=int, default=10_000)
    s.add_argument("--backend", choices=symmetry.BACKENDS, default="quasidistance_scaled")
    s.add_argument("--from", dest="from_", type=point)
    s.add_argument("--to", type=point)
    s.add_argument("--plane", type=point, help="plane point x,y for Phi^-1")

    s = sub.add_parser("beltrami", parents=[common], help="Beltrami coefficients of a registry map")
    s.add_argument("--map", type=map_arg, required=True, help="e.g. 'antiholomorphic_mix(0.3)'")
    s.add_argument("--at", type=point)
    s.add_argument("--plane", type=point, help="plane point x,y for mu")
    s.add_argument("--grid", type=box, help="consistency grid u_lo,u_hi,v_lo,v_hi")
    s.add_argument("--n", type=int, default=25)
    s.add_argument("--h", type=float, default=calculus.DEFAULT_H)
    s.add_argument("--tol", type=float, default=1e-4)
    s.add_argument("--margin", type=float, default=calculus.DEFAULT_MARGIN)

    s = sub.add_parser("conformal", parents=[common], help="conformality certificate of a registry map")
    s.add_argument("--map", type=map_arg, required=True)
    s.add_argument("--region", type=box, required=True)
    s.add_argument("--n", type=int, default=25)
    s.add_argument("--h", type=float, default=calculus.DEFAULT_H)
    s.add_argument("--tol", type=float, default=1e-5)

    s = sub.add_parser("flow", parents=[common], help="Payne flows")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--s", type=float, default=0.0)
    s.add_argument("--from", dest="from_", type=point)
    s.add_argument("--method", choices=("closed", "rk4", "adaptive"), default="closed")
    s.add_argument("--steps", type=int, default=64)
    s.add_argument("--tol-ode", type=float, default=1e-9)
    s.add_argument("--trajectory", action="store_true", help="emit every step, not just the end point")
    s.add_argument("--field", action="store_true", help="report xi, eta and b at --from")
    s.add_argument("--check-domain", action="store_true", help="report branch-domain membership")
    s.add_argument("--certify", type=box, help="conformality certificate on region u_lo,u_hi,v_lo,v_hi")
    s.add_argument("--n", type=int, default=25)
    s.add_argument("--h", type=float, default=calculus.DEFAULT_H)
    s.add_argument("--tol", type=float, default=1e-5)
    s.add_argument("--margin", type=float, default=calculus.DEFAULT_MARGIN)

    s = sub.add_parser("cover", parents=[common], help="covering numbers by quasidistance balls")
    s.add_argument("--square", type=square, required=True, help="u0,v0,side")
    s.add_argument("--eps", type=lambda t: _floats(t, None, "radii"), help="comma-separated radii")
    return ap


def _emit(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    ap = build_parser()
    a = ap.parse_args(argv)
    if isinstance(a.profile, str):
        a.profile = profiles.parse_profile(a.profile)
    env_seed = os.environ.get("GRUSHIN_SEED")
    if env_seed is not None:
        try:
            a.seed = int(env_seed)
        except ValueError:
            ap.error(f"GRUSHIN_SEED must be an integer, got {env_seed!r}")
    if a.format is None:
        a.format = "csv" if a.command in CSV_DEFAULT or getattr(a, "trajectory", False) else "json"
    try:
        payload, passed = COMMANDS[a.command](a)
    except UsageError as exc:
        ap.error(str(exc))
    except (GrushinError, ConvergenceError, ValueError) as exc:
        err = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        step = getattr(exc, "step", None)
        if step is not None:
            err["error"]["step"] = step
        _emit(json.dumps(err) + "\n", a.output)
        return 1
    _emit(render(payload, a.format), a.output)
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
