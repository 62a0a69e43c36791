"""Command-line front end: ``sfm body|beta|surface|cone|area|converge|verify``.

Exit status is 0 on success, 1 when a verification fails and 2 on usage or
domain errors.  Tables are CSV with every number printed to 17 significant
digits, so identical inputs give byte-identical outputs.
"""

from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import math
import operator
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import area as ar
from . import surfaces as sf
from .convex_geometry import TAU, Disc, InvalidBodyError, load_body, unit
from .mesh import fmt, omega_residual
from .stationarity import (
    DomainError,
    SolverError,
    load_profile,
    sector_residual,
    sector_split,
    solve_beta,
    stationarity_residual,
)

DEFAULTS = {
    "body": "disc",
    "v_angle": 0.0,
    "alpha": None,
    "k": None,
    "thetas": None,
    "theta0": None,
    "r0": 1.0,
    "res": sf.DEFAULT_RESOLUTION,
    "quad_order": 12,
    "out": None,
    "tol": None,
    "half": False,
    "lam_range": "-1,1",
    "mu_range": "-1,1",
    "k_min": 3,
    "k_max": 16,
    "k_list": None,
    "grid": 512,
    "inject_mismatch": False,
}

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv,
        ast.Pow: operator.pow, ast.USub: operator.neg, ast.UAdd: operator.pos}


class UsageError(ValueError):
    pass


def parse_number(text) -> float:
    """Float or arithmetic expression in ``pi`` such as ``7*pi/6``."""
    if isinstance(text, (int, float)):
        return float(text)

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in {"pi", "tau"}:
            return math.pi if node.id == "pi" else TAU
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise UsageError(f"cannot parse number {text!r}")

    try:
        return ev(ast.parse(str(text).strip(), mode="eval"))
    except SyntaxError as exc:
        raise UsageError(f"cannot parse number {text!r}") from exc


def parse_list(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [parse_number(t) for t in text]
    return [parse_number(t) for t in str(text).split(",") if t.strip()]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SFM_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    """Ordered map, threaded up to ``SFM_THREADS`` workers."""
    items = list(items)
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _write_table(cfg, name, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    text = buf.getvalue()
    if cfg["out"]:
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.csv").write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _body(cfg):
    return load_body(cfg["body"])


def _alpha_grid(cfg, default_n=10):
    a = cfg["alpha"]
    if a is None:
        return [math.pi * (j + 0.5) / default_n for j in range(default_n)]
    if isinstance(a, str) and Path(a).is_file():
        text = Path(a).read_text(encoding="utf-8").replace(",", "\n")
        return [parse_number(t) for t in text.split() if t.strip()]
    return parse_list(a)


def _profile(cfg, body):
    a = cfg["alpha"]
    if a is None:
        raise UsageError("--alpha is required")
    if isinstance(a, str) and Path(a).is_file():
        alpha = load_profile(a)
    else:
        alpha = parse_number(a)
    return sf.AlphaProfile(body, parse_number(cfg["v_angle"]), alpha)


def _cone_spec(cfg, body):
    if cfg["thetas"] is not None:
        thetas = parse_list(cfg["thetas"])
        theta0 = parse_number(cfg["theta0"]) if cfg["theta0"] is not None else 0.0
        return sf.ConeSpec(body, theta0, tuple(thetas))
    if cfg["k"] is None:
        raise UsageError("give -k or --thetas")
    k = int(cfg["k"])
    if k < 3:
        raise sf.InvalidSpecError("k must be at least 3")
    theta0 = parse_number(cfg["theta0"]) if cfg["theta0"] is not None else math.pi / k
    return sf.ConeSpec(body, theta0, (TAU / k,) * k)


def _sup_on_disc(graph, r0, n):
    g = (np.arange(n) + 0.5) / n * 2.0 - 1.0
    X, Y = np.meshgrid(r0 * g, r0 * g, indexing="ij")
    keep = X**2 + Y**2 <= r0**2
    if not np.any(keep):
        return 0.0
    return float(np.max(np.abs(graph.value(X[keep], Y[keep]))))


# ---------------------------------------------------------------------------
# subcommands


def cmd_body(cfg):
    K = _body(cfg)
    th = np.arange(4096) * (TAU / 4096)
    rows = [
        ("description", K.describe()),
        ("centrally_symmetric", str(K.centrally_symmetric)),
        ("diameter", fmt(K.diameter)),
        ("min_h", fmt(np.min(K.h(th)))),
        ("min_curvature_radius", fmt(np.min(K.curvature_radius(th + 0.5 * TAU / 4096)))),
    ]
    _write_table(cfg, "body", ["key", "value"], rows)
    return 0


def cmd_beta(cfg):
    K = _body(cfg)
    v = parse_number(cfg["v_angle"])
    alphas = np.asarray(_alpha_grid(cfg), dtype=float)
    beta = np.atleast_1d(solve_beta(K, v, alphas))
    res = np.atleast_1d(stationarity_residual(K, v, alphas, beta))
    h = 1e-5
    lo = np.maximum(alphas - h, 0.5 * alphas)
    hi = np.minimum(alphas + h, 0.5 * (alphas + math.pi))
    fd = (np.atleast_1d(solve_beta(K, v, hi)) - np.atleast_1d(solve_beta(K, v, lo))) / (hi - lo)
    rows = [(float(a), float(b), float(r), float(d)) for a, b, r, d in zip(alphas, beta, res, fd)]
    _write_table(cfg, "beta", ["alpha", "beta", "residual", "dbeta_dalpha_fd"], rows)
    return 0


def _parse_range(text):
    vals = parse_list(text)
    if len(vals) != 2:
        raise UsageError(f"range needs two values, got {text!r}")
    return vals[0], vals[1]


def _out_dir(cfg):
    out = Path(cfg["out"] or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_surface(cfg):
    K = _body(cfg)
    prof = _profile(cfg, K)
    lam = _parse_range(cfg["lam_range"])
    if cfg["half"]:
        lam = (max(0.0, lam[0]), lam[1])
    mesh = sf.build_sigma(prof, lam, _parse_range(cfg["mu_range"]), int(cfg["res"]))
    out = _out_dir(cfg)
    mesh.write_obj(out / "surface.obj")
    mesh.write_csv(out / "surface.csv")
    graph = sf.HerringboneGraph(prof)
    seam = sf.c1_seam_check(graph, prof.v_angle, 1e-5, np.linspace(max(lam[0], 0.0), lam[1], 17)[1:])
    b_lo, b_hi = prof.beta_bounds()
    print(f"vertices {len(mesh)} triangles {len(mesh.triangles)}")
    print(f"beta_range {fmt(b_lo)} {fmt(b_hi)}")
    print(f"max_abs_height {fmt(np.max(np.abs(mesh.vertices[:, 2])) if len(mesh) else 0.0)}")
    print(f"seam_jump_step_1e-5 {fmt(seam)}")
    print(f"omega_residual {fmt(omega_residual(mesh))}")
    return 0


def cmd_cone(cfg):
    K = _body(cfg)
    spec = _cone_spec(cfg, K)
    graph = sf.cone_graph(spec)
    r0 = float(cfg["r0"])
    mesh = sf.build_cone(spec, r0, int(cfg["res"]))
    out = _out_dir(cfg)
    mesh.write_obj(out / "cone.obj")
    mesh.write_csv(out / "cone.csv")
    print(f"vertices {len(mesh)} triangles {len(mesh.triangles)}")
    print("singular_angles " + " ".join(fmt(a) for a in graph.singular_angles))
    print("seam_angles " + " ".join(fmt(a) for a in graph.seam_angles))
    print(f"max_sector_residual {fmt(max(abs(r) for r in spec.residuals()))}")
    radii = np.linspace(0.2, 1.0, 9) * max(r0, 1e-300)
    for a in graph.break_angles:
        print(f"seam_jump angle {fmt(a)} {fmt(sf.c1_seam_check(graph, a, 1e-5 * max(r0, 1e-300), radii))}")
    rng = np.random.default_rng(0)
    p = rng.uniform(-1, 1, (2, 256)) * max(r0, 1.0)
    base = graph.value(*p)
    hom = max(float(np.max(np.abs(graph.value(*(r * p)) - r * r * base))) / max(1.0, float(np.max(np.abs(base))))
              for r in (0.5, 2.0))
    print(f"homogeneity_residual {fmt(hom)}")
    print(f"sup_height {fmt(_sup_on_disc(graph, r0, 256))}")
    return 0


def cmd_area(cfg):
    K = _body(cfg)
    r0 = float(cfg["r0"])
    order = int(cfg["quad_order"])
    disc_body = isinstance(K.support, Disc) and K.support.radius == 1.0 and not K.is_translated
    rows = []
    if cfg["k"] is not None or cfg["thetas"] is not None:
        spec = _cone_spec(cfg, K)
        res = ar.graph_area(K, ar.GraphRegion(sf.cone_graph(spec), ar.Disc(r0), order))
        regular = cfg["thetas"] is None and abs(spec.theta0 - math.pi / spec.k) < 1e-15
        cf = ar.disc_cone_area_closed_form(spec.k, r0) if disc_body and regular else float("nan")
        rows.append(("cone", float(spec.k), r0, res.value, cf, abs(res.value - cf), res.error))
    else:
        v = parse_number(cfg["v_angle"])
        for a in _alpha_grid(cfg, default_n=4):
            g = sf.herringbone(K, v, a)
            res = ar.graph_area(K, ar.GraphRegion(g, ar.Disc(r0), order))
            cf = 8.0 * r0**3 / (3.0 * math.sin(a)) if disc_body else float("nan")
            rows.append(("herringbone", float(a), r0, res.value, cf, abs(res.value - cf), res.error))
    _write_table(cfg, "area", ["case", "k_or_alpha", "r0", "area", "closed_form", "abs_err", "quad_err"], rows)
    return 0


def _converge_row(args):
    k, r0, order, grid = args
    from .convex_geometry import disc

    g = sf.cone_graph(sf.ConeSpec.regular(k, disc()))
    sup = _sup_on_disc(g, r0, grid)
    q = ar.graph_area(disc(), ar.GraphRegion(g, ar.Disc(r0), order)).value
    cf = ar.disc_cone_area_closed_form(k, r0)
    return (k, sup, 2 * r0**2 * math.sin(math.pi / k), q, cf, abs(q - ar.disc_cone_area_limit(r0)))


def cmd_converge(cfg):
    r0 = float(cfg["r0"])
    if cfg["k_list"] is not None:
        ks = [int(parse_number(t)) for t in str(cfg["k_list"]).split(",") if t.strip()]
    else:
        ks = list(range(int(cfg["k_min"]), int(cfg["k_max"]) + 1))
    if any(k < 3 for k in ks):
        raise DomainError("k must be at least 3")
    rows = _pmap(_converge_row, [(k, r0, int(cfg["quad_order"]), int(cfg["grid"])) for k in ks])
    _write_table(cfg, "converge",
                 ["k", "sup_height", "height_bound", "area_quadrature", "area_closed_form", "limit_gap"], rows)
    return 0


# ---------------------------------------------------------------------------
# verification


def _verify_checks(cfg):
    """Yield ``(name, passed, detail)`` for each invariant."""
    from .convex_geometry import disc, ellipse, pball

    tol = float(cfg["tol"]) if cfg["tol"] is not None else 1e-10
    rng = np.random.default_rng(12345)
    bodies = [("disc", disc()), ("ellipse(2,1)", ellipse(2, 1)), ("pball(1.5)", pball(1.5)),
              ("pball(3)", pball(3)), ("ellipse(2,1)+(0.3,-0.2)", ellipse(2, 1).translated((0.3, -0.2)))]
    if cfg["body"] != DEFAULTS["body"]:
        bodies.append((cfg["body"], _body(cfg)))

    for name, K in bodies:
        u = rng.normal(size=(200, 2))
        w = K.sample_boundary(4096)
        brute = np.max(u @ w.T, axis=1)
        err = float(np.max(np.abs(K.dual_norm(u) - brute) / brute))
        yield f"duality[{name}]", err < 1e-6, err
        th = rng.uniform(0, TAU, 64)
        rt = max(abs(((K.gauss_angle(p) - t + math.pi) % TAU) - math.pi) for p, t in zip(K.gauss_point(th), th))
        yield f"gauss_roundtrip[{name}]", rt < 1e-8, rt
        v = rng.uniform(0, TAU, 100)
        a = rng.uniform(0.05, math.pi - 0.05, 100)
        r = float(np.max(np.abs(stationarity_residual(K, v, a, solve_beta(K, v, a)))))
        yield f"stationarity_residual[{name}]", r < tol * K.diameter, r
        worst = 0.0
        for _ in range(50):
            t0, span = rng.uniform(0, TAU), rng.uniform(0.05, TAU - 0.05)
            uu, ww = unit(t0), unit(t0 + span)
            worst = max(worst, abs(sector_residual(K, uu, ww, sector_split(K, uu, ww))))
        yield f"sector_residual[{name}]", worst < tol * K.diameter, worst

    if cfg["inject_mismatch"]:
        K = disc()
        a = math.pi / 4
        r = abs(float(stationarity_residual(K, 0.0, a, a + math.pi)))
        yield "stationarity_residual[injected mismatch beta=alpha+pi]", r < tol, r

    prof = sf.AlphaProfile(pball(1.5), math.pi / 3, math.pi / 6)
    om = omega_residual(sf.build_sigma(prof, (-1, 1), (-1, 1), 33))
    yield "horizontality[sigma pball(1.5)]", om < 1e-10, om
    c4 = sf.cone_graph(sf.ConeSpec.regular(4))
    om = omega_residual(sf.build_cone(c4, 1.0, 33))
    yield "horizontality[C(4)]", om < 1e-10, om
    x, y = rng.uniform(-1, 1, (2, 200))
    pts = sf.ruling_points(c4, x, y, np.linspace(0.0, 0.5, 20))
    eta0 = c4.eta(x, y)
    drift = 0.0
    for j in range(pts.shape[-2]):
        drift = max(drift, float(np.max(np.abs(c4.eta(pts[..., j, 0], pts[..., j, 1]) - eta0))))
    yield "eta_constant_on_rulings[C(4)]", drift < 1e-12, drift

    ell = sf.cone_graph(sf.ConeSpec(ellipse(2, 1), 0.3, (math.pi, math.pi / 2, math.pi / 2)))
    for label, g in (("C(4)", c4), ("ellipse cone", ell)):
        worst_order = min(sf.seam_convergence(g, a).order for a in g.break_angles)
        yield f"c1[{label}]", worst_order >= 1 - 1e-6, worst_order
    neg = sf.seam_convergence(sf.mismatched_splice(), 0.0)
    yield "c1_negative_control", min(neg.jumps) > 1e-2, min(neg.jumps)

    rep = ar.perturbation_test(disc(), sf.disc_cone(math.pi / 2), eps=(0.1,))
    yield "perturbation[u_pi/2]", rep.passed, rep.min_delta
    cf = ar.disc_cone_area_closed_form(4, 1.0)
    q = ar.graph_area(disc(), ar.GraphRegion(c4, ar.Disc(1.0))).value
    yield "area[C(4)]", abs(q - cf) < 1e-4 * cf, abs(q - cf)


def cmd_verify(cfg):
    first = None
    for name, ok, detail in _verify_checks(cfg):
        print(f"{'PASS' if ok else 'FAIL'} {name} {fmt(detail)}")
        if not ok and first is None:
            first = name
    if first is not None:
        print(f"verification failed: {first}", file=sys.stderr)
        return 1
    return 0


COMMANDS = {
    "body": cmd_body,
    "beta": cmd_beta,
    "surface": cmd_surface,
    "cone": cmd_cone,
    "area": cmd_area,
    "converge": cmd_converge,
    "verify": cmd_verify,
}


# ---------------------------------------------------------------------------
# parsing


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False, argument_default=S)
    common.add_argument("--body", help="built-in description (e.g. 'pball 1.5') or body file")
    common.add_argument("--disc", dest="body", action="store_const", const="disc", help="shorthand for --body disc")
    common.add_argument("--config", help="JSON or YAML file with option defaults")
    common.add_argument("--out", help="output directory")
    common.add_argument("--tol", help="residual tolerance override")
    common.add_argument("--v-angle", dest="v_angle", help="direction angle of the singular line (rad)")
    common.add_argument("--alpha", help="angle, comma list, or profile/grid file")
    common.add_argument("-k", dest="k", type=int, help="number of equal sectors")
    common.add_argument("--thetas", help="comma list of sector angles summing to 2 pi")
    common.add_argument("--theta0", help="base angle of the first sector")
    common.add_argument("--r0", type=float, help="disc radius of the region")
    common.add_argument("--res", type=int, help="mesh resolution per axis")
    common.add_argument("--quad-order", dest="quad_order", type=int, help="Gauss-Legendre order per panel")

    p = argparse.ArgumentParser(prog="sfm", description="Area-minimising herringbones and cones in the sub-Finsler Heisenberg group.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("body", parents=[common], help="describe a convex body")
    sub.add_parser("beta", parents=[common], help="tabulate the matched angle beta(alpha)")
    s = sub.add_parser("surface", parents=[common], help="mesh a herringbone surface")
    s.add_argument("--half", action="store_true", default=S, help="only rulings with lambda >= 0")
    s.add_argument("--lam-range", dest="lam_range", default=S)
    s.add_argument("--mu-range", dest="mu_range", default=S)
    sub.add_parser("cone", parents=[common], help="mesh a cone")
    sub.add_parser("area", parents=[common], help="areas of cones or herringbones over D(r0)")
    c = sub.add_parser("converge", parents=[common], help="height and area table for C(k)")
    c.add_argument("--k-min", dest="k_min", type=int, default=S)
    c.add_argument("--k-max", dest="k_max", type=int, default=S)
    c.add_argument("--k-list", dest="k_list", default=S)
    c.add_argument("--grid", type=int, default=S, help="samples per axis for the height supremum")
    v = sub.add_parser("verify", parents=[common], help="run the invariant suites")
    v.add_argument("--inject-mismatch", dest="inject_mismatch", action="store_true", default=S)
    return p


def _load_config(path):
    text = Path(path).read_text(encoding="utf-8")
    if str(path).endswith((".yaml", ".yml")):
        import yaml

        data = yaml.safe_load(text) or {}
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise UsageError("config file must hold a mapping")
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve_config(ns: argparse.Namespace) -> dict:
    """Flags override the config file, which overrides built-in defaults."""
    flags = vars(ns).copy()
    command = flags.pop("command")
    cfg = dict(DEFAULTS)
    if "config" in flags:
        cfg.update(_load_config(flags.pop("config")))
    cfg.update(flags)
    cfg["command"] = command
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = resolve_config(ns)
        return COMMANDS[cfg["command"]](cfg)
    except (DomainError, sf.InvalidSpecError, InvalidBodyError, UsageError, SolverError,
            FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
