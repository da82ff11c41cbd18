"""Command-line front end: config ingestion, checks, and report emission.

Reports are written as canonical JSON: keys sorted, floats printed with 17
significant digits, no whitespace.  Identical configurations therefore
produce byte-identical files.  Exit status is 0 when every enabled check
passes its tolerance, 1 when a check fails (the failing check is named on
stderr), and 2 for usage or configuration errors.

The HALFMASS_THREADS environment variable is accepted and validated for
compatibility with batch harnesses; the current implementation evaluates
everything serially, so it has no effect beyond validation.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

import numpy as np

from . import charges, clifford, constraints, dirac, families, mots
from .errors import DomainError
from .geometry import EXCISION_RADIUS

_DEC_SEED = 20250815
_INV_SEED = 7


# ---------------------------------------------------------------------------
# canonical JSON


def _format_float(v: float) -> str:
    if not np.isfinite(v):
        raise DomainError("non-finite value in report")
    return format(float(v), ".17g")


def dumps_canonical(obj) -> str:
    """Deterministic JSON: sorted keys, 17-significant-digit floats."""
    if obj is None:
        return "null"
    if isinstance(obj, bool) or isinstance(obj, np.bool_):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=True)
    if isinstance(obj, np.ndarray):
        return dumps_canonical(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps_canonical(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = sorted(obj.items(), key=lambda kv: kv[0])
        return "{" + ",".join(
            json.dumps(str(k), ensure_ascii=True) + ":" + dumps_canonical(v)
            for k, v in items) + "}"
    raise DomainError(f"cannot serialize {type(obj).__name__} in a report")


def write_report(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(obj))
        fh.write("\n")


# ---------------------------------------------------------------------------
# argument plumbing


def _float_list(text: str):
    try:
        return [float(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list: {text!r}")


def _sign(text: str) -> int:
    if text == "+":
        return 1
    if text == "-":
        return -1
    raise argparse.ArgumentTypeError("sign must be + or -")


_FAMILY_PARAMS = ("n", "mass", "amplitude", "depth", "offset", "decay")


# logically required options, enforced only after the config file merge so
# that a config file can satisfy them
_REQUIRED_FLAGS = {
    "check-dec": ("family",),
    "adm": ("family",),
    "invariance": ("family",),
    "verify-sl": ("family",),
    "witten-flux": ("family",),
    "mots": ("family", "surface"),
}


def _add_family_flags(sub) -> None:
    sub.add_argument("--family", default=None, help="bundled data family")
    sub.add_argument("--n", type=int, default=None, help="chart dimension")
    sub.add_argument("--m", "--mass", dest="mass", type=float, default=None,
                     help="mass parameter (schwarzschild)")
    sub.add_argument("--amplitude", type=float, default=None,
                     help="bump amplitude (conformal)")
    sub.add_argument("--depth", type=float, default=None,
                     help="bump depth below the boundary plane (conformal)")
    sub.add_argument("--offset", type=float, default=None,
                     help="bump offset along the boundary plane (conformal)")
    sub.add_argument("--decay", type=float, default=None,
                     help="decay exponent (synthetic-momentum)")


def _family_from_args(args) -> families.FamilyRecord:
    kwargs = {}
    for key in _FAMILY_PARAMS:
        val = getattr(args, key, None)
        if val is not None:
            kwargs[key] = val
    try:
        return families.make_family(args.family, **kwargs)
    except TypeError as exc:
        raise DomainError(
            f"family {args.family!r} does not take these parameters: {exc}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="halfmass",
        description="checks for initial data sets on a half-space chart")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None,
                        help="TOML or JSON file with flag defaults")
    subs = parser.add_subparsers(dest="command", required=True,
                                 parser_class=argparse.ArgumentParser)

    def add_sub(name, **kw):
        return subs.add_parser(name, parents=[common], **kw)

    sub = add_sub("check-dec", help="sampled dominant-energy margins")
    _add_family_flags(sub)
    sub.add_argument("--theta", type=float, default=0.0,
                     help="tilt angle in degrees")
    sub.add_argument("--sign", type=_sign, default=1, help="+ or -")
    sub.add_argument("--samples", type=int, default=200)
    sub.add_argument("--tol", type=float, default=None)
    sub.add_argument("--seed", type=int, default=_DEC_SEED)
    sub.add_argument("--json", dest="json_path", default=None)

    sub = add_sub("adm", help="charge ladder and extrapolation")
    _add_family_flags(sub)
    sub.add_argument("--radii", type=_float_list,
                     default=list(charges.DEFAULT_RADII))
    sub.add_argument("--theta", type=float, default=None,
                     help="boost angle in degrees for the tilted vector")
    sub.add_argument("--degree", type=int, default=charges.DEFAULT_DEGREE)
    sub.add_argument("--normalize", type=float, default=None,
                     help="divide reported charges by this constant")
    sub.add_argument("--csv", dest="csv_path", default=None)
    sub.add_argument("--json", dest="json_path", default=None)

    sub = add_sub("invariance",
                          help="charges under chart rotations/translations")
    _add_family_flags(sub)
    sub.add_argument("--rotations", type=int, default=5)
    sub.add_argument("--translate", type=_float_list, default=None,
                     help="boundary translation, n-1 components")
    sub.add_argument("--radii", type=_float_list,
                     default=list(charges.DEFAULT_RADII))
    sub.add_argument("--degree", type=int, default=charges.DEFAULT_DEGREE)
    sub.add_argument("--tol", type=float, default=1e-6)
    sub.add_argument("--translate-tol", type=float, default=1e-3)
    sub.add_argument("--seed", type=int, default=_INV_SEED)
    sub.add_argument("--json", dest="json_path", default=None)

    sub = add_sub("verify-clifford",
                          help="gamma/chirality algebra residuals")
    sub.add_argument("--n", type=int, default=3)
    sub.add_argument("--theta-grid", type=int, default=25)
    sub.add_argument("--tol", type=float, default=1e-12)
    sub.add_argument("--json", dest="json_path", default=None)

    sub = add_sub("verify-sl",
                          help="curvature-identity convergence ladder")
    _add_family_flags(sub)
    sub.add_argument("--h", type=_float_list, default=[0.1, 0.05, 0.025])
    sub.add_argument("--origin", type=_float_list, default=None)
    sub.add_argument("--edge", type=float, default=1.0)
    sub.add_argument("--order-band", type=_float_list, default=[1.75, 2.25])
    sub.add_argument("--json", dest="json_path", default=None)

    sub = add_sub("witten-flux",
                          help="constant-spinor flux vs charge pairing")
    _add_family_flags(sub)
    sub.add_argument("--theta", type=float, default=0.0,
                     help="chirality angle in degrees")
    sub.add_argument("--sign", type=_sign, default=1, help="+ or -")
    sub.add_argument("--radii", type=_float_list,
                     default=list(charges.DEFAULT_RADII))
    sub.add_argument("--degree", type=int, default=charges.DEFAULT_DEGREE)
    sub.add_argument("--tol", type=float, default=0.01)
    sub.add_argument("--json", dest="json_path", default=None)

    sub = add_sub("mots", help="capillary surface diagnostics")
    _add_family_flags(sub)
    sub.add_argument("--surface", default=None,
                     help="flat | tilted | cap, with :key=value options, "
                          "e.g. cap:radius=2:center=2,0,0.8")
    sub.add_argument("--gamma", default="auto",
                     help="contact angle in degrees, or 'auto' to use the "
                          "surface's own angle")
    sub.add_argument("--degree", type=int, default=20)
    sub.add_argument("--grid", type=int, default=9)
    sub.add_argument("--json", dest="json_path", default=None)

    sub = add_sub("families", help="list bundled data families")
    sub.add_argument("--json", dest="json_path", default=None)

    parser.subcommands = dict(subs.choices)
    return parser


_CONFIG_SKIP = {"config", "command"}


def canonical_config(args) -> dict:
    out = {"command": args.command}
    for key, val in sorted(vars(args).items()):
        if key in _CONFIG_SKIP or key.endswith("_path") or val is None:
            continue
        if isinstance(val, (list, tuple)):
            out[key] = [float(v) for v in val]
        else:
            out[key] = val
    return out


def _load_config_file(path: str) -> dict:
    if path.endswith(".toml"):
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# deterministic sample clouds


def _interior_samples(n: int, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        x = rng.uniform(-6.0, 6.0, size=n)
        x[-1] = abs(x[-1])
        if np.linalg.norm(x) > EXCISION_RADIUS + 0.75:
            out.append(x)
    return np.array(out)


def _boundary_samples(n: int, count: int, seed: int) -> np.ndarray:
    pts = _interior_samples(n, count, seed + 1)
    pts[:, -1] = 0.0
    keep = np.linalg.norm(pts, axis=1) > EXCISION_RADIUS + 0.75
    while np.count_nonzero(keep) < count:
        extra = _interior_samples(n, count, seed + 2)
        extra[:, -1] = 0.0
        pts = np.concatenate([pts, extra])
        keep = np.linalg.norm(pts, axis=1) > EXCISION_RADIUS + 0.75
    return pts[keep][:count]


def _random_rotation(n_tan: int, rng) -> np.ndarray:
    mat = rng.normal(size=(n_tan, n_tan))
    q, r = np.linalg.qr(mat)
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


# ---------------------------------------------------------------------------
# commands: each returns (report dict, list of failed check names)


def cmd_check_dec(args):
    rec = _family_from_args(args)
    data = rec.data
    theta = np.deg2rad(args.theta)
    interior = constraints.check_interior_dec(
        data, _interior_samples(data.n, args.samples, args.seed),
        tol=args.tol)
    boundary = constraints.check_tilted_boundary_dec(
        data, theta, args.sign,
        _boundary_samples(data.n, args.samples, args.seed), tol=args.tol)
    violations = []
    for rep, kind in ((interior, "interior"), (boundary, "boundary")):
        for row in rep.rows:
            if row["margin"] < -rep.tol:
                violations.append(dict(row, kind=kind))
    worst = min((interior, boundary), key=lambda r: r.worst_margin)
    report = {
        "family": rec.data.name,
        "params": rec.params,
        "theta": float(args.theta),
        "sign": args.sign,
        "worst_margin": worst.worst_margin,
        "worst_point": [float(v) for v in worst.worst_point],
        "violations": violations,
        "interior": interior.to_dict(),
        "boundary": boundary.to_dict(),
    }
    failures = []
    if interior.violation:
        failures.append("interior dominant-energy margin")
    if boundary.violation:
        failures.append("tilted boundary dominant-energy margin")
    return report, failures


def cmd_adm(args):
    rec = _family_from_args(args)
    theta = None if args.theta is None else np.deg2rad(args.theta)
    report = charges.compute_charges(rec.data, radii=args.radii,
                                     degree=args.degree, theta=theta)
    out = {"family": rec.data.name, "params": rec.params,
           "report": report.to_dict()}
    if args.theta is not None:
        out["theta_degrees"] = float(args.theta)
    if args.normalize is not None:
        if args.normalize == 0:
            raise DomainError("--normalize constant must be nonzero")
        out["normalized"] = {
            "constant": float(args.normalize),
            "energy": report.energy_value / args.normalize,
            "momentum": [float(v) / args.normalize
                         for v in report.momentum_vector],
        }
    if args.csv_path:
        with open(args.csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["r", "E"]
                            + [f"P{i + 1}" for i in range(rec.data.n)])
            for i, r in enumerate(report.radii):
                row = [r, report.energy_values[i]]
                row.extend(report.momentum_values[i])
                writer.writerow(_format_float(v) for v in row)
    return out, []


def cmd_invariance(args):
    rec = _family_from_args(args)
    data = rec.data
    rng = np.random.default_rng(args.seed)
    trials = []
    failures = []
    for k in range(args.rotations):
        rot = _random_rotation(data.n - 1, rng)
        res = charges.invariance_test(data, rotation=rot, radii=args.radii,
                                      degree=args.degree)
        trials.append({
            "rotation": rot.tolist(),
            "energy_drift": res["energy_drift"],
            "normal_momentum_drift": res["normal_momentum_drift"],
            "tangential_transform_error": res["tangential_transform_error"],
        })
    worst = {
        key: max(t[key] for t in trials) if trials else 0.0
        for key in ("energy_drift", "normal_momentum_drift",
                    "tangential_transform_error")
    }
    for key, val in worst.items():
        if val > args.tol:
            failures.append(f"rotation {key.replace('_', ' ')}")
    report = {
        "family": rec.data.name,
        "params": rec.params,
        "rotations": trials,
        "worst": worst,
        "tol": float(args.tol),
    }
    if args.translate is not None:
        res = charges.invariance_test(data, translation=args.translate,
                                      radii=args.radii, degree=args.degree)
        tr = {
            "shift": [float(v) for v in args.translate],
            "energy_drift": res["energy_drift"],
            "normal_momentum_drift": res["normal_momentum_drift"],
            "tangential_transform_error": res["tangential_transform_error"],
            "tol": float(args.translate_tol),
        }
        report["translation"] = tr
        for key in ("energy_drift", "normal_momentum_drift",
                    "tangential_transform_error"):
            if tr[key] > args.translate_tol:
                failures.append(f"translation {key.replace('_', ' ')}")
    return report, failures


def cmd_verify_clifford(args):
    rep = clifford.build_rep(args.n)
    defining = clifford.verify_defining_relations(rep)
    thetas = np.linspace(0.0, np.pi / 2, args.theta_grid)
    rows = clifford.verify_q_identities(rep, thetas)
    passed = sum(1 for row in rows if row["residual"] < args.tol)
    failures = []
    if passed < len(rows):
        failures.append("chirality identity residuals")
    worst_def = max(defining.values())
    if worst_def > args.tol:
        failures.append("gamma defining relations")
    report = {
        "n": args.n,
        "spinor_dim": rep.dim,
        "theta_grid": args.theta_grid,
        "tol": float(args.tol),
        "defining_relations": defining,
        "identities": rows,
        "passed": passed,
        "total": len(rows),
    }
    print(f"{passed}/{len(rows)} identities pass "
          f"(worst defining-relation residual {worst_def:.3e})")
    return report, failures


def cmd_verify_sl(args):
    rec = _family_from_args(args)
    rep = clifford.build_rep(rec.data.n)
    origin = args.origin
    if origin is None:
        origin = [1.5, 0.5] + [0.0] * (rec.data.n - 2)
    if len(origin) != rec.data.n:
        raise DomainError("--origin needs one component per dimension")
    report = dirac.sl_convergence(rec.data, args.h, origin, args.edge, rep)
    lo, hi = args.order_band
    failures = []
    for label, order in (("pointwise", report.pointwise_order),
                         ("integral", report.integral_order)):
        if order is None or not lo <= order <= hi:
            failures.append(f"{label} convergence order outside "
                            f"[{lo:g}, {hi:g}]")
    out = {
        "family": rec.data.name,
        "params": rec.params,
        "origin": [float(v) for v in origin],
        "edge": float(args.edge),
        "order_band": [float(lo), float(hi)],
        "report": report.to_dict(),
    }
    return out, failures


def cmd_witten_flux(args):
    rec = _family_from_args(args)
    data = rec.data
    rep = clifford.build_rep(data.n)
    theta = np.deg2rad(args.theta)
    charge = charges.compute_charges(data, radii=args.radii,
                                     degree=args.degree)
    p_tan = charge.momentum_vector[: data.n - 1]
    phi0, theta_signed = clifford.choose_phi0(rep, theta, p_tan, args.sign)
    flux = dirac.witten_flux(data, rep, theta_signed, args.sign, phi0,
                             radii=args.radii, degree=args.degree)
    failures = []
    if flux.relative_mismatch > args.tol:
        failures.append("flux vs charge pairing mismatch")
    report = {
        "family": rec.data.name,
        "params": rec.params,
        "theta_degrees": float(args.theta),
        "tol": float(args.tol),
        "report": flux.to_dict(),
    }
    return report, failures


def _parse_surface(spec: str, n: int) -> mots.GraphSurface:
    head, *opts = spec.split(":")
    kwargs = {}
    for opt in opts:
        if "=" not in opt:
            raise DomainError(f"surface option {opt!r} is not key=value")
        key, val = opt.split("=", 1)
        parts = [float(tok) for tok in val.split(",")]
        kwargs[key] = parts[0] if len(parts) == 1 else tuple(parts)
    builders = {"flat": mots.flat_graph, "tilted": mots.tilted_graph,
                "cap": mots.sphere_cap}
    if head not in builders:
        raise DomainError(
            f"unknown surface {head!r}; known: {', '.join(sorted(builders))}")
    try:
        return builders[head](n=n, **kwargs)
    except TypeError as exc:
        raise DomainError(f"surface {head!r} options: {exc}")


def _surface_grid(surface: mots.GraphSurface, count: int) -> np.ndarray:
    axes = [np.linspace(lo, hi, count) for lo, hi in surface.bounds()]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def _edge_grid(surface: mots.GraphSurface, count: int) -> np.ndarray:
    bounds = surface.bounds()[:-1]
    if bounds:
        axes = [np.linspace(lo, hi, count) for lo, hi in bounds]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        pts = pts.reshape(-1, len(bounds))
    else:
        pts = np.zeros((1, 0))
    return np.concatenate([pts, np.zeros((pts.shape[0], 1))], axis=-1)


def cmd_mots(args):
    rec = _family_from_args(args)
    data = rec.data
    surface = _parse_surface(args.surface, data.n)
    grid = _surface_grid(surface, args.grid)
    edge = _edge_grid(surface, max(args.grid, 5))

    if args.gamma == "auto":
        tabs = mots._SurfaceTables(data, surface, edge[:1])
        gamma = float(np.arccos(
            np.clip(mots._EdgeTables(tabs).cos_gamma[0], -1.0, 1.0)))
        gamma_deg = float(np.rad2deg(gamma))
    else:
        try:
            gamma_deg = float(args.gamma)
        except ValueError:
            raise DomainError(f"--gamma must be degrees or 'auto', "
                              f"got {args.gamma!r}")
        gamma = float(np.deg2rad(gamma_deg))

    expansion = mots.null_expansion(data, surface, grid)
    trace = mots.boundary_trace_identity(data, surface, gamma, edge)
    z_term = mots.boundary_Z_term(data, surface, gamma, edge)
    one = mots.SurfaceFunction.constant(1.0)
    basis = mots.default_test_basis(surface)
    functional = [
        mots.stability_functional(data, surface, gamma, psi, one,
                                  degree=args.degree).value
        for psi in basis
    ]
    spectrum = mots.stability_spectrum(data, surface, gamma, one, basis,
                                       degree=args.degree)

    failures = []
    if trace["residual"] > 1e-10:
        failures.append("boundary trace identity residual")
    if z_term["cross_check_defect"] > 1e-10:
        failures.append("Z-term rewrite cross-check")
    if min(functional) < -1e-8:
        failures.append("stability functional negative on test basis")

    theta = np.asarray(expansion["theta_plus"])
    report = {
        "family": rec.data.name,
        "params": rec.params,
        "surface": args.surface,
        "gamma_degrees": gamma_deg,
        "null_expansion": {
            "min": float(np.min(theta)),
            "max": float(np.max(theta)),
            "is_mots": expansion["is_mots"],
            "tol": expansion["tol"],
        },
        "trace_identity": {
            "residual": trace["residual"],
            "contact_defect": trace["contact_defect"],
            "frame_defect": trace["frame_defect"],
        },
        "z_term": {
            "values": [float(v) for v in np.asarray(z_term["value"]).ravel()],
            "cross_check_defect": z_term["cross_check_defect"],
        },
        "stability": {
            "functional_values": [float(v) for v in functional],
            "functional_min": float(min(functional)),
            "ritz_smallest": spectrum["smallest"],
            "basis_size": spectrum["basis_size"],
        },
    }
    return report, failures


def cmd_families(args):
    catalog = []
    for name in families.family_names():
        rec = families.make_family(name)
        catalog.append({"name": name, "defaults": rec.params,
                        "decay_order": rec.data.decay_order})
        print(f"{name}: defaults {rec.params}")
    return {"families": catalog}, []


_HANDLERS = {
    "check-dec": cmd_check_dec,
    "adm": cmd_adm,
    "invariance": cmd_invariance,
    "verify-clifford": cmd_verify_clifford,
    "verify-sl": cmd_verify_sl,
    "witten-flux": cmd_witten_flux,
    "mots": cmd_mots,
    "families": cmd_families,
}


def _check_threads_env() -> None:
    raw = os.environ.get("HALFMASS_THREADS")
    if raw is None:
        return
    try:
        val = int(raw)
    except ValueError:
        raise DomainError(f"HALFMASS_THREADS must be an integer, got {raw!r}")
    if val < 1:
        raise DomainError("HALFMASS_THREADS must be at least 1")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits on usage errors (code 2) and --help (code 0);
        # surface those as return values so in-process callers see them
        return exc.code if isinstance(exc.code, int) else 2
    try:
        _check_threads_env()
        if args.config:
            file_conf = _load_config_file(args.config)
            known = {a.dest
                     for a in parser.subcommands[args.command]._actions}
            bad = [k for k in file_conf if k not in known]
            if bad:
                raise DomainError(
                    f"unknown config keys for {args.command}: "
                    f"{', '.join(sorted(bad))}")
            # command line wins over the config file, which wins over defaults
            cli_given = _explicit_dests(parser, argv)
            for key, val in file_conf.items():
                if key == "command" or key in cli_given:
                    continue
                if key == "sign" and isinstance(val, str):
                    val = _sign(val)
                setattr(args, key, val)
        for dest in _REQUIRED_FLAGS.get(args.command, ()):
            if getattr(args, dest, None) in (None, ""):
                raise DomainError(
                    f"{args.command} needs --{dest} (on the command line "
                    "or in the config file)")
        report, failures = _HANDLERS[args.command](args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    report["config"] = canonical_config(args)
    json_path = getattr(args, "json_path", None)
    if json_path:
        write_report(json_path, report)
        print(f"wrote {json_path}")
    if failures:
        for name in failures:
            print(f"FAIL: {name}", file=sys.stderr)
        return 1
    print("ok")
    return 0


def _explicit_dests(parser, argv) -> set:
    """Dests the user actually typed, so config files do not override them."""
    argv = list(sys.argv[1:] if argv is None else argv)
    given = set()
    for tok in argv:
        if not tok.startswith("--"):
            continue
        name = tok[2:].split("=", 1)[0].replace("-", "_")
        if name == "m":
            name = "mass"
        if name == "json":
            name = "json_path"
        if name == "csv":
            name = "csv_path"
        given.add(name)
    return given


if __name__ == "__main__":
    sys.exit(main())
