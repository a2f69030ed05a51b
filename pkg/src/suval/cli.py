"""Command-line interface: ``suval <command> ...``.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage or
input errors. ``--json PATH`` writes a machine-readable report (``-`` for
stdout).
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import forms, grassmann, kinematics, selftest, valuations
from .polytope import Polytope, polytope_from_dict, zonotope_from_dict

SCHEMA_VERSION = 1
DEFAULT_SEED = 0


class InputError(ValueError):
    pass


def _c(z):
    z = complex(z)
    return [z.real, z.imag]


def _load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e}") from None


def _subspace(path):
    data = _load(path)
    try:
        return grassmann.Subspace.from_dict(data)
    except (KeyError, TypeError) as e:
        raise InputError(f"{path}: subspace JSON needs 'n' and 'basis' ([[re, im], ...] rows): {e}") from None


def _polytope(path):
    if path is None:
        return Polytope.box(selftest.BOX)
    return polytope_from_dict(_load(path))


def _body(path):
    """Zonotope input for the kinematic commands (default box(2,1,2,1))."""
    if path is None:
        return zonotope_from_dict({"parallelotope": {"base": [0, 0, 0, 0],
                                                     "generators": np.diag(selftest.BOX).tolist()}})
    data = _load(path)
    try:
        return zonotope_from_dict(data)
    except ValueError:
        return polytope_from_dict(data)


def _workers(args):
    if args.workers is not None:
        return args.workers
    env = os.environ.get("SUVAL_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"SUVAL_WORKERS must be an integer, got {env!r}") from None
    return 1


def _seed(args):
    return DEFAULT_SEED if args.seed is None else args.seed


def _check(name, passed, value=None, reference=None, provenance="exact", **extra):
    out = {"name": name, "pass": bool(passed), "provenance": provenance}
    if value is not None:
        out["value"] = value
    if reference is not None:
        out["reference"] = {"value": reference, "provenance": "reference"}
    out.update(extra)
    return out


# ---- commands: each returns (printable result, list of checks) ----------------

def cmd_kahler(args):
    W = _subspace(args.subspace)
    if W.dim != W.n:
        raise InputError(f"Kaehler angles need a real {W.n}-dimensional subspace, got dimension {W.dim}")
    angles = [float(a) for a in grassmann.kaehler_angles(W)]
    return {"angles": angles}, [_check("kaehler_angles", True, angles)]


def cmd_theta(args):
    W = _subspace(args.subspace)
    th = grassmann.theta_invariant(W).to_dict()
    return th, [_check("theta", True, th["value"], mod_sign=th["mod_sign"])]


def cmd_orbit_eq(args):
    W1, W2 = _subspace(args.subspace), _subspace(args.other)
    same = grassmann.same_su_orbit(W1, W2, tol=args.tol)
    return {"same_orbit": same}, [_check("same_su_orbit", True, same)]


def cmd_evaluate(args):
    P = _polytope(args.polytope)
    n = P.ambient_dim // 2
    val = valuations.valuation(args.valuation, n, args.k)
    v = valuations.evaluate(val, P)
    return {"value": _c(v)}, [_check(f"{args.valuation}(P)", True, _c(v))]


def cmd_product(args):
    rng = np.random.default_rng(_seed(args))
    c = valuations.product_middle(args.a, args.b, args.n, rng=rng)
    ref = valuations.product_middle_closed_form(args.a, args.b, args.n)
    rel = abs(c - ref) / max(abs(ref), 1e-300) if ref != 0 else abs(c)
    ok = rel <= args.tol
    return {"coefficient": _c(c)}, [_check(f"{args.a} * {args.b} / vol, n={args.n}", ok, _c(c), _c(ref),
                                           residual=rel)]


def cmd_verify_forms(args):
    rng = np.random.default_rng(_seed(args))
    reps = forms.verify_forms(args.n, samples=args.samples or 100, tol=args.tol, rng=rng)
    checks = [_check(r.name, r.passed, residual=r.max_residual) for r in reps]
    worst = max(r.max_residual for r in reps)
    return {"identities": len(reps), "max_residual": worst,
            "failing": [r.name for r in reps if not r.passed]}, checks


def _kin_n(args, K):
    n = K.base.shape[0] // 2 if hasattr(K, "base") else K.ambient_dim // 2
    if args.n is not None and args.n != n:
        raise InputError(f"--n {args.n} does not match bodies in R^{2 * n}")
    return n


def cmd_kinematic(args):
    K, L = _body(args.K), _body(args.L)
    n = _kin_n(args, K)
    seed, workers = _seed(args), _workers(args)
    if args.kind == "reproduce":
        Kp = K.to_polytope() if hasattr(K, "to_polytope") else K
        Lp = L.to_polytope() if hasattr(L, "to_polytope") else L
        if args.valuation == "u_delta":
            est = kinematics.u_invariant_delta(Kp, Lp, args.n_g, args.n_t, seed=seed, workers=workers)
        else:
            est = kinematics.reproducing_check(args.valuation, Kp, Lp, args.n_g, args.n_t, seed=seed,
                                               workers=workers)
    else:
        fn = kinematics.additive_kinematic_delta if args.kind == "additive" else kinematics.principal_kinematic_delta
        est = fn(K, L, n, args.samples or 10 ** 6, seed=seed, workers=workers)
    d = est.to_dict()
    ok = est.passes() if est.reference is not None else True
    return d, [_check(f"kinematic {args.kind}", ok, d["estimate"], d.get("reference"), "mc",
                      stderr=est.stderr, z_score=d.get("z_score"), n_samples=est.n_samples, seed=est.seed)]


def cmd_dims(args):
    su, u = valuations.dimension_su(args.n), valuations.dimension_u(args.n)
    return su, [_check("dimension_su", True, su), _check("dimension_u", True, u)]


def cmd_selftest(args):
    ns = (args.n,) if args.n is not None else (2, 3)
    results = selftest.run_all(ns=ns, seed=_seed(args))
    for c in results:
        print(c.line(), file=sys.stderr if args.json == "-" else sys.stdout)
    failed = [c for c in results if not c.passed]
    summary = f"{len(results) - len(failed)}/{len(results)} checks passed"
    return summary, [c.to_dict() for c in results]


# ---- parser ---------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="complex dimension")
    common.add_argument("--seed", type=int, help=f"random seed (default {DEFAULT_SEED})")
    common.add_argument("--samples", type=int, help="sample count")
    common.add_argument("--tol", type=float, default=1e-9, help="tolerance (default 1e-9)")
    common.add_argument("--json", metavar="PATH", help="write a JSON report ('-' for stdout)")
    common.add_argument("--workers", type=int, help="worker threads (default $SUVAL_WORKERS or 1)")

    p = argparse.ArgumentParser(prog="suval", description="SU(n)-invariant valuations toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("kahler", parents=[common], help="Kaehler angles of a subspace")
    s.add_argument("--subspace", required=True)
    s.set_defaults(func=cmd_kahler)

    s = sub.add_parser("theta", parents=[common], help="Theta-invariant of a subspace")
    s.add_argument("--subspace", required=True)
    s.set_defaults(func=cmd_theta)

    s = sub.add_parser("orbit-eq", parents=[common], help="are two subspaces in the same SU(n)-orbit")
    s.add_argument("--subspace", required=True)
    s.add_argument("--other", required=True)
    s.set_defaults(func=cmd_orbit_eq, tol=grassmann.ANGLE_TOL)

    s = sub.add_parser("evaluate", parents=[common], help="evaluate a valuation on a polytope")
    s.add_argument("--valuation", required=True, choices=valuations.NAMES)
    s.add_argument("--k", type=int, help="degree of one_k")
    s.add_argument("--polytope", help="polytope JSON (default box(2,1,2,1))")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("product", parents=[common], help="product of middle degree valuations")
    s.add_argument("a", choices=sorted(valuations.WEIGHTS))
    s.add_argument("b", choices=sorted(valuations.WEIGHTS))
    s.set_defaults(func=cmd_product, tol=1e-8)

    s = sub.add_parser("verify", help="verify identities")
    vsub = s.add_subparsers(dest="target", required=True)
    v = vsub.add_parser("forms", parents=[common], help="invariant form identities on the sphere bundle")
    v.set_defaults(func=cmd_verify_forms)

    s = sub.add_parser("kinematic", help="Monte Carlo kinematic formula checks")
    ksub = s.add_subparsers(dest="kind", required=True)
    for kind in ("additive", "principal", "reproduce"):
        k = ksub.add_parser(kind, parents=[common])
        k.add_argument("--K", help="body JSON (default box(2,1,2,1))")
        k.add_argument("--L", help="body JSON (default box(2,1,2,1))")
        if kind == "reproduce":
            k.add_argument("--valuation", default="phi2", choices=["phi2", "phi1", "vol", "one_2", "u_delta"])
            k.add_argument("--n-g", type=int, default=1250, help="group samples")
            k.add_argument("--n-t", type=int, default=32, help="translation samples per group element")
        k.set_defaults(func=cmd_kinematic)

    s = sub.add_parser("dims", parents=[common], help="dimension of the space of SU(n)-invariant valuations")
    s.set_defaults(func=cmd_dims)

    s = sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    s.set_defaults(func=cmd_selftest)
    return p


def _echo(args):
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.command in ("dims", "product", "verify") and args.n is None:
        print(f"suval {args.command}: --n is required", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    try:
        result, checks = args.func(args)
    except (InputError, ValueError, KeyError, TypeError) as e:
        msg = e.args[0] if e.args else e
        print(f"suval {args.command}: error: {msg}", file=sys.stderr)
        return 2
    ok = all(c["pass"] for c in checks)
    if args.json != "-":
        print(json.dumps(result) if isinstance(result, (dict, list)) else result)
    if args.json:
        report = {"schema_version": SCHEMA_VERSION,
                  "command": {"argv": list(argv) if argv is not None else sys.argv[1:], **_echo(args),
                              "seed": _seed(args)},
                  "result": result, "checks": checks, "pass": ok,
                  "timing": {"seconds": round(time.perf_counter() - t0, 3)}}
        text = json.dumps(report, indent=2, default=_json_default)
        if args.json == "-":
            print(text)
        else:
            with open(args.json, "w") as fh:
                fh.write(text + "\n")
    return 0 if ok else 1


def _json_default(o):
    if isinstance(o, complex):
        return _c(o)
    if isinstance(o, (np.integer, np.floating, np.bool_)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
