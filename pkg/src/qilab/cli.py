"""Command-line front end: every module behind one ``qilab`` command.

Reports always carry the command path, seed, tolerances, version and an
anchor naming the result being exercised. Exit codes: 0 success, 1 usage or
input error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__, acceptance, cones, decoupling, entropy, pbt, qes
from .states import MultiState, PureVec, max_entangled
from .tensorlab import Shape, partial_trace, random_density, random_pure

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2
DEFAULT_TOL = 1e-8


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# emission -----------------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".12g")


def canonical_json(obj) -> str:
    """Sorted keys, no whitespace, floats at 12 significant digits."""
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(json.dumps(k) + ":" + canonical_json(v) for k, v in items) + "}"
    if isinstance(obj, np.ndarray):
        return canonical_json(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return canonical_json({"re": obj.real, "im": obj.imag})
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if hasattr(obj, "to_json"):
        return canonical_json(obj.to_json())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _flatten(obj, prefix="") -> list[tuple[str, str]]:
    if isinstance(obj, dict):
        out = []
        for k in sorted(obj):
            out += _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
        return out
    if isinstance(obj, (list, tuple, np.ndarray)) and not any(isinstance(v, (dict, list, tuple)) for v in obj):
        return [(prefix, ";".join(_cell(v) for v in obj))]
    if isinstance(obj, (list, tuple)):
        out = []
        for i, v in enumerate(obj):
            out += _flatten(v, f"{prefix}[{i}]")
        return out
    return [(prefix, _cell(obj))]


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return _fmt_float(float(v)).strip('"')
    return str(v)


def emit(report: dict, fmt: str = "json") -> bytes:
    """Serialize a report as canonical JSON, CSV or plain text.

    CSV writes the ``columns``/``rows`` table when the result has one and a
    ``key,value`` listing otherwise; either way the first line is a header.
    """
    if fmt == "json":
        return (canonical_json(report) + "\n").encode()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        table = report.get("result", {}) if isinstance(report.get("result"), dict) else {}
        if "columns" in table and "rows" in table:
            w.writerow(table["columns"])
            for row in table["rows"]:
                w.writerow([_cell(v) for v in row])
        else:
            w.writerow(["key", "value"])
            for k, v in _flatten(report):
                w.writerow([k, v])
        return buf.getvalue().encode()
    if fmt == "text":
        return "".join(f"{k}: {v}\n" for k, v in _flatten(report)).encode()
    raise ValueError(f"unknown format {fmt!r}")


# input helpers ------------------------------------------------------------------------

def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _load_state(path: str, dims=None) -> MultiState:
    obj = _load_json(path)
    try:
        if "matrix" in obj:
            st = MultiState.from_json(obj)
        else:
            st = PureVec.from_json(obj).density()
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"malformed state file {path}: {exc}") from exc
    if dims is not None:
        if int(np.prod(dims)) != st.matrix.shape[0]:
            raise UsageError("--dims does not match the state dimension")
        st = MultiState(st.matrix, Shape(tuple(dims)), st.normalization)
    return st


def _int_list(text: str | None):
    if text is None:
        return None
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc
    return vals


def _two(st: MultiState, flag: str):
    if len(st.dims) != 2:
        raise UsageError(f"{flag} needs a bipartite state; pass --dims dA,dE")
    return st.dims


# subcommands --------------------------------------------------------------------------

def _cmd_entropy(args, tol):
    st = _load_state(args.state, _int_list(args.dims))
    M, dims = st.matrix, st.dims
    A, B, C = _int_list(args.A), _int_list(args.B), _int_list(args.C)
    result = {"dims": list(dims), "H": entropy.von_neumann(M), "H_min": entropy.h_min(M),
              "H_max": entropy.h_max(M), "H0": entropy.h0(M)}
    if len(dims) <= cones.MAX_PARTIES:
        result["entropy_vector"] = cones.entropy_vector(st).to_json()
    if args.kind:
        if A is None or (args.kind in ("H_cond", "I", "I_cond", "I_max_fixed", "I_max_opt") and B is None):
            raise UsageError(f"--kind {args.kind} needs --A and --B")
        fn = {
            "H": lambda: entropy.von_neumann(partial_trace(M, dims, A)),
            "H_cond": lambda: entropy.cond_entropy(M, dims, A, B),
            "I": lambda: entropy.mutual_info(M, dims, A, B),
            "I_cond": lambda: entropy.cond_mutual_info(M, dims, A, B, C or []),
            "H_min": lambda: entropy.h_min_cond_fixed(M, dims, A, B) if B else entropy.h_min(partial_trace(M, dims, A)),
            "I_max_fixed": lambda: entropy.i_max_fixed(M, dims, A, B),
            "I_max_opt": lambda: entropy.i_max_opt(M, dims, A, B),
        }.get(args.kind)
        if fn is None:
            raise UsageError(f"unsupported --kind {args.kind}")
        result["quantity"] = {"kind": args.kind, "A": A, "B": B, "C": C, "value": fn()}
    return "entropy_quantities", result, True, {}


def _cmd_cones_check(args, tol):
    obj = _load_json(args.file)
    if isinstance(obj, dict) and "entries" not in obj and isinstance(obj.get("result"), dict):
        obj = obj["result"]  # a report written by `cones cadney`
    try:
        v = cones.EntropyVector.from_json(obj)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"malformed entropy vector file: {exc}") from exc
    vn = cones.check_vn_type(v, tol)
    result = {"n": v.n, "kind": v.kind,
              "vn_type": {"passed": vn["passed"], "checked": vn["checked"], "violations": vn["violations"]}}
    violations = [] if vn["passed"] else ["vn_type"]
    if v.n == 4:
        res = cones.constraint_residuals(v)
        markov_ok = all(abs(r) <= tol for r in res[:2])
        liwi_ok = markov_ok and abs(res[2]) <= tol
        checks = {
            "liwi": {"applies": liwi_ok, "gap": cones.liwi_gap(v)},
            "genliwi": {"applies": markov_ok, "gap": cones.genliwi_gap(v)},
        }
        for name, c in checks.items():
            c["violated"] = bool(c["applies"] and c["gap"] < -tol)
            if c["violated"]:
                violations.append(name)
        result.update(constraint_residuals=list(res), constrained=checks,
                      cadney_gaps=list(cones.cadney_gaps(v)))
    result["violations"] = violations
    return "entropy_cone_inequalities", result, not violations, {"inequality": tol}


def _cmd_cones_independence(args, tol):
    r = cones.conic_membership(cones.genliwi_vector(), cones.vn_generators(4),
                               cones.markov_constraint_vectors(), tol=1e-9)
    ok = (not r.inside) and r.certificate_checks.get("valid", False)
    return "constrained_inequality_independence", r.to_json(), ok, {"lp": 1e-9}


def _cmd_cones_cadney(args, tol):
    return "cadney_vector", cones.cadney_vector().to_json(), True, {}


def _cmd_convex_split(args, tol):
    spec = decoupling.split_spec(args.k, args.delta)
    result = {"split": spec.to_json()}
    ok = True
    tols = {"mutual_info": 1e-8, "purified_distance": 1e-6}
    if args.build:
        if args.state is None:
            raise UsageError("--build needs --state")
        st = _load_state(args.state, _int_list(args.dims))
        dA, dE = _two(st, "--build")
        rho_E = partial_trace(st.matrix, (dA, dE), [1])
        log_dim = math.log2(dA) + spec.n * math.log2(dE)
        if log_dim > math.log2(decoupling.DIM_GUARD):
            result["build"] = {"in_guard": False, "log2_dimension": log_dim, "guard": decoupling.DIM_GUARD}
        else:
            c = decoupling.convex_split_checks(st.matrix, rho_E, args.delta, (dA, dE), n=spec.n)
            c["k_state_within_k"] = bool(c["k"] <= args.k + 1e-12)
            c["in_guard"] = True
            ok = (c["k_state_within_k"] and c["mutual_info"] <= c["info_bound"] + tols["mutual_info"]
                  and c["purified_distance"] <= c["distance_bound"] + tols["purified_distance"])
            result["build"] = c
    return "convex_split", result, ok, tols


def _cmd_decouple(args, tol):
    st = _load_state(args.state, _int_list(args.dims))
    dims = _two(st, "decouple")
    split = _int_list(args.split)
    if split is None or len(split) != 2:
        raise UsageError("--split needs d1,d2")
    seeds = np.random.SeedSequence(args.seed).generate_state(args.trials)
    trials = [decoupling.random_decouple_trial(st.matrix, dims, split, int(s)) for s in seeds]
    dist = [t.distance for t in trials]
    best = trials[int(np.argmin(dist))]
    result = {"trials": args.trials, "distances": dist, "mean_distance": float(np.mean(dist)),
              "best": best.to_json(), "decoupling_bound": decoupling.decoupling_bound(st.matrix, dims)}
    return "random_unitary_decoupling", result, True, {}


def _cmd_pbt_fidelity(args, tol):
    F = pbt.pbt_fidelity(args.d, args.N)
    ch = pbt.pbt_channel(args.d, args.N)
    cov = pbt.covariance_check(ch, args.trials or 100, seed=args.seed)
    t = tol if args.tol is not None else DEFAULT_TOL
    result = {"d": args.d, "N": args.N, "F": F, "eps_sim": pbt.eps_from_fidelity(F), "covariance_residual": cov}
    return "pbt_pgm_fidelity", result, cov < t, {"covariance": t}


def _cmd_pbt_bounds(args, tol):
    b = pbt.pbt_bounds(args.d, args.eps)
    return "pbt_port_lower_bounds", {"d": args.d, "eps": args.eps, **b.to_json()}, True, {}


def _cmd_pbt_sweep(args, tol):
    rows = pbt.sweep(args.d, args.Nmax)
    t = 1e-6
    ok = True
    for d, N, F, e, lc, ln, lcomb, _ in rows:
        if 0 < e <= 1 / math.sqrt(2):
            ok = ok and N >= lc - t and N >= ln - t
    cols = ["d", "N", "F", "eps_sim", "lb_comm", "lb_ns", "lb_combined", "achievable_N"]
    return "pbt_sweep", {"columns": cols, "rows": [list(r) for r in rows]}, ok, {"bound": t}


def _nm_scheme(name: str, n: int, keys, seed):
    if name == "pauli":
        return qes.pauli_otp(n)
    if name == "clifford":
        return qes.clifford_scheme(n, keys=keys, seed=seed)
    raise UsageError(f"unknown scheme {name!r}")


def _cmd_qes_nm(args, tol):
    t = tol if args.tol is not None else 1e-6
    if args.scheme == "injection":
        base = qes.clifford_scheme(args.n)
        demo = qes.injection_demo(base)
        ok = demo["abw_member"] and demo["nm_gap"] > t
        return "injection_separation", demo, ok, {"nm_gap": t}
    s = _nm_scheme(args.scheme, args.n, args.keys, args.seed)
    dA = s.dims[0]
    seeds = np.random.SeedSequence(args.seed).generate_state(args.attacks)
    gaps = []
    for sd in seeds:
        a = qes.random_attack(s.dims[1], 2, 2, seed=int(sd))
        rho = random_density(dA * 4, seed=int(sd))
        gaps.append(qes.nm_gap(s, a, rho, (dA, 2, 2)))
    result = {"scheme": s.name, "keys": s.n_keys, "attacks": args.attacks, "max_gap": max(gaps, default=-math.inf),
              "log_dim_R": math.log2(2)}
    if dA == 2:
        result["coin_attack_gap"] = qes.nm_gap(s, qes.coin_pauli_attack(), max_entangled(2).density().matrix, (2, 1, 2))
    result["nm_holds"] = bool(result["max_gap"] <= t and result.get("coin_attack_gap", -math.inf) <= t)
    # only the exact 2-design scheme is asserted to be non-malleable
    ok = result["nm_holds"] if args.scheme == "clifford" and args.keys is None else True
    return "non_malleability_gap", result, ok, {"nm_gap": t}


def _cmd_qes_auth(args, tol):
    if args.scheme != "tagged-clifford":
        raise UsageError(f"unknown scheme {args.scheme!r}")
    base = qes.clifford_scheme(args.n, keys=args.keys, seed=args.seed)
    s = qes.tagged_scheme(base, args.tags)
    dA, dC = s.dims
    ceiling = qes.gyz_bound(args.tags)
    ss = np.random.SeedSequence(args.seed)
    in_seeds, atk_seeds = (x.generate_state(k) for x, k in zip(ss.spawn(2), (2, args.attacks)))
    inputs = [random_pure((dA, 2), seed=int(x)) for x in in_seeds] + [max_entangled(2).density().matrix
                                                                      if dA == 2 else np.eye(dA * 2) / (dA * 2)]
    gyz, dns = [], []
    for sd in atk_seeds:
        a = qes.random_isometric_attack(dC, 2, 2, seed=int(sd))
        gyz.append(qes.gyz_check(s, a, inputs))
        dns.append(qes.dns_check(s, a, inputs))
    result = {"scheme": s.name, "keys": s.n_keys, "tag_dim": args.tags, "attacks": args.attacks, "ceiling": ceiling,
              "max_gyz_residual": max(gyz), "max_dns_residual": max(dns)}
    ok = max(gyz) <= ceiling and max(dns) <= ceiling
    return "two_design_authentication", result, ok, {"ceiling": ceiling}


def _cmd_selftest(args, tol):
    crit = []
    for c in acceptance.SUITE:
        r = acceptance.run_criterion(c[0], args.seed)
        print(r.line(), file=sys.stderr)
        crit.append({"id": r.ident, "title": r.title, "passed": r.passed, "detail": r.detail})
    passed = sum(c["passed"] for c in crit)
    result = {"passed": passed, "total": len(crit), "criteria": crit}
    return "acceptance_suite", result, passed == len(crit), {}


# parser -------------------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=1, help="unsigned integer seed")
    p.add_argument("--tol", type=float, default=None, help="override the verification tolerance")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--dims", default=None, help="comma-separated subsystem dimensions")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--json", dest="fmt", action="store_const", const="json")
    g.add_argument("--csv", dest="fmt", action="store_const", const="csv")
    g.add_argument("--text", dest="fmt", action="store_const", const="text")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    root = _Parser(prog="qilab", description="Dense-matrix quantum information laboratory.")
    sub = root.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("entropy", parents=[common], help="entropic quantities of a state file")
    p.add_argument("--state", required=True)
    p.add_argument("--kind", choices=["H", "H_cond", "I", "I_cond", "H_min", "I_max_fixed", "I_max_opt"])
    p.add_argument("--A")
    p.add_argument("--B")
    p.add_argument("--C")
    p.set_defaults(handler=_cmd_entropy)

    pc = sub.add_parser("cones", help="entropy cone checks").add_subparsers(dest="sub", required=True,
                                                                             parser_class=_Parser)
    p = pc.add_parser("check", parents=[common], help="check an entropy vector file")
    p.add_argument("--file", required=True)
    p.set_defaults(handler=_cmd_cones_check)
    p = pc.add_parser("independence", parents=[common], help="LP independence of the constrained inequality")
    p.set_defaults(handler=_cmd_cones_independence)
    p = pc.add_parser("cadney", parents=[common], help="print the Cadney vector")
    p.set_defaults(handler=_cmd_cones_cadney)

    p = sub.add_parser("convex-split", parents=[common], help="convex split copy count and checks")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--build", action="store_true")
    p.add_argument("--state")
    p.set_defaults(handler=_cmd_convex_split)

    p = sub.add_parser("decouple", parents=[common], help="random unitary decoupling trials")
    p.add_argument("--state", required=True)
    p.add_argument("--split", required=True)
    p.set_defaults(handler=_cmd_decouple, trials_default=10)

    pp = sub.add_parser("pbt", help="port-based teleportation").add_subparsers(dest="sub", required=True,
                                                                               parser_class=_Parser)
    p = pp.add_parser("fidelity", parents=[common])
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.set_defaults(handler=_cmd_pbt_fidelity)
    p = pp.add_parser("bounds", parents=[common])
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.set_defaults(handler=_cmd_pbt_bounds)
    p = pp.add_parser("sweep", parents=[common])
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--Nmax", type=int, required=True)
    p.set_defaults(handler=_cmd_pbt_sweep)

    pq = sub.add_parser("qes", help="quantum encryption schemes").add_subparsers(dest="sub", required=True,
                                                                                 parser_class=_Parser)
    p = pq.add_parser("nm", parents=[common], help="non-malleability gaps")
    p.add_argument("--scheme", choices=["pauli", "clifford", "injection"], required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--keys", type=int, default=None, help="subsample this many Clifford keys")
    p.add_argument("--attacks", type=int, default=20)
    p.set_defaults(handler=_cmd_qes_nm)
    p = pq.add_parser("auth", parents=[common], help="authentication residuals")
    p.add_argument("--scheme", choices=["tagged-clifford"], required=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--tags", type=int, default=2)
    p.add_argument("--keys", type=int, default=None)
    p.add_argument("--attacks", type=int, default=20)
    p.set_defaults(handler=_cmd_qes_auth)

    p = sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    p.set_defaults(handler=_cmd_selftest)
    return root


def run(argv) -> tuple[dict, int, argparse.Namespace]:
    """Parse ``argv``, run the command and return ``(report, exit_code, args)``."""
    args = build_parser().parse_args(argv)
    if args.seed < 0:
        raise UsageError("--seed must be unsigned")
    if getattr(args, "trials_default", None) and args.trials is None:
        args.trials = args.trials_default
    if args.trials is not None and args.trials < 1:
        raise UsageError("--trials must be positive")
    tol = args.tol if args.tol is not None else DEFAULT_TOL
    try:
        anchor, result, ok, tols = args.handler(args, tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    command = " ".join([args.command] + ([args.sub] if getattr(args, "sub", None) else []))
    report = {"command": command, "seed": args.seed, "tolerances": {"default": tol, **tols},
              "version": f"v{__version__}", "anchor": anchor, "status": "pass" if ok else "verification_failed",
              "result": result}
    return report, EXIT_OK if ok else EXIT_VERIFY, args


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        report, code, args = run(argv)
    except UsageError as exc:
        print(f"qilab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    data = emit(report, args.fmt or "json")
    if args.out:
        try:
            with open(args.out, "wb") as fh:
                fh.write(data)
        except OSError as exc:
            print(f"qilab: error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    if code == EXIT_VERIFY:
        print("qilab: verification failed", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
