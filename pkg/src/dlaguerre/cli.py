"""Command-line front end: moment tables, identity reports, flow trajectories.

Three subcommands:

    dlaguerre moments --alpha 2 --mu 2 --zeta 0.5 --t 0.3 --kmax 12
    dlaguerre verify  --alpha 2 --mu 2 --zeta 0.5 --t 0.3 --nmax 3
    dlaguerre evolve  --alpha 2 --mu 2 --zeta 0.5 --n 1 --t0 1e-3 --t1 0.3

Outputs are machine-readable (json or csv), written atomically, and
deterministic: identical configuration produces byte-identical files
(no timestamp is emitted unless --stamp is passed, and then only inside
the metadata block).  Numbers are serialized as decimal strings carrying
floor(bits * log10 2) digits.  Options may also come from a flat
key=value config file (# comments allowed); command-line flags override
the file.  The DLL_PREC_BITS environment variable overrides the default
precision bits.

Exit codes: 0 success (and, for verify, all identities passed);
2 parameter/usage validation failure; 3 numerical failure
(quadrature/precision/singularity); 4 verify ran but some identities
failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from datetime import datetime, timezone

import mpmath as mp

from . import __version__
from .errors import (DLaguerreError, SingularityEncountered,
                     UnsupportedParameters)
from .hankel import table_for
from .moments import WeightParams, moment_closed_form, moment_quadrature
from .painleve import (PVParams, StepControl, ab_flow_check, evolve,
                       hamilton_map_residual, pv_residual,
                       to_hamiltonian)
from .precision import PrecisionCtx, nstr_full, to_mpf, workprec
from .semiclassical import theta_kappa_from_recurrence, verify_identities

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY_FAILED = 4


def _read_config_file(path: str) -> dict:
    """Flat key=value lines; # starts a comment; keys use flag spelling."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line without '=': {raw.rstrip()}")
            key, val = line.split("=", 1)
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def _merge_config(args: argparse.Namespace, parser: argparse.ArgumentParser,
                  argv):
    """Config-file values fill in flags the command line left at default."""
    if not getattr(args, "config", None):
        return args
    file_vals = _read_config_file(args.config)
    for key, val in file_vals.items():
        if not hasattr(args, key):
            raise ValueError(f"unknown config key: {key}")
        # a flag explicitly present on the command line wins
        flag = "--" + key.replace("_", "-")
        if any(a == flag or a.startswith(flag + "=") for a in argv):
            continue
        default = parser.get_default(key)
        if getattr(args, key) == default:
            setattr(args, key, val)
    return args


def _atomic_write(path: str, data: str):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".dlag-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(data: str, out_path):
    if out_path:
        _atomic_write(out_path, data)
    else:
        sys.stdout.write(data)
        if not data.endswith("\n"):
            sys.stdout.write("\n")


def _prec_from_args(args) -> PrecisionCtx:
    bits = args.prec_bits
    if bits is None:
        bits = os.environ.get("DLL_PREC_BITS")
    bits = int(bits) if bits is not None else 256
    tol = args.tol if args.tol is not None else "1e-30"
    return PrecisionCtx(significand_bits=bits, tol=tol)


def _params_from_args(args) -> WeightParams:
    missing = [k for k in ("alpha", "mu", "zeta") if getattr(args, k) is None]
    if missing:
        raise ValueError(f"missing required parameter(s): {', '.join(missing)}")
    return WeightParams(int(args.alpha), _int_or_str(args.mu), args.zeta,
                        args.t if args.t is not None else 0)


def _int_or_str(v):
    try:
        if float(v) == int(float(v)):
            return int(float(v))
    except (TypeError, ValueError):
        pass
    return v


def _metadata(args, prec: PrecisionCtx) -> dict:
    meta = {
        "schema_version": SCHEMA_VERSION,
        "tool": "dlaguerre",
        "version": __version__,
        "prec_bits": prec.significand_bits,
        "tol": str(prec.tol),
        "digits": prec.decimal_digits,
    }
    if getattr(args, "stamp", False):
        meta["timestamp"] = datetime.now(timezone.utc).isoformat()
    return meta


def cmd_moments(args, parser) -> int:
    prec = _prec_from_args(args)
    params = _params_from_args(args)
    if args.t is None:
        raise ValueError("moments requires --t")
    k_max = int(args.kmax if args.kmax is not None else 8)
    with workprec(prec):
        rows = []
        for k in range(k_max + 1):
            cf = moment_closed_form(k, params, prec)
            q = moment_quadrature(k, params, prec)
            rel = abs(cf - q) / max(abs(q), mp.mpf(1))
            rows.append({
                "k": k,
                "closed_form": nstr_full(cf, prec),
                "quadrature": nstr_full(q, prec),
                "relative_difference": mp.nstr(rel, 5),
            })
    if args.format == "json":
        doc = {"metadata": _metadata(args, prec),
               "params": _params_dict(params), "moments": rows}
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    else:
        buf = io.StringIO()
        wr = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
        wr.writeheader()
        wr.writerows(rows)
        _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _params_dict(params: WeightParams) -> dict:
    return {"alpha": str(params.alpha), "mu": str(params.mu),
            "zeta": str(params.zeta), "t": str(params.t)}


def cmd_verify(args, parser) -> int:
    prec = _prec_from_args(args)
    params = _params_from_args(args)
    if args.t is None:
        raise ValueError("verify requires --t")
    n_max = int(args.nmax if args.nmax is not None else 3)
    threshold = float(args.threshold)
    with workprec(prec):
        moments, table = table_for(params, n_max + 2, prec)
        n_range = list(range(1, n_max + 1))
        rep = verify_identities(
            table, moments, n_range, prec, threshold=threshold,
            include_quadrature_checks=not args.fast)
        t_mid = to_mpf(params.t)
        span = t_mid / 10
        grid = mp.linspace(t_mid - span, t_mid + span, 9)
        flow_rep = ab_flow_check(params, min(2, n_max), grid, prec,
                                 threshold=max(threshold, 1e-8))
    doc = {
        "metadata": _metadata(args, prec),
        "params": _params_dict(params),
        "identities": rep.to_dict(),
        "flow": flow_rep.to_dict(),
        "all_passed": rep.all_passed and flow_rep.all_passed,
    }
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK if doc["all_passed"] else EXIT_VERIFY_FAILED


def cmd_evolve(args, parser) -> int:
    prec = _prec_from_args(args)
    params = _params_from_args(args)
    if args.t0 is None or args.t1 is None:
        raise ValueError("evolve requires --t0 and --t1")
    n = int(args.n if args.n is not None else 1)
    convention = args.convention
    ctrl = StepControl(rtol=args.ode_tol, atol=str(to_mpf(args.ode_tol) * 1e-6))
    with workprec(prec):
        t0 = to_mpf(args.t0)
        t1 = to_mpf(args.t1)
        if not t0 <= t1:
            raise ValueError("need t0 <= t1")
        try:
            traj = evolve(n, t0, t1, params, prec, ctrl)
        except SingularityEncountered as exc:
            sys.stderr.write(
                f"singularity encountered; last good t = "
                f"{mp.nstr(exc.t_last, 20) if exc.t_last else '?'}\n")
            return EXIT_NUMERICAL

        rows = []
        stride = max(1, len(traj) // int(args.max_rows))
        idxs = list(range(0, len(traj), stride))
        if idxs[-1] != len(traj) - 1:
            idxs.append(len(traj) - 1)
        for i in idxs:
            t, th, ka = traj.t[i], traj.theta[i], traj.kappa[i]
            hp = to_hamiltonian(th, ka, t, n, params, convention)
            rows.append({
                "t": nstr_full(t, prec), "theta": nstr_full(th, prec),
                "kappa": nstr_full(ka, prec), "q": nstr_full(hp.q, prec),
                "p": nstr_full(hp.p, prec), "H": nstr_full(hp.H, prec),
            })

        summary = {"steps": traj.steps, "rejected": traj.rejected,
                   "max_error_estimate": traj.max_error_estimate,
                   "convention": convention}
        if t1 > t0:
            pars1 = params.replace_t(t1)
            mom1, tab1 = table_for(pars1, n + 1, prec, cross_check=False)
            ref = theta_kappa_from_recurrence(tab1, n)
            th1 = traj.theta[-1]
            summary["endpoint_vs_hankel_rel"] = mp.nstr(
                abs(th1 - ref.theta) / max(abs(ref.theta), mp.mpf(1e-30)), 5)
            summary["hamilton_flow_residual"] = mp.nstr(
                hamilton_map_residual(ref.theta, ref.kappa, n, t1, params,
                                      convention, prec), 5)
            lo = max(t0, to_mpf("0.1"))
            if t1 > lo * mp.mpf("1.2"):
                grid = mp.linspace(lo, t1, 121)
                qs = []
                for tt, (th, ka) in zip(grid, traj.sample(grid)):
                    qs.append(to_hamiltonian(th, ka, tt, n, params,
                                             convention).q)
                pv = PVParams.make(n, params.alpha, params.mu, convention)
                summary["pv_residual"] = float(
                    pv_residual(grid, qs, pv.alphas, prec))

    if args.format == "json":
        doc = {"metadata": _metadata(args, prec),
               "params": _params_dict(params), "n": n,
               "summary": summary, "trajectory": rows}
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    else:
        buf = io.StringIO()
        wr = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
        wr.writeheader()
        wr.writerows(rows)
        buf.write("# summary: " + json.dumps(summary) + "\n")
        _emit(buf.getvalue(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dlaguerre",
        description="Numerical laboratory for the jump-deformed Laguerre "
                    "weight and its Painleve V flow")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--alpha", help="integer exponent on (x - t)")
        p.add_argument("--mu", help="exponent on x (integer for closed form)")
        p.add_argument("--zeta", help="jump size, zeta < 1")
        p.add_argument("--t", help="jump location t >= 0")
        p.add_argument("--prec-bits", dest="prec_bits",
                       help="significand bits (default 256 or DLL_PREC_BITS)")
        p.add_argument("--tol", help="relative tolerance (default 1e-30)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--stamp", action="store_true",
                       help="include a timestamp in the metadata block")

    p_m = sub.add_parser("moments", help="closed-form vs quadrature moments")
    common(p_m)
    p_m.add_argument("--kmax", help="highest moment index (default 8)")
    p_m.set_defaults(func=cmd_moments)

    p_v = sub.add_parser("verify", help="run the identity suite")
    common(p_v)
    p_v.add_argument("--nmax", help="highest polynomial index (default 3)")
    p_v.add_argument("--threshold", default="1e-15",
                     help="relative residual threshold (default 1e-15)")
    p_v.add_argument("--fast", action="store_true",
                     help="skip the quadrature-based checks")
    p_v.set_defaults(func=cmd_verify)

    p_e = sub.add_parser("evolve", help="integrate the coupled flow")
    common(p_e)
    p_e.add_argument("--n", help="polynomial index n (default 1)")
    p_e.add_argument("--t0", help="initial t (series initial data)")
    p_e.add_argument("--t1", help="final t")
    p_e.add_argument("--convention", choices=("prop11", "cor12"),
                     default="prop11")
    p_e.add_argument("--ode-tol", dest="ode_tol", default="1e-18",
                     help="integrator relative tolerance")
    p_e.add_argument("--max-rows", dest="max_rows", default="200",
                     help="max trajectory rows in the output")
    p_e.set_defaults(func=cmd_evolve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    effective_argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        args = parser.parse_args(effective_argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already
        return int(exc.code or 0)
    try:
        args = _merge_config(args, parser, effective_argv)
        return args.func(args, parser)
    except (ValueError, KeyError, UnsupportedParameters) as exc:
        sys.stderr.write(f"error: {exc}\n")
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except DLaguerreError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
