"""Command-line front end: ``calabi-cone cone ...`` and ``calabi-cone link ...``.

Exit status is 0 on success, 2 when the library raises a domain error (the
error class name is printed verbatim) and 1 on usage errors.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import os
import sys
from fractions import Fraction
from typing import Sequence

from . import links, reeb, resolve
from . import exactgeom as eg
from .errors import GeometryError, UnresolvedResidual
from .fan import Fan, gorenstein_gamma, is_terminal, load_fan, save_fan, section_polytope

ENV_THREADS = "CALABI_CONE_THREADS"


class UsageError(Exception):
    pass


class CheckFailed(GeometryError):
    """A self-check asserted by a subcommand did not hold."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# Serialization helpers


def jsonable(obj):
    """Convert library values (Fractions, tuples, dataclass-like groups) to JSON types."""
    if isinstance(obj, Fraction):
        return int(obj) if obj.denominator == 1 else str(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if hasattr(obj, "item") and not isinstance(obj, (list, tuple, dict)):
        return jsonable(obj.item())
    if isinstance(obj, links.AbelianGroup):
        return obj.to_dict()
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    return str(obj)


def _flat(v) -> bool:
    if isinstance(v, dict):
        return False
    if isinstance(v, list):
        return all(_flat(x) for x in v)
    return True


def _human(value, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(value, dict):
        for k, v in value.items():
            if _flat(v):
                lines.append(f"{pad}{k}: {_fmt(v)}")
            else:
                lines.append(f"{pad}{k}:")
                lines.extend(_human(v, indent + 1))
    elif isinstance(value, list):
        for v in value:
            if _flat(v):
                lines.append(f"{pad}- {_fmt(v)}")
            else:
                lines.append(f"{pad}-")
                lines.extend(_human(v, indent + 1))
    else:
        lines.append(f"{pad}{_fmt(value)}")
    return lines


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.9g}"
    if isinstance(v, list):
        return "(" + ", ".join(_fmt(x) for x in v) + ")"
    if v is None:
        return "-"
    return str(v)


def _digest(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()[:16]


def _read_fan(path: str) -> tuple[Fan, str]:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read fan file {path!r}: {exc.strerror}") from None
    try:
        fan = Fan.from_dict(json.loads(raw))
    except json.JSONDecodeError as exc:
        raise UsageError(f"fan file {path!r} is not valid JSON: {exc}") from None
    return fan, _digest(raw)


def _int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise UsageError(f"{flag}: expected comma-separated integers, got {text!r}") from None


def _threads(args) -> int:
    if getattr(args, "threads", None) is not None:
        return args.threads
    env = os.environ.get(ENV_THREADS)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"{ENV_THREADS}: expected an integer, got {env!r}") from None
    return 1


# ---------------------------------------------------------------------------
# cone subcommands


def _check_fan(fan: Fan) -> dict:
    cert = gorenstein_gamma(fan)
    smooth = all(len(c) == fan.lattice_dim and eg.lattice_index(fan.cone_rays(i)) == 1
                 for i, c in enumerate(fan.cones))
    out = {
        "dim": fan.lattice_dim,
        "n_rays": len(fan.rays),
        "n_cones": len(fan.cones),
        "gorenstein": cert.holds,
        "gamma": list(cert.gamma) if cert.gamma is not None else None,
        "simplicial": fan.is_simplicial(),
        "smooth": smooth,
        "terminal": None,
    }
    if cert.holds and fan.lattice_dim in (2, 3):
        sec = section_polytope(fan, cert)
        interior, boundary = sec.lattice_points()
        out["terminal"] = is_terminal(fan) if fan.is_single_cone() else None
        out["section"] = {
            "vertices": [list(v) for v in sec.polygon.vertices] if sec.polygon else list(sec.interval),
            "interior_points": [list(p) for p in interior],
            "boundary_points": [list(p) for p in boundary],
            "doubled_area": sec.doubled_area(),
        }
    return out


def _resolve_report(fan: Fan, allow_small: bool = False):
    result = resolve.crepant_resolve(fan, allow_small=allow_small)
    rep = result.to_dict()
    rep["gamma"] = list(result.gamma) if result.gamma is not None else None
    return result, rep


def _reeb_report(fan: Fan, tol: float, threads: int, derivatives: str = "analytic") -> dict:
    m = reeb.minimize_volume(fan, tol=tol, threads=threads, derivatives=derivatives)
    qr = reeb.quasi_regularity(m.reeb.xi)
    return {
        "xi": list(m.reeb.xi),
        "volume": m.volume,
        "grad_norm": m.grad_norm,
        "iterations": m.iterations,
        "evaluations": m.evaluations,
        "derivatives": derivatives,
        "threads": threads,
        "quasi_regular": bool(qr),
        "rational_xi": [str(x) for x in qr] if qr else None,
        "verdict": "quasi-regular" if qr else "irregular",
    }


def cmd_cone_check(args):
    fan, dig = _read_fan(args.fan_file)
    return _check_fan(fan), dig


def cmd_cone_resolve(args):
    fan, dig = _read_fan(args.fan_file)
    result, rep = _resolve_report(fan, args.allow_small)
    if args.out:
        save_fan(result.refined_fan, args.out)
        rep["written"] = args.out
    return rep, dig


def cmd_cone_invariants(args):
    fan, dig = _read_fan(args.fan_file)
    result = resolve.crepant_resolve(fan)
    return resolve.toric_invariants(fan, result), dig


def cmd_cone_reeb(args):
    fan, dig = _read_fan(args.fan_file)
    return _reeb_report(fan, args.tol, _threads(args), args.derivatives), dig


def cmd_cone_spq(args):
    fan = resolve.spq_fan(args.p, args.q)
    result, res = _resolve_report(fan)
    disc = 4 * args.p ** 2 - 3 * args.q ** 2
    root = resolve.spq_quasi_regular(args.p, args.q)
    reeb_rep = _reeb_report(fan, args.tol, _threads(args), args.derivatives)
    out = {
        "fan": fan.to_dict(),
        "check": _check_fan(fan),
        "c_X": result.c_X,
        "euler": result.euler,
        "resolution": res,
        "invariants": resolve.toric_invariants(fan, result),
        "reeb": reeb_rep,
        "square_test": {"discriminant": disc, "perfect_square": root is not None, "root": root},
        "verdict": "quasi-regular" if root is not None else "irregular",
    }
    if (root is not None) != reeb_rep["quasi_regular"]:
        out["warnings"] = ["numerical quasi-regularity verdict disagrees with the square test"]
    return out, _digest(json.dumps([args.p, args.q]).encode())


def cmd_cone_quotient(args):
    weights = _int_list(args.weights, "--weights")
    spec = resolve.QuotientSpec.cyclic(args.order, weights)
    fan = resolve.quotient_fan(spec)
    result, res = _resolve_report(fan)
    out = {"fan": fan.to_dict(), "c_X": result.c_X, "euler": result.euler,
           "group_order": args.order, "euler_equals_order": result.euler == args.order,
           "resolution": res}
    if result.euler != args.order:
        raise CheckFailed(f"euler {result.euler} != |G| = {args.order}")
    return out, _digest(json.dumps([args.order, weights]).encode())


# ---------------------------------------------------------------------------
# link subcommands


def _load_input(args) -> dict:
    if not getattr(args, "input", None):
        return {}
    try:
        with open(args.input) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"--input: cannot read {args.input!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"--input: invalid JSON: {exc}") from None


def cmd_link_hodge(args):
    doc = _load_input(args)
    weights = _int_list(args.weights, "--weights") if args.weights else doc.get("weights")
    degree = args.degree if args.degree is not None else doc.get("degree")
    exps = _int_list(args.exponents, "--exponents") if args.exponents else doc.get("exponents")
    if weights is None:
        raise UsageError("--weights is required")
    if degree is None:
        raise UsageError("--degree is required")
    h = links.WeightedHypersurface(tuple(weights), int(degree),
                                   tuple(exps) if exps is not None else None)
    product = exps is None or args.product_formula
    series = links.milnor_poincare(h, product_formula=product)
    n = h.nvars - 2
    hodge = links.steenbrink_hodge(h, n, product_formula=product)
    out = {
        "weights": list(h.weights),
        "degree": h.degree,
        "exponents": list(h.exponents) if h.exponents else None,
        "formula": "product" if product else "brieskorn-pham",
        "series": list(series.coefficients),
        "milnor_number": series.total,
        "canonical": h.is_canonical,
        "hodge_primitive": hodge,
    }
    if exps is not None:
        out["series_formulas_agree"] = (
            links.milnor_poincare(h, product_formula=True) == links.milnor_poincare(h))
    if n == 2:
        out["s"] = 1 + sum(hodge)
    return out, _digest(json.dumps([weights, degree, exps]).encode())


def _parse_branch(text: str) -> list[tuple[int, int]]:
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            m, g = item.split(":")
            out.append((int(m), int(g)))
        except ValueError:
            raise UsageError(f"--branch: expected m:g pairs, got {item!r}") from None
    return out


def cmd_link_seifert(args):
    branch = _parse_branch(args.branch) if args.branch else []
    sd = links.SeifertData(args.s, args.ddiv, tuple(branch))
    table = links.seifert_cohomology(sd)
    out = {k: str(v) for k, v in table.items()}
    out["groups"] = {k: v.to_dict() for k, v in table.items()}
    return out, _digest(json.dumps([args.s, args.ddiv, branch]).encode())


def cmd_link_family(args):
    doc = _load_input(args)
    name = args.name or doc.get("family")
    k = args.k if args.k is not None else doc.get("k")
    n = args.n if args.n is not None else doc.get("n", 3)
    if name is None:
        raise UsageError("--name is required")
    if k is None and name != "quartic-cubic":
        raise UsageError("--k is required")
    rep = links.terminalize_family(name, k or 0, n=n)
    return rep.to_dict(), _digest(json.dumps([name, k, n]).encode())


# ---------------------------------------------------------------------------
# Parser and driver


def _common(p: argparse.ArgumentParser, top: bool = False) -> None:
    default = None if top else argparse.SUPPRESS
    p.add_argument("--json", action="store_true", default=False if top else argparse.SUPPRESS,
                   help="machine-readable output")
    p.add_argument("--no-timestamp", action="store_true",
                   default=False if top else argparse.SUPPRESS, help="omit the timestamp field")
    p.add_argument("--threads", type=int, default=default,
                   help=f"parallel objective evaluations (fallback: ${ENV_THREADS})")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="calabi-cone", description=__doc__.splitlines()[0])
    _common(parser, top=True)
    sub = parser.add_subparsers(dest="group", parser_class=_Parser)
    sub.required = True

    cone = sub.add_parser("cone", help="toric cones")
    csub = cone.add_subparsers(dest="command", parser_class=_Parser)
    csub.required = True

    p = csub.add_parser("check", help="Gorenstein, smoothness and terminality flags")
    p.add_argument("fan_file")
    p.set_defaults(func=cmd_cone_check)

    p = csub.add_parser("resolve", help="crepant resolution with strictly convex support function")
    p.add_argument("fan_file")
    p.add_argument("--out", help="write the refined fan here")
    p.add_argument("--allow-small", action="store_true")
    p.set_defaults(func=cmd_cone_resolve)

    p = csub.add_parser("invariants", help="c(X), Euler and Betti numbers")
    p.add_argument("fan_file")
    p.set_defaults(func=cmd_cone_invariants)

    p = csub.add_parser("reeb", help="volume-minimizing Reeb vector")
    p.add_argument("fan_file")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--derivatives", choices=["analytic", "fd"], default="analytic",
                   help="Newton derivatives: closed form or finite differences")
    p.set_defaults(func=cmd_cone_reeb)

    p = csub.add_parser("spq", help="full pipeline for S^{p,q}")
    p.add_argument("p", type=int)
    p.add_argument("q", type=int)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--derivatives", choices=["analytic", "fd"], default="analytic",
                   help="Newton derivatives: closed form or finite differences")
    p.set_defaults(func=cmd_cone_spq)

    p = csub.add_parser("quotient", help="resolution of C^3 / Z_m")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--weights", required=True)
    p.set_defaults(func=cmd_cone_quotient)

    link = sub.add_parser("link", help="hypersurface links")
    lsub = link.add_subparsers(dest="command", parser_class=_Parser)
    lsub.required = True

    p = lsub.add_parser("hodge", help="Milnor algebra series and Steenbrink numbers")
    p.add_argument("--weights")
    p.add_argument("--degree", type=int)
    p.add_argument("--exponents")
    p.add_argument("--product-formula", action="store_true")
    p.add_argument("--input", help="JSON document with weights, degree, exponents")
    p.set_defaults(func=cmd_link_hodge)

    p = lsub.add_parser("seifert", help="cohomology of a Seifert 5-manifold")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--ddiv", type=int, default=1)
    p.add_argument("--branch", default="")
    p.set_defaults(func=cmd_link_seifert)

    p = lsub.add_parser("family", help="terminalization bookkeeping for a hypersurface family")
    p.add_argument("--name", choices=["cubic", "quartic", "sextic", "quartic-cubic", "general"])
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--input", help="JSON document with family, k, n")
    p.set_defaults(func=cmd_link_family)

    for sp in (csub, lsub):
        for leaf in sp.choices.values():
            _common(leaf)
    return parser


def run(argv: Sequence[str]) -> tuple[int, dict]:
    """Execute a command line; returns (exit status, report)."""
    argv = list(argv)
    report = {"command": argv, "input_digest": None, "results": None, "warnings": []}
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        report["error"] = {"name": "UsageError", "message": str(exc)}
        return 1, report
    if not args.no_timestamp:
        report["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    try:
        results, digest = args.func(args)
    except UsageError as exc:
        report["error"] = {"name": "UsageError", "message": str(exc)}
        return 1, report
    except GeometryError as exc:
        report["error"] = {"name": exc.name, "message": str(exc)}
        if isinstance(exc, UnresolvedResidual) and exc.report is not None:
            report["results"] = jsonable(exc.report.to_dict())
        return 2, report
    if isinstance(results, dict) and "warnings" in results:
        report["warnings"].extend(results.pop("warnings"))
    report["input_digest"] = digest
    report["results"] = jsonable(results)
    return 0, report


def render(report: dict, as_json: bool) -> str:
    if as_json:
        return json.dumps(report, indent=2, sort_keys=True)
    lines = []
    if "error" in report:
        lines.append(f"error: {report['error']['name']}: {report['error']['message']}")
    if report.get("results") is not None:
        lines.extend(_human(report["results"]))
    for w in report.get("warnings", []):
        lines.append(f"warning: {w}")
    return "\n".join(lines)


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    code, report = run(argv)
    as_json = "--json" in argv
    text = render(report, as_json)
    stream = sys.stderr if code == 1 and not as_json else sys.stdout
    print(text, file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
