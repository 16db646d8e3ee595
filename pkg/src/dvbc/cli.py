"""``dvbc`` command-line tool.

Exit status: 0 on success or when every check passes, 1 when a check fails
or trivialization is obstructed, 2 on usage, I/O or document errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Callable

import numpy as np

from dvbc import analysis
from dvbc.bundle import apply_gauge, check_involution, is_metric_compatible, pullback_bundle
from dvbc.cochain import (
    ALPHA_FIRST,
    W_FIRST,
    HomCochain,
    ScalarCochain,
    VBCochain,
    cup,
    curvature,
    d_nabla,
    d_nabla_hom,
    d_scalar,
    hom_action,
    pullback_cochain,
    pullback_scalar,
    wedge,
)
from dvbc.complex import SimplicialMap, check_simplicial_map
from dvbc.document import Document, DocumentError, parse, serialize
from dvbc.fixtures import random_cochain, random_hom_cochain, random_scalar_cochain
from dvbc.tolerance import Tolerance, max_abs

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class Outcome:
    name: str
    status: str  # pass | fail | skip
    residual: float = 0.0
    detail: str = ""


def _compare(lhs, rhs, tol: Tolerance) -> tuple[bool, float]:
    ok, worst = True, 0.0
    for key in lhs.keys():
        a, b = np.asarray(lhs[key]), np.asarray(rhs[key])
        worst = max(worst, max_abs(a - b))
        ok = ok and tol.close(a, b)
    return ok, worst


def _degree_pairs(top: int):
    return [(k, l) for k in range(top) for l in range(top - k)]


def check_suite(doc: Document, tol: Tolerance, seed: int) -> list[Outcome]:
    """Identity checks on the document's bundle with seeded random cochains."""
    E = doc.bundle
    X = E.base
    out = []

    def run(name: str, pairs, make: Callable[[int, int, int], tuple]):
        if not pairs:
            out.append(Outcome(name, "skip", detail=f"complex dimension {X.dim} too small"))
            return
        ok, worst, where = True, 0.0, ""
        for idx, (k, l) in enumerate(pairs):
            lhs, rhs = make(k, l, seed + 10 * idx)
            good, r = _compare(lhs, rhs, tol)
            if not good and ok:
                where = f"degrees ({k}, {l})"
            ok, worst = ok and good, max(worst, r)
        out.append(Outcome(name, "pass" if ok else "fail", worst, where))

    inv = check_involution(E, tol)
    out.append(Outcome("involution", "pass" if inv else "fail", inv.residual,
                       "" if inv else f"edge {list(inv.where)}"))

    def sections(k, l, s):
        f = random_scalar_cochain(X, 0, s)
        sec = random_cochain(E, 0, s + 1)
        lhs = d_nabla(wedge(sec, f, W_FIRST))
        rhs = wedge(sec, d_scalar(f), W_FIRST) + wedge(d_nabla(sec), f, W_FIRST)
        return lhs, rhs

    def cup_rule(k, l, s):
        a, w = random_cochain(E, k, s), random_scalar_cochain(X, l, s + 1)
        return d_nabla(cup(a, w)), cup(d_nabla(a), w) + (-1) ** k * cup(a, d_scalar(w))

    def wedge_rule(k, l, s):
        a, w = random_cochain(E, k, s), random_scalar_cochain(X, l, s + 1)
        return d_nabla(wedge(a, w)), wedge(d_nabla(a), w) + (-1) ** k * wedge(a, d_scalar(w))

    def hom_rule(k, l, s):
        A, a = random_hom_cochain(E, k, s), random_cochain(E, l, s + 1)
        lhs = d_nabla(hom_action(A, a))
        rhs = hom_action(d_nabla_hom(A), a) + (-1) ** k * hom_action(A, d_nabla(a))
        return lhs, rhs

    def squared(k, l, s):
        a = random_cochain(E, k, s)
        return d_nabla(d_nabla(a)), hom_action(curvature(E), a)

    def bianchi(k, l, s):
        dF = d_nabla_hom(curvature(E))
        return dF, HomCochain(E, 3, {t: np.zeros_like(dF[t]) for t in dF.keys()})

    run("leibniz_sections", [(0, 0)] if X.dim >= 1 else [], sections)
    run("leibniz_cup", _degree_pairs(X.dim), cup_rule)
    run("leibniz_wedge", _degree_pairs(X.dim), wedge_rule)
    if out[-1].status == "fail" and not analysis.is_flat(E, tol).flat:
        out[-1].detail += "; connection is not flat"
    run("leibniz_hom", _degree_pairs(X.dim), hom_rule)
    run("dnabla_squared", [(k, 0) for k in (0, 1) if k + 2 <= X.dim], squared)
    run("bianchi", [(2, 0)] if X.dim >= 3 else [], bianchi)
    if doc.metric is not None:
        m = is_metric_compatible(E, doc.metric, tol)
        out.append(Outcome("metric_compatible", "pass" if m else "fail", m.residual,
                           "" if m else f"edge {list(m.where)}"))
    if doc.gauge is not None:
        G = apply_gauge(E, doc.gauge)
        worst = max((max_abs(G.stored[e] - np.eye(G.stored[e].shape[0])) for e in G.edges()), default=0.0)
        ok = all(G.stored[e].shape[0] == G.stored[e].shape[1] and tol.close(G.stored[e], np.eye(G.stored[e].shape[0]))
                 for e in G.edges())
        out.append(Outcome("gauge_trivializes", "pass" if ok else "fail", worst))
    return out


# -- plumbing ----------------------------------------------------------------


def _load(path: str) -> Document:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None
    try:
        return parse(text)
    except DocumentError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _need_bundle(doc: Document, path: str) -> None:
    if doc.bundle is None:
        raise UsageError(f"{path}: document has no bundle section")


def _cochain(doc: Document, name: str):
    if name not in doc.cochains:
        raise UsageError(f"no cochain named {name!r}")
    return doc.cochains[name]


class Reporter:
    def __init__(self, args):
        self.as_json = args.json
        self.doc_to_stdout = False
        self.lines: list[str] = []
        self.data: dict = {"command": args.command}

    def line(self, text: str) -> None:
        self.lines.append(text)

    def flush(self, status: int) -> None:
        stream = sys.stderr if self.doc_to_stdout else sys.stdout
        if self.as_json:
            self.data["exit_status"] = status
            stream.write(json.dumps(self.data, sort_keys=True) + "\n")
        else:
            for ln in self.lines:
                stream.write(ln + "\n")


def _write_doc(doc: Document, args, rep: Reporter) -> None:
    text = serialize(doc)
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"{args.output}: {exc.strerror}") from None
    else:
        rep.doc_to_stdout = True
        sys.stdout.write(text)


def _tol(args) -> Tolerance:
    try:
        return Tolerance(args.tol_abs, args.tol_rel)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- commands ----------------------------------------------------------------


def cmd_check(args, rep: Reporter) -> int:
    doc = _load(args.file)
    _need_bundle(doc, args.file)
    results = check_suite(doc, _tol(args), args.seed)
    failed = [r for r in results if r.status == "fail"]
    for r in results:
        extra = f"  ({r.detail})" if r.detail else ""
        res = "" if r.status == "skip" else f"  max residual {r.residual:.3e}"
        rep.line(f"{r.status.upper():4}  {r.name}{res}{extra}")
    rep.data["checks"] = [r.__dict__ for r in results]
    rep.data["passed"] = not failed
    return EXIT_FAIL if failed else EXIT_OK


def cmd_curvature(args, rep: Reporter) -> int:
    doc = _load(args.file)
    _need_bundle(doc, args.file)
    F = curvature(doc.bundle)
    doc.cochains[args.name] = F
    worst = max((max_abs(F[t]) for t in F.keys()), default=0.0)
    rep.line(f"curvature stored as {args.name!r}; max |F| = {worst:.3e} over {len(F.keys())} triangles")
    rep.data.update(name=args.name, max_abs=worst)
    _write_doc(doc, args, rep)
    return EXIT_OK


def cmd_flat(args, rep: Reporter) -> int:
    doc = _load(args.file)
    _need_bundle(doc, args.file)
    report = analysis.is_flat(doc.bundle, _tol(args))
    if report.flat:
        rep.line("flat: holonomy is the identity around every triangle")
    else:
        rep.line(f"not flat: triangle {list(report.witness)} has max |hol - I| = {report.residual:.3e}")
    rep.data.update(flat=report.flat, witness=list(report.witness) if report.witness else None,
                    residual=report.residual)
    return EXIT_OK if report.flat else EXIT_FAIL


def cmd_trivialize(args, rep: Reporter) -> int:
    doc = _load(args.file)
    _need_bundle(doc, args.file)
    result = analysis.trivialize(doc.bundle, _tol(args))
    if not result.ok:
        ob = result.obstruction
        rep.line(f"obstruction {ob.describe()}")
        rep.data["obstruction"] = {"kind": ob.kind, "where": list(ob.where), "residual": ob.residual}
        return EXIT_FAIL
    doc.gauge = result.gauge
    rep.line("trivializable: gauge section written")
    rep.data["trivializable"] = True
    _write_doc(doc, args, rep)
    return EXIT_OK


def cmd_parallel_sections(args, rep: Reporter) -> int:
    doc = _load(args.file)
    _need_bundle(doc, args.file)
    basis = analysis.parallel_sections(doc.bundle, _tol(args))
    for n, s in enumerate(basis.sections):
        doc.cochains[f"{args.prefix}{n}"] = s
    rep.line(f"parallel sections: dimension {basis.dimension}")
    rep.data["dimension"] = basis.dimension
    _write_doc(doc, args, rep)
    return EXIT_OK


def cmd_dnabla(args, rep: Reporter) -> int:
    doc = _load(args.file)
    c = _cochain(doc, args.cochain)
    if isinstance(c, ScalarCochain):
        result = d_scalar(c)
    elif isinstance(c, VBCochain):
        result = d_nabla(c)
    else:
        result = d_nabla_hom(c)
    name = args.name or f"d_{args.cochain}"
    doc.cochains[name] = result
    rep.line(f"derivative of {args.cochain!r} stored as {name!r} (degree {result.degree})")
    rep.data.update(name=name, degree=result.degree)
    _write_doc(doc, args, rep)
    return EXIT_OK


def cmd_wedge(args, rep: Reporter) -> int:
    doc = _load(args.file)
    a, w = _cochain(doc, args.alpha), _cochain(doc, args.w)
    if not isinstance(a, VBCochain) or not isinstance(w, ScalarCochain):
        raise UsageError("wedge needs a vector cochain and a scalar cochain")
    order = W_FIRST if args.w_first else ALPHA_FIRST
    result = wedge(a, w, order)
    name = args.name or f"{args.alpha}^{args.w}"
    doc.cochains[name] = result
    rep.line(f"wedge stored as {name!r} (degree {result.degree}, {order})")
    rep.data.update(name=name, degree=result.degree, order=order)
    _write_doc(doc, args, rep)
    return EXIT_OK


def _parse_map(text: str) -> dict[int, int]:
    out = {}
    try:
        for part in text.split(","):
            src, dst = part.split(":")
            out[int(src)] = int(dst)
    except ValueError:
        raise UsageError(f"bad --map {text!r}; expected pairs like 0:0,1:1,3:0") from None
    return out


def cmd_pullback(args, rep: Reporter) -> int:
    dom, cod = _load(args.domain), _load(args.codomain)
    if dom.complex is None:
        raise UsageError(f"{args.domain}: document has no complex section")
    _need_bundle(cod, args.codomain)
    vmap = _parse_map(args.map)
    if set(vmap) != set(dom.complex.vertices):
        raise UsageError("--map must assign every domain vertex exactly once")
    if not set(vmap.values()) <= set(cod.complex.vertices):
        raise UsageError("--map sends a vertex outside the codomain")
    f = SimplicialMap(dom.complex, cod.complex, vmap)
    chk = check_simplicial_map(f)
    if not chk:
        raise UsageError(f"--map is not simplicial: simplex {list(chk.where)} has no image simplex")
    P = pullback_bundle(f, cod.bundle)
    out = Document(complex=dom.complex, bundle=P)
    for name, c in sorted(cod.cochains.items()):
        if isinstance(c, ScalarCochain):
            out.cochains[name] = pullback_scalar(f, c)
        elif isinstance(c, VBCochain):
            out.cochains[name] = pullback_cochain(f, c, P)
    rep.line(f"pulled back bundle and {len(out.cochains)} cochains along the map")
    rep.data["cochains"] = sorted(out.cochains)
    _write_doc(out, args, rep)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dvbc", description="Discrete vector bundles with connection.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-abs", type=float, default=1e-9)
    common.add_argument("--tol-rel", type=float, default=1e-9)
    common.add_argument("--seed", type=int, default=0, help="seed for random test cochains")
    common.add_argument("--json", action="store_true", help="machine-readable report")
    common.add_argument("-o", "--output", help="write the resulting document here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", parents=[common], help="run the identity checks")
    s.add_argument("file")
    s.set_defaults(func=cmd_check)
    s = sub.add_parser("curvature", parents=[common], help="add the curvature cochain")
    s.add_argument("file")
    s.add_argument("--name", default="F")
    s.set_defaults(func=cmd_curvature)
    s = sub.add_parser("flat", parents=[common], help="test flatness")
    s.add_argument("file")
    s.set_defaults(func=cmd_flat)
    s = sub.add_parser("trivialize", parents=[common], help="find a trivializing gauge")
    s.add_argument("file")
    s.set_defaults(func=cmd_trivialize)
    s = sub.add_parser("parallel-sections", parents=[common], help="add a basis of parallel sections")
    s.add_argument("file")
    s.add_argument("--prefix", default="parallel_")
    s.set_defaults(func=cmd_parallel_sections)
    s = sub.add_parser("dnabla", parents=[common], help="add the exterior covariant derivative of a cochain")
    s.add_argument("file")
    s.add_argument("cochain")
    s.add_argument("--name")
    s.set_defaults(func=cmd_dnabla)
    s = sub.add_parser("wedge", parents=[common], help="add the wedge of a vector and a scalar cochain")
    s.add_argument("file")
    s.add_argument("alpha")
    s.add_argument("w")
    s.add_argument("--w-first", action="store_true", help="put the scalar factor first")
    s.add_argument("--name")
    s.set_defaults(func=cmd_wedge)
    s = sub.add_parser("pullback", parents=[common], help="pull a bundle and its cochains back along a vertex map")
    s.add_argument("domain")
    s.add_argument("codomain")
    s.add_argument("--map", required=True, help="vertex map as src:dst pairs, e.g. 0:0,1:1,2:2,3:0")
    s.set_defaults(func=cmd_pullback)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    rep = Reporter(args)
    try:
        status = args.func(args, rep)
    except (UsageError, ValueError) as exc:
        # Library errors (bad degrees, shapes, non-simplicial maps) are input errors too.
        sys.stderr.write(f"dvbc {args.command}: error: {exc}\n")
        return EXIT_USAGE
    rep.flush(status)
    return status


if __name__ == "__main__":
    sys.exit(main())
