"""Command line front end.

    quiverrep count ladder.rq --from a_5 --to a_0
    quiverrep uif ainfinf.rq --class "(step)"
    quiverrep classify ainfinf.rq xrep.rep --window 8 --seed 7

Exit codes: 0 success (a NotProjective verdict is a result, not a failure),
1 refusal by the library (NotUIF, NeedsLargerWindow, ...), 2 bad input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction

from quiverrep import __version__
from quiverrep.classify import (
    DecompositionFailure, classify_injective, classify_projective, decompose, flat_witness_chain,
    has_enough_projectives,
)
from quiverrep.formats import FormatError, dump_rep, load_quiver_file, load_rep_file
from quiverrep.limits import NoFactorization
from quiverrep.linalg import Field
from quiverrep.linrep import (
    EventuallyPeriodicRep, RepError, TruncationError, arrow_injectivity, boundary_flags, hom_space,
    hom_space_stable, radical, restrict, socle,
)
from quiverrep.quiver_core import (
    CycleError, QuiverError, count_paths, enumerate_paths, enumerate_paths_bounded, has_oriented_cycle,
    validate,
)
from quiverrep.ray_quiver import (
    NeedsLargerWindow, NotUIF, RayQuiverPresentation, class_size, is_uif_class, is_uif_hull,
    list_classes_through, materialize_window, parse_raypath, path_count_ext, stabilization_index,
    validate_presentation,
)

SCHEMA = 1

# refusals exit with 1; TruncationError must be tested before QuiverError
REFUSALS = (NotUIF, NeedsLargerWindow, NoFactorization, DecompositionFailure, TruncationError)
INPUT_ERRORS = (FormatError, CycleError, QuiverError, RepError, ValueError, KeyError, OSError)


# ---------------------------------------------------------------- reports

def _exact(x):
    """Numbers as exact strings, containers recursively; bools and None unchanged."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, (int, Fraction)):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _exact(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_exact(v) for v in x]
    return str(x)


def _text_lines(obj, indent=""):
    out = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            v = obj[k]
            if isinstance(v, (dict, list)) and v:
                out.append(f"{indent}{k}:")
                out.extend(_text_lines(v, indent + "  "))
            else:
                out.append(f"{indent}{k}: {_scalar(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)) and v:
                out.append(f"{indent}-")
                out.extend(_text_lines(v, indent + "  "))
            else:
                out.append(f"{indent}- {_scalar(v)}")
    else:
        out.append(f"{indent}{_scalar(obj)}")
    return out


def _scalar(v):
    if v is True:
        return "true"
    if v is False:
        return "false"
    if v is None:
        return "none"
    if v == {} or v == []:
        return "[]" if v == [] else "{}"
    return str(v)


def emit_report(report, fmt="text"):
    """Serialize a report (numbers as exact strings, stable key order) to bytes."""
    data = _exact(report)
    if fmt == "json":
        return (json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode()
    if fmt == "text":
        return ("\n".join(_text_lines(data)) + "\n").encode() if data else b""
    raise ValueError(f"unknown format {fmt!r}")


def _digest(paths):
    out = {}
    for p in paths:
        with open(p, "rb") as fh:
            out[os.path.basename(p)] = hashlib.sha256(fh.read()).hexdigest()
    return out


# ---------------------------------------------------------------- loading

def _load(path):
    return load_quiver_file(path)


def _need_rq(q, cmd):
    if not isinstance(q, RayQuiverPresentation):
        raise ValueError(f"{cmd} needs a ray-quiver presentation (.rq)")
    return q


def _vertex(q, name):
    if isinstance(q, RayQuiverPresentation):
        return q.resolve(name)
    if name not in q:
        raise QuiverError(f"unknown vertex {name!r}")
    return name


def _vname(q, x):
    return q.label(x) if isinstance(q, RayQuiverPresentation) else x


def _load_rep(q, path, args, ctx):
    """(window rep wrapped as EventuallyPeriodicRep or plain Rep) adjusted to --window."""
    _, M = load_rep_file(path, q)
    if isinstance(q, RayQuiverPresentation):
        F = Field.parse(args.field) if args.field_given else M.field
        if F != M.field:
            raise ValueError(f"rep file uses field {M.field!r}, --field asks for {F!r}")
        E = EventuallyPeriodicRep.infer(M)
        K = args.window
        if K > E.K:
            E = E.extend(K)
            ctx["certificates"]["extended_from"] = M.window.K
        elif K < E.K:
            small = restrict(M, materialize_window(q, K))
            E = EventuallyPeriodicRep.infer(small)
            ctx["warnings"].append(f"rep restricted from window {M.window.K} to {K}")
        ctx["certificates"]["window_K"] = E.K
        ctx["certificates"]["period"] = E.period
        if E.period is None:
            ctx["warnings"].append("no certified depth period; window read literally")
        return E
    return M


def _rep_of(M):
    return M.rep if isinstance(M, EventuallyPeriodicRep) else M


def _names(M, q):
    """Human vertex names for a rep (labels on windows)."""
    win = M.window
    if win is None:
        return {v: v for v in M.quiver.vertices}
    return {v: q.label(win.from_name[v]) for v in M.quiver.vertices}


def _dims(M, q):
    nm = _names(M, q)
    return {nm[v]: M.dims[v] for v in M.quiver.vertices if M.dims[v]}


# ---------------------------------------------------------------- commands

def cmd_validate(q, args, ctx):
    if isinstance(q, RayQuiverPresentation):
        defects = validate_presentation(q)
        kind = "rayquiver"
    else:
        defects = list(validate(q))
        if not defects and has_oriented_cycle(q):
            defects.append("oriented cycle")
        kind = "quiver"
    res = {"kind": kind, "valid": not defects, "defects": defects}
    if defects:
        ctx["exit"] = 2
    return res


def cmd_paths(q, args, ctx):
    a, b = _vertex(q, args.src), _vertex(q, args.dst)
    if isinstance(q, RayQuiverPresentation):
        K = max(args.window, a.depth, b.depth)
        win = materialize_window(q, K)
        fq, a, b = win.quiver, a.name(), b.name()
        if a not in fq or b not in fq:
            raise ValueError("both vertices must lie in the window")
        ctx["certificates"]["window_K"] = K
        paths = enumerate_paths(fq, a, b)
    elif args.max_len is not None:
        paths = enumerate_paths_bounded(q, a, b, args.max_len)
    else:
        paths = enumerate_paths(q, a, b)
    return {"paths": [p.render() for p in paths], "count": len(paths)}


def cmd_count(q, args, ctx):
    a, b = _vertex(q, args.src), _vertex(q, args.dst)
    if isinstance(q, RayQuiverPresentation):
        return {"count": path_count_ext(q, a, b)}
    return {"count": count_paths(q, a, b)}


def cmd_uif(q, args, ctx):
    rq = _need_rq(q, "uif")
    p = parse_raypath(rq, args.cls)
    return {"class": args.cls, "uif_hull": is_uif_hull(rq, p), "uif_class": is_uif_class(rq, p)}


def cmd_classes(q, args, ctx):
    rq = _need_rq(q, "classes")
    a = rq.resolve(args.through)
    listing = list_classes_through(rq, a, args.bound)
    if not listing.complete:
        ctx["warnings"].append("class search incomplete: more classes exist than listed")
    out = []
    for c in listing.classes:
        s = class_size(rq, c, a)
        out.append({"class": c.key_literal(), "size": s.value if s.finite else "unbounded",
                    "uif_hull": is_uif_hull(rq, c)})
    return {"through": args.through, "classes": out, "complete": listing.complete}


def cmd_stab_index(q, args, ctx):
    rq = _need_rq(q, "stab-index")
    p = parse_raypath(rq, args.cls)
    return {"class": args.cls, "stabilization_index": stabilization_index(rq, p)}


def cmd_rep_analyze(q, args, ctx):
    E = _load_rep(q, args.rep, args, ctx)
    M = _rep_of(E)
    nm = _names(M, q)
    ok, bad = arrow_injectivity(M)
    R, S = radical(M), socle(M)
    res = {
        "dims": _dims(M, q),
        "total_dim": M.total_dim(),
        "radical_dims": {nm[v]: n for v, n in R.dims().items() if n},
        "socle_dims": {nm[v]: n for v, n in S.dims().items() if n},
        "top_dims": {nm[v]: M.dims[v] - len(R.spaces[v]) for v in M.quiver.vertices
                     if M.dims[v] - len(R.spaces[v])},
        "arrows_injective": ok,
        "non_injective_arrow": bad,
        "boundary_flags": [nm[v] for v in boundary_flags(M)],
        "basis_labels": {nm[v]: M.label_strings(v) for v in M.quiver.vertices if M.label_strings(v)},
    }
    if M.window is not None and any(M.dims[v] for v in M.boundary()):
        ctx["warnings"].append("fibres at the window boundary may be approximate")
    return res


def cmd_hom(q, args, ctx):
    E1 = _load_rep(q, args.rep, args, ctx)
    E2 = _load_rep(q, args.rep2, args, ctx)
    if isinstance(E1, EventuallyPeriodicRep):
        if E1.period is not None and E2.period is not None:
            st = hom_space_stable(E1, E2, args.max_window)
            ctx["certificates"]["stable_window"] = st.K
            ctx["certificates"]["profile"] = st.profile
            return {"hom_dim": st.dim, "stable": True}
        ctx["warnings"].append("Hom computed on the window only")
        return {"hom_dim": len(hom_space(E1.rep, E2.rep)), "stable": False}
    return {"hom_dim": len(hom_space(E1, E2))}


def cmd_decompose(q, args, ctx):
    M = _rep_of(_load_rep(q, args.rep, args, ctx))
    res = decompose(M, args.seed)
    ctx["certificates"]["seed"] = args.seed
    ctx["certificates"]["end_local"] = [
        {"end_dim": c.end_dim, "tested": c.tested, "certain": c.certain} for c in res.certificates]
    return {"summands": [_dims(p.rep, q) for p in res.pieces], "count": len(res.pieces)}


def _verdict_dict(v):
    return {
        "verdict": ("Projective" if v.kind == "projective" else "Injective") if v.projective
        else ("NotProjective" if v.kind == "projective" else "NotInjective"),
        "summary": str(v),
        "summands": [{"kind": s.kind, "label": s.name, "multiplicity": s.multiplicity}
                     for s in v.summands],
        "reason": v.reason,
        "witness": v.witness,
        "window_K": v.window_K,
        "seed": v.seed,
    }


def cmd_classify(q, args, ctx):
    _need_rq(q, "classify")
    E = _load_rep(q, args.rep, args, ctx)
    v = classify_injective(E, args.seed) if args.injective else classify_projective(E, args.seed)
    ctx["warnings"].extend(v.notes)
    return _verdict_dict(v)


def cmd_enough_proj(q, args, ctx):
    rq = _need_rq(q, "enough-proj")
    ok, w = has_enough_projectives(rq)
    return {"enough_projectives": ok, "witness": rq.label(w) if w is not None else None}


def cmd_flat_witness(q, args, ctx):
    rq = _need_rq(q, "flat-witness")
    p = parse_raypath(rq, args.cls)
    F = Field.parse(args.field)
    fw = flat_witness_chain(rq, p, args.window, F)
    ctx["certificates"]["window_K"] = args.window
    res = {
        "class": args.cls,
        "chain": [rq.label(x) for x in fw.vertices],
        "injective": fw.injective,
        "colimit_dims": _dims_from(fw.colimit_dims, fw.X, rq),
        "x_dims": _dims(fw.X, rq),
        "matches_x": fw.matches_X,
    }
    if args.emit_rep:
        ref = os.path.relpath(os.path.abspath(args.file), os.path.dirname(os.path.abspath(args.emit_rep)))
        with open(args.emit_rep, "w") as fh:
            fh.write(dump_rep(fw.X, ref))
        res["emitted"] = os.path.basename(args.emit_rep)
    return res


def _dims_from(d, M, q):
    nm = _names(M, q)
    return {nm[v]: n for v, n in d.items() if n}


COMMANDS = {
    "validate": (cmd_validate, []),
    "paths": (cmd_paths, ["from", "to"]),
    "count": (cmd_count, ["from", "to"]),
    "uif": (cmd_uif, ["class"]),
    "classes": (cmd_classes, ["through"]),
    "stab-index": (cmd_stab_index, ["class"]),
    "rep-analyze": (cmd_rep_analyze, ["rep"]),
    "hom": (cmd_hom, ["rep", "rep2"]),
    "decompose": (cmd_decompose, ["rep"]),
    "classify": (cmd_classify, ["rep"]),
    "enough-proj": (cmd_enough_proj, []),
    "flat-witness": (cmd_flat_witness, ["class"]),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValueError(message)


def build_parser():
    ap = _Parser(prog="quiverrep", description="Exact computations with interval-finite quivers.")
    ap.add_argument("--version", action="version", version=f"quiverrep {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, needs) in COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("file", help="quiver (.q) or ray-quiver (.rq) file")
        if "rep" in needs:
            p.add_argument("rep", help="representation (.rep) file")
        if "rep2" in needs:
            p.add_argument("rep2", help="second representation (.rep) file")
        if "from" in needs:
            p.add_argument("--from", dest="src", required=True)
            p.add_argument("--to", dest="dst", required=True)
        if "class" in needs:
            p.add_argument("--class", dest="cls", required=True, help="ray path literal")
        if "through" in needs:
            p.add_argument("--through", required=True)
            p.add_argument("--bound", type=int, default=6, help="longest period word to search")
        if name == "paths":
            p.add_argument("--max-len", type=int, default=None)
        if name == "classify":
            p.add_argument("--injective", action="store_true")
        if name == "flat-witness":
            p.add_argument("--emit-rep", default=None, help="write the X window as a .rep file")
        p.add_argument("--window", type=int, default=8)
        p.add_argument("--field", default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=["text", "json"], default="text")
        p.add_argument("--max-window", type=int, default=64)
    return ap


def run(argv, out=None):
    """Run one command; writes the report to out (stdout) and returns the exit code."""
    out = out or sys.stdout.buffer
    fmt = "json" if "--format" in argv and "json" in argv else "text"
    report = {"schema": SCHEMA, "command": argv[:1], "results": {}, "certificates": {}, "warnings": []}
    try:
        args = build_parser().parse_args(argv)
        fmt = args.format
        args.field_given = args.field is not None
        args.field = args.field or "q"
        Field.parse(args.field)
        if args.window < 0 or args.seed < 0:
            raise ValueError("--window and --seed must be nonnegative")
        report["command"] = [args.command] + [a for a in argv if a != args.command]
        files = [args.file] + [getattr(args, k) for k in ("rep", "rep2") if getattr(args, k, None)]
        report["inputs"] = _digest(files)
        q = _load(args.file)
        ctx = {"certificates": report["certificates"], "warnings": report["warnings"], "exit": 0}
        fn = COMMANDS[args.command][0]
        report["results"] = fn(q, args, ctx)
        code = ctx["exit"]
    except REFUSALS as e:
        report["error"] = {"name": type(e).__name__, "message": str(e),
                           "witness": getattr(e, "level", None)}
        code = 1
    except INPUT_ERRORS as e:
        err = {"name": type(e).__name__, "message": str(e)}
        if isinstance(e, FormatError):
            err["line"], err["col"] = e.line, e.col
        report["error"] = err
        code = 2
    out.write(emit_report(report, fmt))
    out.flush()
    return code


def main(argv=None):
    sys.exit(run(sys.argv[1:] if argv is None else list(argv)))


if __name__ == "__main__":
    main()
