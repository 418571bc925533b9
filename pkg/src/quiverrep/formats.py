"""Text formats for quivers (.q), ray-quiver presentations (.rq) and representations (.rep).

All three are section based and whitespace insensitive; ``#`` starts a comment.

.q::

    [vertices]
    a
    b
    [arrows]
    alpha: a -> b

.rq::

    [core.vertices]
    a0
    [core.arrows]
    [ray r]
    orientation = outward
    block = a, b
    intra = g: a -> b
    step = al: a => a
    attach = a @0 -> a0        # inward rays: attach = a0 -> a @0
    label = a: a_{k+1}

.rep::

    [rep]
    quiver = ladder.rq          # path relative to the .rep file
    field = q                   # or fp:7
    window = 4                  # only for ray-quiver windows
    dim a = 2
    mat alpha = [[1, 0; 0, 1/2]]
"""

from __future__ import annotations

import os
import re
from fractions import Fraction

from quiverrep.linalg import Field, Matrix
from quiverrep.quiver_core import Arrow, FiniteQuiver


class FormatError(ValueError):
    """Malformed input file; carries the line number."""

    def __init__(self, msg, line=None, col=None):
        self.line = line
        self.col = col
        where = f"line {line}" if line is not None else ""
        if col is not None:
            where += f", column {col}"
        super().__init__(f"{where}: {msg}" if where else msg)


def _lines(text):
    for no, raw in enumerate(text.splitlines(), 1):
        s = raw.split("#", 1)[0].strip()
        if s:
            yield no, s


_SECTION = re.compile(r"^\[([^\]]+)\]$")
_ARROW = re.compile(r"^([^:\s]+)\s*:\s*(\S+)\s*->\s*(\S+)$")


def _sections(text):
    cur = None
    out = []
    for no, s in _lines(text):
        m = _SECTION.match(s)
        if m:
            cur = [m.group(1).strip(), no, []]
            out.append(cur)
        elif cur is None:
            raise FormatError("content before the first section", no, 1)
        else:
            cur[2].append((no, s))
    return out


def _arrow_line(no, s):
    m = _ARROW.match(s)
    if not m:
        raise FormatError(f"expected 'id: source -> target', got {s!r}", no, 1)
    return Arrow(*m.groups())


# ---------------------------------------------------------------- .q

def parse_quiver(text):
    verts, arrows = [], []
    for name, no, body in _sections(text):
        if name == "vertices":
            for n, s in body:
                verts.extend(x for x in re.split(r"[\s,]+", s) if x)
        elif name == "arrows":
            arrows.extend(_arrow_line(n, s) for n, s in body)
        else:
            raise FormatError(f"unknown section [{name}]", no, 1)
    return FiniteQuiver(verts, arrows)


def dump_quiver(q):
    lines = ["[vertices]"] + list(q.vertices) + ["", "[arrows]"]
    lines += [f"{a.id}: {a.source} -> {a.target}" for a in q.arrows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- .rq

_STEP = re.compile(r"^(?:([^:\s]+)\s*:\s*)?(\S+)\s*=>\s*(\S+)$")
_INTRA = re.compile(r"^(?:([^:\s]+)\s*:\s*)?(\S+)\s*->\s*(\S+)$")
_ATT_OUT = re.compile(r"^(?:([^:\s]+)\s*:\s*)?(\S+)\s*@0\s*->\s*(\S+)$")
_ATT_IN = re.compile(r"^(?:([^:\s]+)\s*:\s*)?(\S+)\s*->\s*(\S+)\s*@0$")


def _fresh(base, used):
    n = 1
    name = base
    while name in used:
        n += 1
        name = f"{base}{n}"
    used.add(name)
    return name


def _parse_ray(rid, no, body):
    from quiverrep.ray_quiver import INWARD, OUTWARD, BlockTemplate, Ray
    orientation = OUTWARD
    block, intra, steps, attach, labels = [], [], [], [], []
    pending = []
    for n, s in body:
        if "=" not in s or s.index("=") == s.find("=>"):
            raise FormatError(f"expected 'key = value', got {s!r}", n, 1)
        key, val = (x.strip() for x in s.split("=", 1))
        if key == "orientation":
            if val not in (OUTWARD, INWARD):
                raise FormatError(f"orientation must be outward or inward, got {val!r}", n, len(key) + 4)
            orientation = val
        elif key == "block":
            block.extend(x for x in re.split(r"[\s,]+", val) if x)
        elif key == "label":
            if ":" not in val:
                raise FormatError("expected 'label = vertex: pattern'", n, 1)
            b, pat = (x.strip() for x in val.split(":", 1))
            labels.append((b, pat))
        elif key in ("intra", "step", "attach"):
            pending.append((key, n, val))
        else:
            raise FormatError(f"unknown key {key!r}", n, 1)
    used = set()
    for key, n, val in pending:
        m = None
        if key == "intra":
            m = _INTRA.match(val)
        elif key == "step":
            m = _STEP.match(val)
        else:
            m = (_ATT_OUT if orientation == OUTWARD else _ATT_IN).match(val)
        if not m:
            shape = {"intra": "id: u -> v", "step": "id: u => v",
                     "attach": "id: u @0 -> core" if orientation == OUTWARD else "id: core -> u @0"}[key]
            raise FormatError(f"expected '{shape}', got {val!r}", n, 1)
        if m.group(1):
            if m.group(1) in used:
                raise FormatError(f"duplicate id {m.group(1)}", n, 1)
            used.add(m.group(1))
    for key, n, val in pending:
        m = (_INTRA if key == "intra" else _STEP if key == "step"
             else _ATT_OUT if orientation == OUTWARD else _ATT_IN).match(val)
        aid = m.group(1) or _fresh(key, used)
        a = Arrow(aid, m.group(2), m.group(3))
        {"intra": intra, "step": steps, "attach": attach}[key].append(a)
    return Ray(rid, BlockTemplate(tuple(block), tuple(intra), tuple(steps), orientation),
               tuple(attach), tuple(labels))


def parse_rayquiver(text, name=""):
    from quiverrep.ray_quiver import RayQuiverPresentation
    verts, arrows, rays = [], [], []
    for sec, no, body in _sections(text):
        if sec == "core.vertices":
            for n, s in body:
                verts.extend(x for x in re.split(r"[\s,]+", s) if x)
        elif sec == "core.arrows":
            arrows.extend(_arrow_line(n, s) for n, s in body)
        elif sec.startswith("ray "):
            rays.append(_parse_ray(sec[4:].strip(), no, body))
        else:
            raise FormatError(f"unknown section [{sec}]", no, 1)
    return RayQuiverPresentation(FiniteQuiver(verts, arrows), rays, name)


def dump_rayquiver(rq):
    lines = ["[core.vertices]"] + list(rq.core.vertices) + ["", "[core.arrows]"]
    lines += [f"{a.id}: {a.source} -> {a.target}" for a in rq.core.arrows]
    for r in rq.rays:
        t = r.template
        lines += ["", f"[ray {r.id}]", f"orientation = {t.orientation}", f"block = {', '.join(t.block)}"]
        lines += [f"intra = {a.id}: {a.source} -> {a.target}" for a in t.intra]
        lines += [f"step = {a.id}: {a.source} => {a.target}" for a in t.steps]
        for a in r.attach:
            if r.outward:
                lines.append(f"attach = {a.id}: {a.source} @0 -> {a.target}")
            else:
                lines.append(f"attach = {a.id}: {a.source} -> {a.target} @0")
        lines += [f"label = {b}: {pat}" for b, pat in r.labels]
    return "\n".join(lines) + "\n"


def load_quiver_file(path):
    """A FiniteQuiver (.q) or a RayQuiverPresentation (.rq), chosen by content."""
    with open(path) as fh:
        text = fh.read()
    if re.search(r"^\s*\[core\.", text, re.M):
        return parse_rayquiver(text, os.path.splitext(os.path.basename(path))[0])
    return parse_quiver(text)


# ---------------------------------------------------------------- .rep

def _parse_matrix(F, s, no):
    s = s.strip()
    if not (s.startswith("[[") and s.endswith("]]")):
        raise FormatError("matrix must look like [[a, b; c, d]]", no, 1)
    body = s[2:-2].strip()
    if not body:
        return []
    rows = []
    for r in body.split(";"):
        entries = [x for x in re.split(r"[\s,]+", r.strip()) if x]
        try:
            rows.append([F(Fraction(e)) for e in entries])
        except (ValueError, ZeroDivisionError):
            raise FormatError(f"bad matrix entry in {r.strip()!r}", no, 1) from None
    return rows


def parse_rep(text, base_dir=".", quiver=None):
    """Returns (quiver object, field, window K or None, dims, matrices)."""
    from quiverrep.linrep import Rep
    from quiverrep.ray_quiver import RayQuiverPresentation, materialize_window
    sections = _sections(text)
    if len(sections) != 1 or sections[0][0] != "rep":
        raise FormatError("expected a single [rep] section", 1, 1)
    F = Field(None)
    K = None
    qpath = None
    dims, raw = {}, {}
    for n, s in sections[0][2]:
        if "=" not in s:
            raise FormatError(f"expected 'key = value', got {s!r}", n, 1)
        key, val = (x.strip() for x in s.split("=", 1))
        if key == "quiver":
            qpath = val
        elif key == "field":
            try:
                F = Field.parse(val)
            except ValueError as e:
                raise FormatError(str(e), n, len(key) + 4) from None
        elif key == "window":
            if not val.isdigit():
                raise FormatError("window must be a nonnegative integer", n, len(key) + 4)
            K = int(val)
        elif key.startswith("dim "):
            if not val.isdigit():
                raise FormatError("dimension must be a nonnegative integer", n, len(key) + 4)
            dims[key[4:].strip()] = int(val)
        elif key.startswith("mat "):
            raw[key[4:].strip()] = (n, val)
        else:
            raise FormatError(f"unknown key {key!r}", n, 1)
    if quiver is None:
        if qpath is None:
            raise FormatError("missing 'quiver = ...'", 1, 1)
        quiver = load_quiver_file(os.path.join(base_dir, qpath))
    rq = None
    if isinstance(quiver, RayQuiverPresentation):
        rq = quiver
        if K is None:
            raise FormatError("representations on a ray quiver need 'window = K'", 1, 1)
        win = materialize_window(rq, K)
        q = win.quiver
    else:
        win = None
        q = quiver
    for v in dims:
        if v not in q:
            raise FormatError(f"unknown vertex {v!r}", None)
    dimv = {v: dims.get(v, 0) for v in q.vertices}
    mats = {}
    for a in q.arrows:
        m, nn = dimv[a.target], dimv[a.source]
        if a.id in raw:
            no, val = raw[a.id]
            rows = _parse_matrix(F, val, no)
            if len(rows) != m or any(len(r) != nn for r in rows):
                if not (m == 0 or nn == 0) or rows:
                    raise FormatError(f"matrix {a.id} must be {m}x{nn}", no, 1)
                rows = [[F.zero] * nn for _ in range(m)]
            mats[a.id] = Matrix(F, m, nn, rows)
        else:
            mats[a.id] = Matrix.zero(F, m, nn)
    for aid in raw:
        if not q.has_arrow(aid):
            raise FormatError(f"unknown arrow {aid!r}", raw[aid][0], 1)
    M = Rep(q, F, dimv, mats, window=win)
    return rq if rq is not None else q, M


def load_rep_file(path, quiver=None):
    with open(path) as fh:
        text = fh.read()
    return parse_rep(text, os.path.dirname(os.path.abspath(path)), quiver)


def _fmt(x):
    return str(x)


def dump_rep(M, quiver_ref="", field_name=None):
    lines = ["[rep]"]
    if quiver_ref:
        lines.append(f"quiver = {quiver_ref}")
    lines.append(f"field = {field_name or repr(M.field)}")
    if M.window is not None:
        lines.append(f"window = {M.window.K}")
    for v in M.quiver.vertices:
        if M.dims[v]:
            lines.append(f"dim {v} = {M.dims[v]}")
    for a in M.quiver.arrows:
        mat = M.mats[a.id]
        if mat.nrows and mat.ncols and not mat.is_zero():
            body = "; ".join(", ".join(_fmt(x) for x in row) for row in mat.rows)
            lines.append(f"mat {a.id} = [[{body}]]")
    return "\n".join(lines) + "\n"
