import os
import random
from importlib.resources import files

import pytest

from quiverrep.formats import load_quiver_file
from quiverrep.linalg import Field, Matrix
from quiverrep.linrep import Rep
from quiverrep.quiver_core import Arrow, FiniteQuiver

CORPUS = str(files("quiverrep") / "corpus")

F7 = Field(7)


def corpus(name):
    return load_quiver_file(os.path.join(CORPUS, name))


def corpus_path(name):
    return os.path.join(CORPUS, name)


def random_acyclic(rng, n, m, multi=True):
    """n vertices, about m arrows, all pointing from smaller to larger index."""
    verts = [f"v{i}" for i in range(n)]
    arrows = []
    for k in range(m):
        if n < 2:
            break
        i, j = sorted(rng.sample(range(n), 2))
        if not multi and any(a.source == verts[i] and a.target == verts[j] for a in arrows):
            continue
        arrows.append(Arrow(f"x{k}", verts[i], verts[j]))
    # shuffle vertex order so topological order is not the listed order
    rng.shuffle(verts)
    return FiniteQuiver(verts, arrows)


def random_rep(q, F, rng, maxdim=3, density=1.0):
    dims = {v: rng.randint(0, maxdim) for v in q.vertices}
    mats = {a.id: Matrix.random(F, dims[a.target], dims[a.source], rng, density) for a in q.arrows}
    return Rep(q, F, dims, mats)


@pytest.fixture
def rng():
    return random.Random(12345)


def random_presentation(rng, max_block=3, max_rays=2):
    """Random valid ray-quiver presentation with small blocks."""
    from quiverrep.ray_quiver import INWARD, OUTWARD, BlockTemplate, Ray, RayQuiverPresentation
    core = random_acyclic(rng, rng.randint(1, 3), rng.randint(0, 2))
    rays = []
    for r in range(rng.randint(1, max_rays)):
        n = rng.randint(1, max_block)
        B = [f"b{i}" for i in range(n)]
        intra = [Arrow(f"g{k}", B[i], B[j]) for k, (i, j) in enumerate(
            sorted(rng.sample(range(n), 2)) for _ in range(rng.randint(0, n - 1)) if n > 1)]
        steps = [Arrow(f"s{k}", rng.choice(B), rng.choice(B)) for k in range(rng.randint(1, n + 1))]
        orient = OUTWARD if rng.random() < 0.7 else INWARD
        att = []
        for k in range(rng.randint(1, 2)):
            b, c = rng.choice(B), rng.choice(core.vertices)
            att.append(Arrow(f"t{k}", b, c) if orient == OUTWARD else Arrow(f"t{k}", c, b))
        rays.append(Ray(f"r{r}", BlockTemplate(tuple(B), tuple(intra), tuple(steps), orient), tuple(att)))
    return RayQuiverPresentation(core, rays, "random")


# one PASS/FAIL line per acceptance criterion, printed in the terminal summary
_criteria = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance" not in report.nodeid or not name.startswith("test_criterion_"):
        return
    num = int(name.split("_")[2])
    if report.when == "call" or report.failed:
        _criteria[num] = _criteria.get(num, True) and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if _criteria[num] else 'FAIL'}")
