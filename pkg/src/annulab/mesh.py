"""Structured triangulations of the eccentric annulus.

The annulus is concentricized by a Mobius map, meshed with a log-polar
grid there, and pulled back.  Since Mobius maps send circles to circles,
boundary nodes land on the true chart circles.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GeometryError
from .geometry import ALG_TOL, AnnulusSpec, Circle2D, geodesic_ball_to_disk, mobius_concentricize

MAX_LEVEL = 8
QUALITY_FLOOR = 0.05


def grid_shape(level: int) -> tuple[int, int]:
    """``(n_r, n_theta)`` cell counts for a refinement level."""
    return 8 * 2**level, 32 * 2**level


@dataclass(frozen=True, eq=False)
class TriMesh:
    nodes: np.ndarray  # (N, 2)
    triangles: np.ndarray  # (T, 3), counterclockwise
    inner_boundary: np.ndarray  # ordered loop, counterclockwise
    outer_boundary: np.ndarray
    refinement_level: int = 0
    inner_circle: Circle2D | None = None
    outer_circle: Circle2D | None = None

    def __post_init__(self):
        for name in ("nodes", "triangles", "inner_boundary", "outer_boundary"):
            arr = getattr(self, name)
            arr.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def boundary_nodes(self) -> np.ndarray:
        return np.concatenate([self.inner_boundary, self.outer_boundary])

    def edges(self) -> np.ndarray:
        """Unique undirected edges, sorted, shape ``(E, 2)``."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    def max_edge_length(self) -> float:
        e = self.edges()
        return float(np.max(np.linalg.norm(self.nodes[e[:, 0]] - self.nodes[e[:, 1]], axis=1)))

    def signed_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def stats(self) -> dict:
        return {
            "level": self.refinement_level,
            "nodes": self.n_nodes,
            "triangles": self.n_triangles,
            "inner_nodes": int(self.inner_boundary.size),
            "outer_nodes": int(self.outer_boundary.size),
            "h_max": self.max_edge_length(),
        }


def _snap(points: np.ndarray, circle: Circle2D) -> np.ndarray:
    d = points - np.array([circle.center, 0.0])
    return np.array([circle.center, 0.0]) + circle.radius * d / np.linalg.norm(d, axis=1)[:, None]


def build_annulus_mesh(spec: AnnulusSpec, level: int) -> TriMesh:
    """Möbius-pullback log-polar mesh of the chart image of ``spec``."""
    if not (isinstance(level, (int, np.integer)) and 0 <= level <= MAX_LEVEL):
        raise ValueError(f"refinement level must be an integer in [0, {MAX_LEVEL}], got {level!r}")
    outer = geodesic_ball_to_disk(spec.geom, 0.0, spec.r1)
    inner = geodesic_ball_to_disk(spec.geom, spec.t, spec.r0)
    mob, rho0, rho1 = mobius_concentricize(outer, inner)

    n_r, n_t = grid_shape(int(level))
    frac = np.arange(n_r + 1) / n_r
    radii = rho0 * (rho1 / rho0) ** frac
    radii[0], radii[-1] = rho0, rho1
    theta = 2.0 * np.pi * np.arange(n_t) / n_t
    w = radii[:, None] * np.exp(1j * theta)[None, :]
    z = mob.inverse(w).ravel()
    nodes = np.column_stack([z.real, z.imag])

    inner_loop = np.arange(n_t)
    outer_loop = n_r * n_t + np.arange(n_t)
    if not mob.identity:
        nodes[inner_loop] = _snap(nodes[inner_loop], inner)
        nodes[outer_loop] = _snap(nodes[outer_loop], outer)

    i, j = np.meshgrid(np.arange(n_r), np.arange(n_t), indexing="ij")
    i, j = i.ravel(), j.ravel()
    jp = (j + 1) % n_t
    n00 = i * n_t + j
    n01 = i * n_t + jp
    n10 = (i + 1) * n_t + j
    n11 = (i + 1) * n_t + jp
    even = (i + j) % 2 == 0
    # even cells: diagonal n00-n11; odd cells: diagonal n10-n01
    t1 = np.where(even[:, None], np.column_stack([n00, n10, n11]), np.column_stack([n00, n10, n01]))
    t2 = np.where(even[:, None], np.column_stack([n00, n11, n01]), np.column_stack([n10, n11, n01]))
    tris = np.empty((2 * t1.shape[0], 3), dtype=np.int64)
    tris[0::2] = t1
    tris[1::2] = t2

    return TriMesh(nodes, tris, inner_loop, outer_loop, int(level), inner, outer)


@dataclass
class MeshReport:
    violations: list[str] = field(default_factory=list)
    min_quality: float = float("nan")
    h_max: float = float("nan")
    euler_characteristic: int | None = None

    @property
    def ok(self) -> bool:
        return not self.violations


def triangle_quality(mesh: TriMesh) -> np.ndarray:
    """``2 * inradius / circumradius``; 1 for equilateral triangles."""
    p = mesh.nodes[mesh.triangles]
    a = np.linalg.norm(p[:, 1] - p[:, 2], axis=1)
    b = np.linalg.norm(p[:, 2] - p[:, 0], axis=1)
    c = np.linalg.norm(p[:, 0] - p[:, 1], axis=1)
    area = np.abs(mesh.signed_areas())
    with np.errstate(divide="ignore", invalid="ignore"):
        q = 16.0 * area**2 / ((a + b + c) * a * b * c)
    return np.nan_to_num(q, nan=0.0)


def _loop_edges(loop: np.ndarray) -> set[tuple[int, int]]:
    nxt = np.roll(loop, -1)
    return {(int(min(u, v)), int(max(u, v))) for u, v in zip(loop, nxt)}


def validate_mesh(mesh: TriMesh, on_circle_tol: float = ALG_TOL, quality_floor: float = QUALITY_FLOOR) -> MeshReport:
    """Check every TriMesh invariant; never raises, returns the list of violations."""
    rep = MeshReport()
    v = rep.violations
    n = mesh.n_nodes
    tris = mesh.triangles
    if tris.size and (tris.min() < 0 or tris.max() >= n):
        v.append("triangle index out of range")
        return rep

    areas = mesh.signed_areas()
    bad = np.flatnonzero(areas <= 0)
    if bad.size:
        v.append(f"negative-area: {bad.size} triangle(s) with non-positive signed area (first: {int(bad[0])})")

    e = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    counts = Counter(map(tuple, np.sort(e, axis=1).tolist()))
    over = [k for k, c in counts.items() if c > 2]
    if over:
        v.append(f"edge-sharing: {len(over)} edge(s) shared by more than two triangles")
    single = {k for k, c in counts.items() if c == 1}

    rep.euler_characteristic = n - len(counts) + tris.shape[0]
    if rep.euler_characteristic != 0:
        v.append(f"euler: V - E + F = {rep.euler_characteristic}, expected 0 for an annulus")

    loop_edges = set()
    for name, loop in (("inner", mesh.inner_boundary), ("outer", mesh.outer_boundary)):
        if loop.size < 3 or np.unique(loop).size != loop.size:
            v.append(f"boundary-loop: {name} loop is not a simple closed polyline")
            continue
        le = _loop_edges(loop)
        missing = le - single
        if missing:
            v.append(f"boundary-loop: {len(missing)} {name} loop segment(s) are not boundary edges")
        loop_edges |= le
    stray = single - loop_edges
    if stray:
        v.append(f"boundary-loop: {len(stray)} boundary edge(s) not on either loop")

    for name, loop, circ in (
        ("inner", mesh.inner_boundary, mesh.inner_circle),
        ("outer", mesh.outer_boundary, mesh.outer_circle),
    ):
        if circ is None:
            continue
        dev = np.abs(circ.distance_from(mesh.nodes[loop]))
        if dev.size and dev.max() > on_circle_tol:
            v.append(f"off-circle: {name} boundary node deviates by {dev.max():.3e} > {on_circle_tol:g}")

    q = triangle_quality(mesh)
    rep.min_quality = float(q.min()) if q.size else float("nan")
    if q.size and rep.min_quality < quality_floor:
        v.append(f"quality: minimum quality {rep.min_quality:.4f} < {quality_floor}")
    rep.h_max = mesh.max_edge_length() if tris.size else float("nan")
    return rep


# --------------------------------------------------------------------------
# plain-text dump


def write_mesh(mesh: TriMesh, path) -> None:
    """Write ``v x y`` / ``t i j k`` / ``bi ...`` / ``bo ...`` lines (0-based)."""
    lines = []
    for name, circ in (("ci", mesh.inner_circle), ("co", mesh.outer_circle)):
        if circ is not None:
            lines.append(f"# {name} {circ.center!r} {circ.radius!r}")
    lines.append(f"# level {mesh.refinement_level}")
    lines += [f"v {x!r} {y!r}" for x, y in mesh.nodes.tolist()]
    lines += [f"t {i} {j} {k}" for i, j, k in mesh.triangles.tolist()]
    lines.append("bi " + " ".join(map(str, mesh.inner_boundary.tolist())))
    lines.append("bo " + " ".join(map(str, mesh.outer_boundary.tolist())))
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh(path) -> TriMesh:
    nodes, tris = [], []
    inner = outer = None
    circles = {}
    level = 0
    for raw in Path(path).read_text().splitlines():
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "#":
            if len(parts) == 4 and parts[1] in ("ci", "co"):
                circles[parts[1]] = Circle2D(float(parts[2]), float(parts[3]))
            elif len(parts) == 3 and parts[1] == "level":
                level = int(parts[2])
        elif parts[0] == "v":
            nodes.append((float(parts[1]), float(parts[2])))
        elif parts[0] == "t":
            tris.append(tuple(int(p) for p in parts[1:4]))
        elif parts[0] == "bi":
            inner = np.array([int(p) for p in parts[1:]], dtype=np.int64)
        elif parts[0] == "bo":
            outer = np.array([int(p) for p in parts[1:]], dtype=np.int64)
        else:
            raise ValueError(f"unrecognised mesh line: {raw!r}")
    if inner is None or outer is None:
        raise GeometryError("mesh file is missing a boundary loop")
    return TriMesh(
        np.array(nodes, dtype=float).reshape(-1, 2),
        np.array(tris, dtype=np.int64).reshape(-1, 3),
        inner,
        outer,
        level,
        circles.get("ci"),
        circles.get("co"),
    )
