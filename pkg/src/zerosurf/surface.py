"""Seed zero surfaces: triangulated closed manifolds with oriented normals.

Normals are taken from the field, ``N = grad u / |grad u|``, so that
``grad u . N = |grad u|`` holds at every sample.  Mesh winding is only used
for the structural checks.
"""

from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from zerosurf import objio
from zerosurf.errors import DegenerateGradient

GRADIENT_FLOOR = 1e-10


@dataclass(frozen=True)
class SurfaceSample:
    s: np.ndarray
    N: np.ndarray
    vertex_id: int


@dataclass(frozen=True, eq=False)
class SeedSurface:
    vertices: np.ndarray
    triangles: np.ndarray
    euler_characteristic: int
    normals: np.ndarray = None
    allow_open: bool = False
    degenerate: tuple = ()

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(-1, 3)
        t = np.array(self.triangles, dtype=np.int64).reshape(-1, 3)
        v.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        if self.normals is not None:
            n = np.array(self.normals, dtype=float).reshape(v.shape)
            n.flags.writeable = False
            object.__setattr__(self, "normals", n)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def samples(self):
        if self.normals is None:
            raise ValueError("normals not attached; call attach_normals first")
        return [SurfaceSample(self.vertices[i], self.normals[i], i) for i in range(self.n_vertices)]

    def edges(self):
        """Sorted array of unique undirected edges."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    def edge_lengths(self):
        e = self.edges()
        return np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1)

    def min_edge_length(self):
        return float(self.edge_lengths().min())

    def computed_euler_characteristic(self):
        return self.n_vertices - len(self.edges()) + len(self.triangles)

    def scaled(self, factor):
        return replace(self, vertices=self.vertices * factor, normals=None, degenerate=())

    def to_obj(self, path, comment=None):
        objio.write_obj(path, self.vertices, self.triangles, comment)

    @classmethod
    def from_obj(cls, path, allow_open=False):
        v, f = objio.read_obj(path)
        seed = cls(v, f, 0, allow_open=allow_open)
        return replace(seed, euler_characteristic=seed.computed_euler_characteristic())


def _orient_outward(vertices, triangles):
    # valid for star-shaped meshes around the origin only
    a, b, c = (vertices[triangles[:, k]] for k in range(3))
    n = np.cross(b - a, c - a)
    flip = np.einsum("ij,ij->i", n, a + b + c) < 0
    out = triangles.copy()
    out[flip] = out[flip][:, [0, 2, 1]]
    return out


def _icosahedron():
    # poles on the x1 axis, two staggered rings of five
    h = 1.0 / np.sqrt(5.0)
    rho = 2.0 * h
    pts = [(0.0, 0.0, 1.0)]
    pts += [(rho * np.cos(2 * np.pi * k / 5), rho * np.sin(2 * np.pi * k / 5), h) for k in range(5)]
    pts += [(rho * np.cos(2 * np.pi * (k + 0.5) / 5), rho * np.sin(2 * np.pi * (k + 0.5) / 5), -h) for k in range(5)]
    pts.append((0.0, 0.0, -1.0))
    pts = np.array(pts)[:, [2, 0, 1]]
    tris = []
    for k in range(5):
        u0, u1 = 1 + k, 1 + (k + 1) % 5
        l0, l1 = 6 + k, 6 + (k + 1) % 5
        tris += [(0, u0, u1), (u0, l0, u1), (u1, l0, l1), (11, l1, l0)]
    return pts, _orient_outward(pts, np.array(tris))


def _subdivide(vertices, triangles):
    verts = [tuple(v) for v in vertices]
    cache = {}

    def midpoint(i, j):
        key = (i, j) if i < j else (j, i)
        if key not in cache:
            cache[key] = len(verts)
            verts.append(tuple(0.5 * (vertices[i] + vertices[j])))
        return cache[key]

    out = []
    for a, b, c in triangles:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        out += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
    return np.array(verts), np.array(out, dtype=np.int64)


def seed_sphere(radius=1.0, subdivisions=0):
    """Icosphere of the given radius; vertices lie exactly on the sphere."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    if subdivisions < 0:
        raise ValueError("subdivisions must be >= 0")
    v, t = _icosahedron()
    for _ in range(subdivisions):
        v, t = _subdivide(v, t)
        v = v / np.linalg.norm(v, axis=1, keepdims=True)
    v = radius * v / np.linalg.norm(v, axis=1, keepdims=True)
    return SeedSurface(v, t, 2)


def seed_torus(ring_radius, tube_radius, n_u, n_v):
    if not ring_radius > tube_radius > 0:
        raise ValueError("need ring_radius > tube_radius > 0")
    if n_u < 3 or n_v < 3:
        raise ValueError("need n_u, n_v >= 3")
    uu = 2 * np.pi * np.arange(n_u) / n_u
    vv = 2 * np.pi * np.arange(n_v) / n_v
    U, V = np.meshgrid(uu, vv, indexing="ij")
    rho = ring_radius + tube_radius * np.cos(V)
    pts = np.stack([rho * np.cos(U), rho * np.sin(U), tube_radius * np.sin(V)], axis=-1).reshape(-1, 3)

    def idx(i, j):
        return (i % n_u) * n_v + (j % n_v)

    tris = []
    for i in range(n_u):
        for j in range(n_v):
            a, b, c, d = idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)
            tris += [(a, b, c), (a, c, d)]
    tris = np.array(tris, dtype=np.int64)
    # outward at vertex 0 is +x1; flip globally if the first face disagrees
    a, b, c = pts[tris[0]]
    if np.cross(b - a, c - a) @ np.array([1.0, 0.0, 0.0]) < 0:
        tris = tris[:, [0, 2, 1]]
    return SeedSurface(pts, tris, 0)


def seed_plane_patch(n=5, size=1.0, height=0.0):
    """Open square patch in the plane x3 = height (an ``allow_open`` seed)."""
    g = np.linspace(-size, size, n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    pts = np.stack([X, Y, np.full_like(X, height)], axis=-1).reshape(-1, 3)
    tris = []
    for i in range(n - 1):
        for j in range(n - 1):
            a, b, c, d = i * n + j, (i + 1) * n + j, (i + 1) * n + j + 1, i * n + j + 1
            tris += [(a, b, c), (a, c, d)]
    return SeedSurface(pts, tris, 1, allow_open=True)


def mesh_vertex_normals(surface):
    """Area-weighted vertex normals from the triangle winding."""
    v, t = surface.vertices, surface.triangles
    fn = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
    acc = np.zeros_like(v)
    for k in range(3):
        np.add.at(acc, t[:, k], fn)
    norm = np.linalg.norm(acc, axis=1, keepdims=True)
    return np.divide(acc, norm, out=np.zeros_like(acc), where=norm > 0)


def attach_normals(surface, u, gradient_floor=GRADIENT_FLOOR, skip_degenerate=False):
    """Return a copy of ``surface`` with N = grad u / |grad u| at each vertex.

    With ``skip_degenerate`` the vertices where |grad u| < ``gradient_floor``
    get a zero normal and are listed in ``degenerate`` instead of raising.
    """
    normals = np.empty_like(surface.vertices)
    degenerate = []
    for i, s in enumerate(surface.vertices):
        g = u.eval(s).gradient
        mag = float(np.linalg.norm(g))
        if mag < gradient_floor:
            if not skip_degenerate:
                raise DegenerateGradient(i, mag)
            degenerate.append(i)
            normals[i] = 0.0
        else:
            normals[i] = g / mag
    return replace(surface, normals=normals, degenerate=tuple(degenerate))


@dataclass
class ValidationReport:
    max_residual: float
    residual_tol: float
    boundary_edges: int
    nonmanifold_edges: int
    consistent_winding: bool
    euler_characteristic: int
    recorded_euler_characteristic: int
    components: int
    orientation_ok: bool
    allow_open: bool = False
    warnings: list = field(default_factory=list)

    @property
    def closed(self):
        return self.boundary_edges == 0 and self.nonmanifold_edges == 0

    @property
    def residual_ok(self):
        return self.max_residual <= self.residual_tol

    @property
    def euler_ok(self):
        return self.euler_characteristic == self.recorded_euler_characteristic

    @property
    def passed(self):
        structure = self.nonmanifold_edges == 0 and (self.allow_open or self.boundary_edges == 0)
        return bool(
            self.residual_ok and structure and self.consistent_winding and self.euler_ok and self.orientation_ok
        )

    def failures(self):
        out = []
        if not self.residual_ok:
            out.append(f"max |u(s)| = {self.max_residual:.3e} > {self.residual_tol:.1e}")
        if self.boundary_edges and not self.allow_open:
            out.append(f"{self.boundary_edges} boundary edges")
        if self.nonmanifold_edges:
            out.append(f"{self.nonmanifold_edges} non-manifold edges")
        if not self.consistent_winding:
            out.append("inconsistent winding")
        if not self.euler_ok:
            out.append(
                f"Euler characteristic {self.euler_characteristic} != recorded {self.recorded_euler_characteristic}"
            )
        if not self.orientation_ok:
            out.append("normal orientation violates grad u . N = |grad u|")
        return out

    def as_dict(self):
        return {
            "passed": self.passed,
            "max_residual": self.max_residual,
            "residual_tol": self.residual_tol,
            "closed": self.closed,
            "boundary_edges": self.boundary_edges,
            "nonmanifold_edges": self.nonmanifold_edges,
            "consistent_winding": self.consistent_winding,
            "euler_characteristic": self.euler_characteristic,
            "recorded_euler_characteristic": self.recorded_euler_characteristic,
            "components": self.components,
            "orientation_ok": self.orientation_ok,
            "warnings": list(self.warnings),
        }


def _edge_structure(triangles):
    t = triangles
    directed = Counter(map(tuple, np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]).tolist()))
    undirected = Counter()
    for (a, b), n in directed.items():
        undirected[(min(a, b), max(a, b))] += n
    boundary = sum(1 for n in undirected.values() if n == 1)
    nonmanifold = sum(1 for n in undirected.values() if n > 2)
    # each directed edge used once, and interior edges traversed both ways
    winding = all(n == 1 for n in directed.values()) and all(
        (b, a) in directed for (a, b) in directed if undirected[(min(a, b), max(a, b))] == 2
    )
    return boundary, nonmanifold, winding


def _components(n_vertices, triangles):
    t = triangles
    rows = np.concatenate([t[:, 0], t[:, 1], t[:, 2]])
    cols = np.concatenate([t[:, 1], t[:, 2], t[:, 0]])
    adj = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n_vertices, n_vertices))
    return connected_components(adj, directed=False)[0]


def validate_seed(surface, u, tol=1e-10):
    """Structural and zero-set checks for a seed surface.

    Never raises; failures are carried by the returned report.
    """
    residuals = [abs(u.value(s)) for s in surface.vertices]
    boundary, nonmanifold, winding = _edge_structure(surface.triangles)
    orientation_ok = True
    if surface.normals is not None:
        for i, (s, n) in enumerate(zip(surface.vertices, surface.normals)):
            if i in surface.degenerate:
                continue
            g = u.eval(s).gradient
            gn, gmag = float(g @ n), float(np.linalg.norm(g))
            if gn < 0 or abs(gn - gmag) > 1e-9 * gmag or abs(np.linalg.norm(n) - 1.0) > 1e-12:
                orientation_ok = False
                break
    report = ValidationReport(
        max_residual=float(max(residuals, default=0.0)),
        residual_tol=tol,
        boundary_edges=boundary,
        nonmanifold_edges=nonmanifold,
        consistent_winding=winding,
        euler_characteristic=surface.computed_euler_characteristic(),
        recorded_euler_characteristic=surface.euler_characteristic,
        components=_components(surface.n_vertices, surface.triangles) if len(surface.triangles) else 0,
        orientation_ok=orientation_ok,
        allow_open=surface.allow_open,
    )
    if report.components > 1:
        report.warnings.append(f"seed has {report.components} connected components")
    return report
