"""Extrinsic geometry of implicit hypersurfaces f(x) = 0 in R^N.

Curvature sign convention: the shape operator is the negated, projected,
normalized Hessian, so a sphere of radius r with outward normal has every
principal curvature equal to -1/r and mean curvature M = -(N-1)/r.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.stats import norm, qmc


class GeometryError(ValueError):
    pass


class SurfaceSpecError(ValueError):
    pass


@dataclass(frozen=True)
class PhysicalParams:
    hbar: float = 1.0
    mass: float = 1.0
    radius: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "mass", "radius"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive number, got {value!r}")

    @property
    def energy_unit(self):
        """hbar^2 / (2 m r^2)."""
        return self.hbar ** 2 / (2.0 * self.mass * self.radius ** 2)


def _fd_gradient(f, x, h=1e-5):
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def _fd_jacobian(F, x, h):
    """Central-difference Jacobian, J[i, j] = dF_i / dx_j."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        cols.append((np.asarray(F(x + e)) - np.asarray(F(x - e))) / (2 * h))
    return np.stack(cols, axis=-1)


@dataclass(frozen=True)
class ImplicitSurface:
    """Regular level set f(x) = 0 with value, gradient and Hessian evaluators.

    ``grad`` and ``hess`` may be omitted for custom surfaces; central finite
    differences are used instead.
    """

    dim: int
    f: Callable
    grad: Optional[Callable] = None
    hess: Optional[Callable] = None
    tag: str = "custom"
    params: dict = field(default_factory=dict)
    sampler: Optional[Callable] = None

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise SurfaceSpecError(f"ambient dimension must be an integer >= 2, got {self.dim!r}")

    def value(self, x):
        return float(self.f(np.asarray(x, dtype=float)))

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        if self.grad is not None:
            return np.asarray(self.grad(x), dtype=float)
        return _fd_gradient(self.f, x)

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        if self.hess is not None:
            return np.asarray(self.hess(x), dtype=float)
        H = _fd_jacobian(self.gradient, x, 1e-4)
        return 0.5 * (H + H.T)

    @property
    def spec(self):
        if not self.params:
            return self.tag
        body = ",".join(f"{k}={_fmt(v)}" for k, v in self.params.items())
        return f"{self.tag}:{body}"

    def rotated(self, Q):
        """The image of this surface under the orthogonal map x -> Q x."""
        Q = np.asarray(Q, dtype=float)
        f, g, H = self.f, self.gradient, self.hessian
        sampler = None
        if self.sampler is not None:
            base = self.sampler
            sampler = lambda n, seed=0: base(n, seed) @ Q.T  # noqa: E731
        return ImplicitSurface(
            dim=self.dim,
            f=lambda x: f(Q.T @ x),
            grad=lambda x: Q @ g(Q.T @ x),
            hess=lambda x: Q @ H(Q.T @ x) @ Q.T,
            tag=self.tag,
            params=dict(self.params),
            sampler=sampler,
        )

    def sample(self, n, seed=0):
        """Quasi-random points on the surface."""
        if self.sampler is not None:
            pts = self.sampler(n, seed)
        else:
            pts = _halton(self.dim, n, seed) * 2.0 - 1.0
        return np.array([project_to_surface(self, p) for p in pts])


def _fmt(v):
    return f"{v:g}" if isinstance(v, float) else str(v)


def _halton(d, n, seed):
    return qmc.Halton(d=d, scramble=True, seed=seed).random(n)


def sphere(N, r=1.0):
    N = int(N)
    if N < 2:
        raise SurfaceSpecError(f"sphere needs N >= 2, got N={N}")
    if r <= 0:
        raise SurfaceSpecError(f"sphere radius must be positive, got r={r}")

    def sampler(n, seed=0):
        u = np.clip(_halton(N, n, seed), 1e-9, 1 - 1e-9)
        g = norm.ppf(u)
        return r * g / np.linalg.norm(g, axis=1, keepdims=True)

    return ImplicitSurface(
        dim=N,
        f=lambda x: (x @ x - r * r) / (2 * r),
        grad=lambda x: x / r,
        hess=lambda x: np.eye(N) / r,
        tag="sphere",
        params={"N": N, "r": float(r)},
        sampler=sampler,
    )


def cylinder(a=1.0):
    """Circular cylinder of radius ``a`` around the z axis in R^3."""
    if a <= 0:
        raise SurfaceSpecError(f"cylinder radius must be positive, got a={a}")

    def sampler(n, seed=0):
        u = _halton(2, n, seed)
        t = 2 * np.pi * u[:, 0]
        z = 4 * a * (u[:, 1] - 0.5)
        return np.column_stack([a * np.cos(t), a * np.sin(t), z])

    return ImplicitSurface(
        dim=3,
        f=lambda x: (x[0] ** 2 + x[1] ** 2 - a * a) / (2 * a),
        grad=lambda x: np.array([x[0], x[1], 0.0]) / a,
        hess=lambda x: np.diag([1.0, 1.0, 0.0]) / a,
        tag="cylinder",
        params={"a": float(a)},
        sampler=sampler,
    )


def torus(R=2.0, rho=0.5):
    """Torus with centre-line radius ``R`` and tube radius ``rho``, symmetric about z."""
    if not (R > rho > 0):
        raise SurfaceSpecError(f"torus needs R > rho > 0, got R={R}, rho={rho}")

    def f(x):
        q = np.hypot(x[0], x[1])
        return ((q - R) ** 2 + x[2] ** 2 - rho * rho) / (2 * rho)

    def grad(x):
        q = np.hypot(x[0], x[1])
        s = (1 - R / q) / rho
        return np.array([s * x[0], s * x[1], x[2] / rho])

    def hess(x):
        q = np.hypot(x[0], x[1])
        xy = x[:2]
        H = np.zeros((3, 3))
        H[:2, :2] = (1 - R / q) * np.eye(2) + R * np.outer(xy, xy) / q ** 3
        H[2, 2] = 1.0
        return H / rho

    def sampler(n, seed=0):
        u = _halton(2, n, seed)
        t, s = 2 * np.pi * u[:, 0], 2 * np.pi * u[:, 1]
        q = R + rho * np.cos(s)
        return np.column_stack([q * np.cos(t), q * np.sin(t), rho * np.sin(s)])

    return ImplicitSurface(
        dim=3, f=f, grad=grad, hess=hess, tag="torus",
        params={"R": float(R), "rho": float(rho)}, sampler=sampler,
    )


def ellipsoid(a=2.0, b=1.0, c=1.0):
    axes = np.array([a, b, c], dtype=float)
    if np.any(axes <= 0):
        raise SurfaceSpecError(f"ellipsoid semi-axes must be positive, got {tuple(axes)}")
    inv2 = 1.0 / axes ** 2

    def sampler(n, seed=0):
        u = np.clip(_halton(3, n, seed), 1e-9, 1 - 1e-9)
        g = norm.ppf(u)
        return axes * g / np.linalg.norm(g, axis=1, keepdims=True)

    return ImplicitSurface(
        dim=3,
        f=lambda x: 0.5 * (x * x @ inv2 - 1.0),
        grad=lambda x: x * inv2,
        hess=lambda x: np.diag(inv2),
        tag="ellipsoid",
        params={"a": float(a), "b": float(b), "c": float(c)},
        sampler=sampler,
    )


CATALOG = {"sphere": sphere, "cylinder": cylinder, "torus": torus, "ellipsoid": ellipsoid}


def parse_surface(text):
    """Build a catalog surface from an id such as ``"sphere:N=3,r=2"``."""
    name, _, body = text.strip().partition(":")
    name = name.strip().lower()
    if name not in CATALOG:
        raise SurfaceSpecError(f"unknown surface {name!r}; choose from {sorted(CATALOG)}")
    kwargs = {}
    for item in filter(None, (s.strip() for s in body.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise SurfaceSpecError(f"malformed parameter {item!r} in {text!r}")
        key = key.strip()
        try:
            kwargs[key] = int(val) if key == "N" else float(val)
        except ValueError:
            raise SurfaceSpecError(f"bad value for {key!r} in {text!r}") from None
    try:
        return CATALOG[name](**kwargs)
    except TypeError as exc:
        raise SurfaceSpecError(f"bad parameters for {name}: {exc}") from None


def project_to_surface(surface, x0, tol=1e-12, max_iter=100):
    """Newton iteration along the gradient onto f = 0."""
    x = np.array(x0, dtype=float)
    for _ in range(max_iter):
        fx = surface.value(x)
        if abs(fx) < tol:
            return x
        g = surface.gradient(x)
        gg = g @ g
        if gg == 0.0 or not np.isfinite(gg):
            raise GeometryError(f"zero gradient at {x}")
        x = x - fx * g / gg
    if abs(surface.value(x)) < tol:
        return x
    raise GeometryError(f"projection from {x0} did not converge in {max_iter} iterations")


def unit_normal(surface, x):
    g = surface.gradient(x)
    gn = np.linalg.norm(g)
    if gn == 0.0:
        raise GeometryError(f"zero gradient at {x}")
    return g / gn


@dataclass(frozen=True)
class CurvatureData:
    point: np.ndarray
    normal: np.ndarray
    principal: np.ndarray
    mean: float
    mean_vector: np.ndarray
    v_g: float

    def to_dict(self):
        return {
            "point": self.point.tolist(),
            "n": self.normal.tolist(),
            "k": self.principal.tolist(),
            "M": self.mean,
            "Mn": self.mean_vector.tolist(),
            "v_g": self.v_g,
        }


def shape_operator(surface, x):
    """-P (Hess f / |grad f|) P with P the tangential projector."""
    g = surface.gradient(x)
    gn = np.linalg.norm(g)
    if gn == 0.0:
        raise GeometryError(f"zero gradient at {x}")
    n = g / gn
    P = np.eye(surface.dim) - np.outer(n, n)
    S = -P @ (surface.hessian(x) / gn) @ P
    return 0.5 * (S + S.T), n


def principal_curvatures(surface, x):
    x = np.asarray(x, dtype=float)
    S, n = shape_operator(surface, x)
    try:
        w, V = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        raise GeometryError(f"eigensolver failed at {x}") from exc
    trivial = int(np.argmax(np.abs(V.T @ n)))
    if abs(w[trivial]) > 1e-8:
        raise GeometryError(f"normal eigenvalue {w[trivial]:.3e} is not zero; projection is broken")
    k = np.delete(w, trivial)
    M = float(k.sum())
    return CurvatureData(
        point=x,
        normal=n,
        principal=k,
        mean=M,
        mean_vector=M * n,
        v_g=float(0.25 * (2 * (k @ k) - M * M)),
    )


def geometric_potential(surface, x, params=PhysicalParams()):
    """Thin-layer curvature potential V_g = -hbar^2 v_g / (2m)."""
    v_g = principal_curvatures(surface, x).v_g
    return -params.hbar ** 2 / (2 * params.mass) * v_g


def default_step(surface, x, scale=1e-4):
    """``scale`` times the smallest local curvature radius."""
    k = np.abs(principal_curvatures(surface, x).principal)
    kmax = k.max()
    return scale / kmax if kmax > 0 else scale


def _normal_field(surface):
    return lambda y: unit_normal(surface, y)


def check_divergence_identity(surface, x, h=None):
    """|div_S n + M| with div_S n from central differences of n = grad f / |grad f|."""
    x = np.asarray(x, dtype=float)
    if h is None:
        h = default_step(surface, x)
    n = unit_normal(surface, x)
    J = _fd_jacobian(_normal_field(surface), x, h)
    P = np.eye(surface.dim) - np.outer(n, n)
    div_s = float(np.sum(P * J))
    M = principal_curvatures(surface, x).mean
    return abs(div_s + M)


def check_lb_position_identity(surface, x, h=None):
    """|lap_LB x - M n|, lap_LB x_i = P_jl d_l P_ji with P differenced numerically."""
    x = np.asarray(x, dtype=float)
    if h is None:
        h = default_step(surface, x)
    N = surface.dim
    n = unit_normal(surface, x)
    P = np.eye(N) - np.outer(n, n)

    def projector(y):
        m = unit_normal(surface, y)
        return np.eye(N) - np.outer(m, m)

    dP = _fd_jacobian(projector, x, h)  # dP[j, i, l] = d_l P_ji
    lap_x = np.einsum("jl,jil->i", P, dP)
    Mn = principal_curvatures(surface, x).mean_vector
    return float(np.linalg.norm(lap_x - Mn))


def convergence_order(check, surface, x, h):
    """Observed order log2(e(h) / e(h/2)) of a finite-difference residual."""
    e1 = check(surface, x, h)
    e2 = check(surface, x, h / 2)
    if e2 == 0.0:
        return float("inf") if e1 > 0 else float("nan")
    return float(np.log2(e1 / e2))


def random_rotation(N, seed=0):
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((N, N)))
    return Q * np.sign(np.diag(R))


def surface_record(surface, x, params=PhysicalParams(), h=None):
    """JSON-ready summary of the geometry at one point."""
    data = principal_curvatures(surface, x)
    rec = {"surface": surface.spec}
    rec.update(data.to_dict())
    rec["V_g"] = -params.hbar ** 2 / (2 * params.mass) * data.v_g
    step = default_step(surface, x) if h is None else h
    rec["residuals"] = {
        "divergence": check_divergence_identity(surface, x, step),
        "lb_position": check_lb_position_identity(surface, x, step),
    }
    rec["h"] = step
    return rec
