"""Spectral-Galerkin operator matrices on the circle (N = 2) and the 2-sphere (N = 3).

Every operator is assembled as <b'| A |b> by quadrature on a grid that
integrates all products appearing here exactly, so the matrices are the
exact Galerkin projections of the continuous operators.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import sph_harm_y

from .geometry import PhysicalParams

SUPPORTED_DIMS = (2, 3)


class BasisError(ValueError):
    pass


class BasisSpec:
    """Truncated orthonormal basis on S^{N-1} with its quadrature grid.

    N = 2 uses Fourier modes e^{i l theta}/sqrt(2 pi), |l| <= lmax.
    N = 3 uses complex spherical harmonics Y_lm (Condon-Shortley phase),
    l <= lmax, on a Gauss-Legendre x uniform-phi grid (no grid point sits on a pole).

    Basis functions are orthonormal on the unit sphere; the radius enters
    only through the operators.
    """

    def __init__(self, N, lmax, oversample=1):
        if N not in SUPPORTED_DIMS:
            raise BasisError(f"operator route supports N in {SUPPORTED_DIMS}, got N={N}")
        if int(lmax) != lmax or lmax < 4:
            raise BasisError(f"lmax must be an integer >= 4, got {lmax!r}")
        self.N = int(N)
        self.lmax = int(lmax)
        self.oversample = int(oversample)
        n_phi = (4 * self.lmax + 8) * self.oversample

        if self.N == 2:
            ms = np.arange(-self.lmax, self.lmax + 1)
            self.levels = np.abs(ms)
            self.ms = ms
            theta = 2 * np.pi * np.arange(n_phi) / n_phi
            self.theta = theta
            self.phi = None
            self.weights = np.full(n_phi, 2 * np.pi / n_phi)
            self.values = np.exp(1j * np.outer(theta, ms)) / np.sqrt(2 * np.pi)
        else:
            ls, ms = zip(*[(l, m) for l in range(self.lmax + 1) for m in range(-l, l + 1)])
            self.levels = np.array(ls)
            self.ms = np.array(ms)
            n_theta = (2 * self.lmax + 4) * self.oversample
            z, wz = np.polynomial.legendre.leggauss(n_theta)
            phi = 2 * np.pi * np.arange(n_phi) / n_phi
            T, P = np.meshgrid(np.arccos(z), phi, indexing="ij")
            self.theta = T.ravel()
            self.phi = P.ravel()
            self.weights = np.outer(wz, np.full(n_phi, 2 * np.pi / n_phi)).ravel()
            self.values = self.ylm(self.levels, self.ms)

    def __repr__(self):
        return f"BasisSpec(N={self.N}, lmax={self.lmax}, size={self.size})"

    def __eq__(self, other):
        return isinstance(other, BasisSpec) and (self.N, self.lmax) == (other.N, other.lmax)

    def __hash__(self):
        return hash((self.N, self.lmax))

    @property
    def size(self):
        return self.levels.size

    @property
    def npoints(self):
        return self.weights.size

    def ylm(self, l, m):
        """Y_lm on the grid, one column per (l, m); zero where |m| > l."""
        l = np.atleast_1d(l)
        m = np.atleast_1d(m)
        ok = np.abs(m) <= l
        out = np.zeros((self.npoints, l.size), dtype=complex)
        out[:, ok] = sph_harm_y(l[ok], m[ok], self.theta[:, None], self.phi[:, None])
        return out

    def normal(self):
        """Unit outward normal at every grid point, shape (npoints, N)."""
        if self.N == 2:
            return np.column_stack([np.cos(self.theta), np.sin(self.theta)])
        st = np.sin(self.theta)
        return np.column_stack([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])

    def surface_gradient(self):
        """grad_S of every basis function on the unit sphere, shape (npoints, size, N)."""
        if self.N == 2:
            tangent = np.column_stack([-np.sin(self.theta), np.cos(self.theta)])
            d_theta = self.values * (1j * self.ms)
            return d_theta[:, :, None] * tangent[:, None, :]
        th, ph = self.theta, self.phi
        l, m = self.levels, self.ms
        # d/dtheta Y_lm = m cot(theta) Y_lm + sqrt((l-m)(l+m+1)) e^{-i phi} Y_{l,m+1}
        raise_coef = np.sqrt(np.maximum((l - m) * (l + m + 1), 0))
        d_theta = (m / np.tan(th)[:, None]) * self.values + raise_coef * (
            np.exp(-1j * ph)[:, None] * self.ylm(l, m + 1)
        )
        d_phi_over_sin = (1j * m) * self.values / np.sin(th)[:, None]
        theta_hat = np.column_stack([np.cos(th) * np.cos(ph), np.cos(th) * np.sin(ph), -np.sin(th)])
        phi_hat = np.column_stack([-np.sin(ph), np.cos(ph), np.zeros_like(ph)])
        return d_theta[:, :, None] * theta_hat[:, None, :] + d_phi_over_sin[:, :, None] * phi_hat[:, None, :]

    def analyze(self, f):
        """Basis coefficients of grid samples ``f`` (quadrature projection)."""
        return self.values.conj().T @ (self.weights * np.asarray(f))

    def synthesize(self, c):
        return self.values @ c

    def gram(self):
        return self.project(self.values)

    def project(self, images):
        """Matrix <b_a | image_b> for grid images of the basis functions (npoints, size)."""
        return self.values.conj().T @ (self.weights[:, None] * images)

    def level_mask(self, lcut):
        return self.levels <= lcut


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    data: np.ndarray
    basis: BasisSpec
    label: str = ""
    hermitian: bool = False

    def __post_init__(self):
        if self.data.shape != (self.basis.size, self.basis.size):
            raise BasisError(
                f"{self.label or 'operator'} has shape {self.data.shape}, basis size is {self.basis.size}"
            )
        if self.hermitian:
            err = hermiticity_error(self.data)
            if err >= 1e-10:
                raise BasisError(f"{self.label} flagged hermitian but |A - A^+|_max = {err:.3e}")
        self.data.setflags(write=False)

    @property
    def H(self):
        return OperatorMatrix(self.data.conj().T, self.basis, f"({self.label})^+", self.hermitian)

    def _check(self, other):
        if isinstance(other, OperatorMatrix) and other.basis != self.basis:
            raise BasisError(f"basis mismatch: {self.basis} vs {other.basis}")

    def __matmul__(self, other):
        self._check(other)
        return OperatorMatrix(self.data @ other.data, self.basis, f"{self.label} {other.label}")

    def __add__(self, other):
        self._check(other)
        return OperatorMatrix(self.data + other.data, self.basis, f"{self.label} + {other.label}")

    def __sub__(self, other):
        self._check(other)
        return OperatorMatrix(self.data - other.data, self.basis, f"{self.label} - {other.label}")

    def __mul__(self, scalar):
        return OperatorMatrix(scalar * self.data, self.basis, self.label)

    __rmul__ = __mul__

    def __neg__(self):
        return OperatorMatrix(-self.data, self.basis, f"-{self.label}")

    def relabel(self, label, hermitian=None):
        return OperatorMatrix(self.data, self.basis, label, self.hermitian if hermitian is None else hermitian)

    def to_dict(self):
        flat = self.data.ravel(order="C")
        return {
            "label": self.label,
            "N": self.basis.N,
            "l_max": self.basis.lmax,
            "hermitian": self.hermitian,
            "dim": self.basis.size,
            "entries": [[float(z.real), float(z.imag)] for z in flat],
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    def save(self, path):
        """Binary dump (.npz) with the same fields as ``to_dict``."""
        np.savez(path, label=self.label, N=self.basis.N, l_max=self.basis.lmax,
                 hermitian=self.hermitian, entries=np.ascontiguousarray(self.data))


def operator_from_dict(d, basis=None):
    basis = basis or BasisSpec(d["N"], d["l_max"])
    n = d["dim"]
    z = np.array(d["entries"], dtype=float)
    data = (z[:, 0] + 1j * z[:, 1]).reshape(n, n)
    return OperatorMatrix(data, basis, d["label"], d["hermitian"])


def hermiticity_error(A):
    A = A.data if isinstance(A, OperatorMatrix) else A
    return float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0


def _axis(basis, i):
    if not 1 <= i <= basis.N:
        raise BasisError(f"axis index must be in 1..{basis.N}, got {i}")
    return i - 1


def build_position(basis, params=PhysicalParams(), i=1):
    """x_i as multiplication by r n_i."""
    a = _axis(basis, i)
    image = basis.values * (params.radius * basis.normal()[:, a])[:, None]
    return OperatorMatrix(basis.project(image), basis, f"x_{i}", hermitian=True)


def build_momentum(basis, params=PhysicalParams(), i=1, curvature_term=True):
    """Geometric momentum p_i = -i hbar (grad_S + M n / 2)_i with M = -(N-1)/r.

    ``curvature_term=False`` gives the naive -i hbar grad_S (not hermitian).
    """
    a = _axis(basis, i)
    r = params.radius
    image = basis.surface_gradient()[:, :, a] / r
    if curvature_term:
        M = -(basis.N - 1) / r
        image = image + (0.5 * M * basis.normal()[:, a])[:, None] * basis.values
    A = -1j * params.hbar * basis.project(image)
    bound = 10 * params.hbar * (basis.lmax + basis.N) / r
    if not np.all(np.isfinite(A)) or np.max(np.abs(A)) > bound:
        raise BasisError(f"momentum p_{i} exceeds sanity bound {bound:g}; pole handling failed")
    if curvature_term:
        return OperatorMatrix(A, basis, f"p_{i}", hermitian=True)
    return OperatorMatrix(A, basis, f"p_{i}(naive)", hermitian=False)


def laplacian_eigenvalues(basis, params=PhysicalParams()):
    l = basis.levels
    return -l * (l + basis.N - 2) / params.radius ** 2


def build_laplace_beltrami(basis, params=PhysicalParams()):
    D = np.diag(laplacian_eigenvalues(basis, params)).astype(complex)
    return OperatorMatrix(D, basis, "LB", hermitian=True)


def build_hamiltonian(basis, params=PhysicalParams(), alpha=0.0):
    """H = -hbar^2/(2m) LB + alpha hbar^2/(2 m r^2), diagonal in the basis."""
    l = basis.levels
    E = params.energy_unit * (l * (l + basis.N - 2) + alpha)
    return OperatorMatrix(np.diag(E).astype(complex), basis, f"H({alpha:g})", hermitian=True)


@dataclass(frozen=True, eq=False)
class SphereOperators:
    """Position and momentum components sharing one basis."""

    basis: BasisSpec
    params: PhysicalParams
    x: tuple
    p: tuple
    naive: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def N(self):
        return self.basis.N

    def hamiltonian(self, alpha):
        key = ("H", float(alpha))
        if key not in self._cache:
            self._cache[key] = build_hamiltonian(self.basis, self.params, alpha)
        return self._cache[key]

    def identity(self):
        return OperatorMatrix(np.eye(self.basis.size, dtype=complex), self.basis, "1", hermitian=True)


def build_operator_set(N, lmax, params=PhysicalParams(), naive=False, oversample=1):
    basis = N if isinstance(N, BasisSpec) else BasisSpec(N, lmax, oversample)
    xs = tuple(build_position(basis, params, i) for i in range(1, basis.N + 1))
    ps = tuple(build_momentum(basis, params, i, curvature_term=not naive) for i in range(1, basis.N + 1))
    return SphereOperators(basis, params, xs, ps, naive=naive)
