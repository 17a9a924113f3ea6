"""Commutator checks for the constrained position/momentum/Hamiltonian algebra on spheres.

All comparisons are entrywise max-norms restricted to the interior levels
l <= lmax - margin, where products of truncated matrices agree with the
truncation of the exact products.
"""

import itertools
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .sphere_ops import BasisError, OperatorMatrix

DEFAULT_TOL = 1e-9
CONSTRAINT_TOL = 1e-10
ALPHA_TOL = 1e-6


@dataclass
class AlgebraReport:
    label: str
    residual: float
    margin: int
    lmax: int
    N: int
    tol: float
    passed: bool = field(init=False)
    alpha: Optional[float] = None
    alpha_curve: Optional[list] = None
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.residual < self.tol)

    def to_dict(self):
        d = asdict(self)
        if d["alpha"] is None:
            d.pop("alpha")
            d.pop("alpha_curve")
        if not d["detail"]:
            d.pop("detail")
        return d


def commutator(A, B):
    """[A, B] = AB - BA."""
    if A.basis != B.basis:
        raise BasisError(f"basis mismatch: {A.basis} vs {B.basis}")
    C = A.data @ B.data - B.data @ A.data
    return OperatorMatrix(C, A.basis, f"[{A.label}, {B.label}]")


def hermitize(A):
    """(A + A^+) / 2."""
    return OperatorMatrix(0.5 * (A.data + A.data.conj().T), A.basis, f"{{{A.label}}}_H", hermitian=True)


def _check_margin(basis, margin):
    if margin < 0 or basis.lmax - margin < 2:
        raise BasisError(f"margin {margin} exhausts the basis (lmax={basis.lmax})")


def interior_mask(basis, margin):
    _check_margin(basis, margin)
    return basis.level_mask(basis.lmax - margin)


def interior_projector(basis, margin):
    """Orthogonal projector onto levels l <= lmax - margin."""
    P = np.diag(interior_mask(basis, margin).astype(complex))
    return OperatorMatrix(P, basis, f"P(l<={basis.lmax - margin})", hermitian=True)


def interior_residual(lhs, rhs, margin):
    """max |(lhs - rhs)_ab| over interior rows and columns."""
    if lhs.basis != rhs.basis:
        raise BasisError(f"basis mismatch: {lhs.basis} vs {rhs.basis}")
    return _ires(lhs.data, rhs.data, interior_mask(lhs.basis, margin))


def _ires_m(ops, A, B, margin):
    return _ires(A, B, interior_mask(ops.basis, margin))


def _ires(A, B, m):
    D = (A - B)[np.ix_(m, m)]
    return float(np.max(np.abs(D))) if D.size else 0.0


def _report(ops, label, residual, margin, tol, **kw):
    b = ops.basis
    return AlgebraReport(label=label, residual=residual, margin=margin, lmax=b.lmax, N=b.N, tol=tol, **kw)


def _raw(ops):
    return [a.data for a in ops.x], [a.data for a in ops.p], np.eye(ops.basis.size)


def _comm(A, B):
    return A @ B - B @ A


def check_first_fcr(ops, margin=2, tol=DEFAULT_TOL):
    """[x_i, x_j] = 0, [x_i, p_j] = i hbar (delta_ij - n_i n_j), [p_i, p_j] = -i hbar L_ij / r^2."""
    x, p, I = _raw(ops)
    hbar, r = ops.params.hbar, ops.params.radius
    N = ops.N
    xx = xp = pp = 0.0
    for i, j in itertools.product(range(N), repeat=2):
        xx = max(xx, _ires_m(ops, _comm(x[i], x[j]), 0 * I, margin))
        nn = x[i] @ x[j] / r ** 2
        xp = max(xp, _ires_m(ops, _comm(x[i], p[j]), 1j * hbar * ((i == j) * I - nn), margin))
        L = x[i] @ p[j] - x[j] @ p[i]
        pp = max(pp, _ires_m(ops, _comm(p[i], p[j]), -1j * hbar * L / r ** 2, margin))
    return [
        _report(ops, "[x_i,x_j]=0", xx, margin, tol),
        _report(ops, "[x_i,p_j]=ihbar(d_ij-n_i n_j)", xp, margin, tol),
        _report(ops, "[p_i,p_j]=-ihbar(x_i p_j-x_j p_i)/r^2", pp, margin, tol),
    ]


def constraint_operator(ops):
    """sum_i (p_i n_i + n_i p_i) with n = x / r."""
    x, p, _ = _raw(ops)
    S = sum(p[i] @ x[i] + x[i] @ p[i] for i in range(ops.N)) / ops.params.radius
    return OperatorMatrix(S, ops.basis, "p.n+n.p")


def check_constraint(ops, margin=2, tol=CONSTRAINT_TOL):
    S = constraint_operator(ops)
    res = _ires_m(ops, S.data, 0 * S.data, margin)
    return _report(ops, "p.n+n.p=0", res, margin, tol)


def _hermitization_parts(ops, i, j, form):
    """Return (O, {O}_H, right-hand side) for O = n_i n_{k,j} p_k on the sphere.

    n_{k,j} = (delta_kj - n_k n_j)/r. The correction term is
    (hbar/2 i)(n_{i,k} n_{j,k} + n_i D_j). With form="derived",
    D_j = d_k n_{k,j} = -(N-1) n_j / r^2 (the divergence produced by moving
    p_k through the coefficients). With form="literal", D_j = 0, i.e. the
    surface gradient of the constant M.
    """
    x, p, I = _raw(ops)
    hbar, r, N = ops.params.hbar, ops.params.radius, ops.N
    n = [xi / r for xi in x]
    dn = lambda k, l: ((k == l) * I - n[k] @ n[l]) / r  # noqa: E731
    O = sum(n[i] @ dn(k, j) @ p[k] for k in range(N))
    OH = 0.5 * (O + O.conj().T)
    quad = sum(dn(i, k) @ dn(j, k) for k in range(N))
    if form == "derived":
        div = -(N - 1) * n[j] / r ** 2
    elif form == "literal":
        div = 0 * I
    else:
        raise ValueError(f"unknown form {form!r}")
    rhs = O - 0.5j * hbar * (quad + n[i] @ div)
    return O, OH, rhs


def hermitization_residual(ops, i, j, margin=2, form="derived"):
    _, OH, rhs = _hermitization_parts(ops, i, j, form)
    return _ires_m(ops, OH, rhs, margin)


def check_hermitization_identity(ops, margin=2, tol=DEFAULT_TOL, pairs=None, form="derived"):
    """{n_i n_{k,j} p_k}_H against its closed form, plus the antisymmetrized combination.

    Returns two reports: the closed form over all requested (i, j) (1-based),
    and {(n_i n_{k,j} - n_j n_{k,i}) p_k}_H = {.}_H(i,j) - {.}_H(j,i).
    """
    N = ops.N
    pairs = pairs or list(itertools.product(range(1, N + 1), repeat=2))
    res = 0.0
    per_pair = {}
    for i, j in pairs:
        r_ij = hermitization_residual(ops, i - 1, j - 1, margin, form)
        per_pair[f"{i},{j}"] = r_ij
        res = max(res, r_ij)
    anti = 0.0
    x, p, I = _raw(ops)
    r = ops.params.radius
    n = [xi / r for xi in x]
    for i, j in pairs:
        if i == j:
            continue
        _, Hij, _ = _hermitization_parts(ops, i - 1, j - 1, form)
        _, Hji, _ = _hermitization_parts(ops, j - 1, i - 1, form)
        O = sum(
            (n[i - 1] @ ((k == j - 1) * I - n[k] @ n[j - 1]) - n[j - 1] @ ((k == i - 1) * I - n[k] @ n[i - 1]))
            @ p[k]
            for k in range(N)
        ) / r
        anti = max(anti, _ires_m(ops, 0.5 * (O + O.conj().T), Hij - Hji, margin))
    return [
        _report(ops, f"hermitization({form})", res, margin, tol, detail=per_pair),
        _report(ops, "hermitization antisymmetric", anti, margin, tol),
    ]


def second_fcr_residuals(ops, alpha):
    """R_i(alpha) = [H, p_i] - i hbar (x_i H + H x_i) / r^2 for every axis."""
    H = ops.hamiltonian(alpha).data
    hbar, r = ops.params.hbar, ops.params.radius
    x, p, _ = _raw(ops)
    return [_comm(H, p[i]) - 1j * hbar * (x[i] @ H + H @ x[i]) / r ** 2 for i in range(ops.N)]


def alpha_slopes(ops):
    """dR_i/dalpha = -2 i hbar u x_i / r^2 with u = hbar^2/(2 m r^2)."""
    hbar, r = ops.params.hbar, ops.params.radius
    u = ops.params.energy_unit
    return [-2j * hbar * u * xi.data / r ** 2 for xi in ops.x]


def _max_interior(mats, ops, margin):
    m = interior_mask(ops.basis, margin)
    return max(float(np.max(np.abs(R[np.ix_(m, m)]))) for R in mats)


def check_second_fcr(ops, alpha, margin=2, tol=DEFAULT_TOL):
    """[H, p] = i hbar (x H + H x)/r^2 at the given alpha, and [H, x] = -i hbar p / m."""
    res = _max_interior(second_fcr_residuals(ops, alpha), ops, margin)
    H = ops.hamiltonian(alpha).data
    hbar, mass = ops.params.hbar, ops.params.mass
    hx = max(
        _ires_m(ops, _comm(H, ops.x[i].data), -1j * hbar * ops.p[i].data / mass, margin)
        for i in range(ops.N)
    )
    return [
        _report(ops, f"[H,p]=ihbar(xH+Hx)/r^2 (alpha={alpha:g})", res, margin, tol, alpha=float(alpha)),
        _report(ops, "[H,x]=-ihbar p/m", hx, margin, tol),
    ]


def extract_alpha(ops, margin=2, tol=ALPHA_TOL):
    """Least-squares alpha minimizing the second-category residual over interior entries.

    R(alpha) = R(0) + alpha C is affine, so the minimizer is
    -Re<C, R(0)> / <C, C>. The report's residual is the max-norm of R at the
    optimum; ``passed`` means alpha is within ``tol`` of (N-1)(N-3)/4.
    """
    m = interior_mask(ops.basis, margin)
    R0 = np.concatenate([R[np.ix_(m, m)].ravel() for R in second_fcr_residuals(ops, 0.0)])
    C = np.concatenate([S[np.ix_(m, m)].ravel() for S in alpha_slopes(ops)])
    cc = float(np.vdot(C, C).real)
    if cc < 1e-24:
        raise ArithmeticError("alpha direction is degenerate")
    alpha = float(-np.vdot(C, R0).real / cc)
    curve = [
        [alpha + d, float(np.max(np.abs(R0 + (alpha + d) * C)))]
        for d in (-1.0, -0.5, -0.1, 0.0, 0.1, 0.5, 1.0)
    ]
    at_opt = float(np.max(np.abs(R0 + alpha * C)))
    target = true_alpha(ops.N)
    return alpha, _report(
        ops, "extract_alpha |alpha-(N-1)(N-3)/4|", abs(alpha - target), margin, tol,
        alpha=alpha, alpha_curve=curve, detail={"residual_at_optimum": at_opt, "target": target},
    )


def true_alpha(N):
    return (N - 1) * (N - 3) / 4


def alpha_candidates(N):
    """The literature values of alpha(N); free parameters sampled at fixed values."""
    return [
        (1, "0", {}, 0.0),
        (2, "(N-1)^2/4", {}, (N - 1) ** 2 / 4),
        (3, "(1+4s^2)(N-1)^2/4", {"s": 0.0}, (N - 1) ** 2 / 4),
        (3, "(1+4s^2)(N-1)^2/4", {"s": 1.0}, 5 * (N - 1) ** 2 / 4),
        (4, "N^2/4", {}, N ** 2 / 4),
        (5, "(N-1)(N+1)/4", {}, (N - 1) * (N + 1) / 4),
        (6, "(N-1)N/4", {}, (N - 1) * N / 4),
        (7, "(N-3)(N+1)/4", {}, (N - 3) * (N + 1) / 4),
        (8, "(N-1)(N-2)beta", {"beta": 0.0}, 0.0),
        (8, "(N-1)(N-2)beta", {"beta": 0.25}, (N - 1) * (N - 2) / 4),
        (10, "(N-1)(N-3)/4", {}, true_alpha(N)),
    ]


@dataclass
class SurveyRow:
    candidate: int
    formula: str
    params: dict
    alpha: float
    residual: float
    passed: bool


def alpha_survey(ops, margin=2, tol=DEFAULT_TOL):
    rows = []
    for idx, formula, params, a in alpha_candidates(ops.N):
        res = _max_interior(second_fcr_residuals(ops, a), ops, margin)
        rows.append(SurveyRow(idx, formula, params, float(a), res, res < tol))
    return rows


def _L(x, p, i, j):
    return x[i] @ p[j] - x[j] @ p[i]


def check_so_algebra(ops, margins=(2, 4, 3), tol=DEFAULT_TOL):
    """so(N,1) closure of L_ij = x_i p_j - x_j p_i and P_i = r p_i."""
    x, p, I = _raw(ops)
    hbar, r, N = ops.params.hbar, ops.params.radius, ops.N
    P = [r * pi for pi in p]
    m_pp, m_ll, m_lp = margins
    pairs = [(i, j) for i in range(N) for j in range(N) if i < j]
    d = lambda a, b: float(a == b)  # noqa: E731

    pp = max(
        _ires_m(ops, _comm(P[i], P[j]), -1j * hbar * _L(x, p, i, j), m_pp) for i, j in pairs
    )
    ll = 0.0
    for (i, j), (k, l) in itertools.product(pairs, repeat=2):
        rhs = -1j * hbar * (
            -d(i, l) * _L(x, p, k, j) + d(i, k) * _L(x, p, l, j)
            + d(j, k) * _L(x, p, i, l) - d(j, l) * _L(x, p, i, k)
        )
        ll = max(ll, _ires_m(ops, _comm(_L(x, p, i, j), _L(x, p, k, l)), rhs, m_ll))
    lp = 0.0
    for (i, j), l in itertools.product(pairs, range(N)):
        rhs = 1j * hbar * (d(i, l) * P[j] - d(j, l) * P[i])
        lp = max(lp, _ires_m(ops, _comm(_L(x, p, i, j), P[l]), rhs, m_lp))
    return [
        _report(ops, "[P_i,P_j]=-ihbar L_ij", pp, m_pp, tol),
        _report(ops, "[L_ij,L_kl] so(N)", ll, m_ll, tol, detail={"relations": len(pairs) ** 2}),
        _report(ops, "[L_ij,P_l]=ihbar(d_il P_j-d_jl P_i)", lp, m_lp, tol, detail={"relations": len(pairs) * N}),
    ]


def run_all(ops, margin=2, tol=None):
    """Every identity check in a fixed order."""
    t = (lambda default: default) if tol is None else (lambda default: tol)
    reports = []
    reports += check_first_fcr(ops, margin, t(DEFAULT_TOL))
    reports.append(check_constraint(ops, margin, t(CONSTRAINT_TOL)))
    reports += check_hermitization_identity(ops, margin, t(DEFAULT_TOL))
    reports += check_second_fcr(ops, true_alpha(ops.N), margin, t(DEFAULT_TOL))
    reports += check_so_algebra(ops, (max(margin, 2), max(margin, 4), max(margin, 3)), t(DEFAULT_TOL))
    reports.append(extract_alpha(ops, margin, t(ALPHA_TOL))[1])
    return reports
