"""Spectrum of the constrained sphere Hamiltonian and its closed-form levels."""

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import PhysicalParams


class SpectrumError(ValueError):
    pass


@dataclass
class SpectrumTable:
    energies: np.ndarray
    multiplicities: np.ndarray
    levels: np.ndarray
    N: int
    lmax: int
    alpha: float
    params: PhysicalParams
    tol: float
    eigenvalues: np.ndarray = field(repr=False, default=None)

    def rows(self):
        return list(zip(self.levels.tolist(), self.energies.tolist(), self.multiplicities.tolist()))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["l", "energy", "multiplicity"])
        for l, e, m in self.rows():
            w.writerow([l, repr(float(e)), m])
        return buf.getvalue()

    def to_dict(self):
        return {
            "N": self.N,
            "l_max": self.lmax,
            "alpha": self.alpha,
            "hbar": self.params.hbar,
            "mass": self.params.mass,
            "radius": self.params.radius,
            "tol": self.tol,
            "levels": [{"l": l, "energy": e, "multiplicity": m} for l, e, m in self.rows()],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def level_dimension(N, l):
    if N == 2:
        return 1 if l == 0 else 2
    if N == 3:
        return 2 * l + 1
    raise SpectrumError(f"no level dimension for N={N}")


def analytic_energy(N, l, alpha, params=PhysicalParams()):
    """hbar^2/(2 m r^2) (l(l + N - 2) + alpha)."""
    return params.energy_unit * (l * (l + N - 2) + alpha)


def _infer_level(N, x):
    # l(l + N - 2) = x  ->  l = (-(N - 2) + sqrt((N - 2)^2 + 4x)) / 2
    disc = max((N - 2) ** 2 + 4 * x, 0.0)
    return (-(N - 2) + np.sqrt(disc)) / 2


def spectrum(H, alpha=0.0, tol=None, params=None):
    """Group eigenvalues of a hermitian H into levels.

    ``tol`` defaults to 1e-8 hbar^2/(2 m r^2). Level labels are inferred
    from the closed form; groups that do not land on an integer l get
    level -1.
    """
    params = params or PhysicalParams()
    unit = params.energy_unit
    tol = 1e-8 * unit if tol is None else tol
    try:
        w = np.linalg.eigvalsh(H.data)
    except np.linalg.LinAlgError as exc:
        raise SpectrumError("eigensolver failed") from exc
    groups = [[w[0]]]
    for e in w[1:]:
        if e - groups[-1][-1] <= tol:
            groups[-1].append(e)
        else:
            groups.append([e])
    energies = np.array([np.mean(g) for g in groups])
    mult = np.array([len(g) for g in groups])
    levels = []
    for e in energies:
        lf = _infer_level(H.basis.N, e / unit - alpha)
        l = int(round(lf))
        levels.append(l if abs(lf - l) < 1e-6 else -1)
    return SpectrumTable(
        energies=energies, multiplicities=mult, levels=np.array(levels), N=H.basis.N,
        lmax=H.basis.lmax, alpha=float(alpha), params=params, tol=tol, eigenvalues=w,
    )


def compare_to_analytic(table, params=None, alpha=None):
    """Largest |E_computed - E_analytic| over all eigenvalues, matched in sorted order."""
    params = params or table.params
    alpha = table.alpha if alpha is None else alpha
    N = table.N
    exact = np.sort(np.concatenate([
        np.full(level_dimension(N, l), analytic_energy(N, l, alpha, params))
        for l in range(table.lmax + 1)
    ]))
    got = table.eigenvalues if table.eigenvalues is not None else np.repeat(table.energies, table.multiplicities)
    if got.size != exact.size:
        raise SpectrumError(f"spectrum has {got.size} values, closed form has {exact.size}")
    return float(np.max(np.abs(np.sort(got) - exact)))


def degeneracy_mismatches(table):
    """Levels whose multiplicity differs from the level dimension."""
    return [
        (int(l), int(m)) for l, m in zip(table.levels, table.multiplicities)
        if l < 0 or m != level_dimension(table.N, l)
    ]
