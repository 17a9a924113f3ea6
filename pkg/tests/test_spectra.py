import json

import numpy as np
import pytest

from geomomentum.geometry import PhysicalParams
from geomomentum.sphere_ops import BasisSpec, OperatorMatrix, build_hamiltonian
from geomomentum.spectra import (
    compare_to_analytic,
    degeneracy_mismatches,
    level_dimension,
    spectrum,
)


def _table(N, lmax, alpha, params=PhysicalParams()):
    H = build_hamiltonian(BasisSpec(N, lmax), params, alpha)
    return spectrum(H, alpha=alpha, params=params)


def test_sphere_series():
    t = _table(3, 10, 0.0)
    assert t.energies[:4].tolist() == [0.0, 1.0, 3.0, 6.0]
    assert t.multiplicities[:4].tolist() == [1, 3, 5, 7]
    assert t.levels.tolist() == list(range(11))
    assert t.multiplicities.sum() == BasisSpec(3, 10).size
    assert compare_to_analytic(t) < 1e-12
    assert not degeneracy_mismatches(t)


def test_circle_series():
    t = _table(2, 16, -0.25)
    assert t.energies[0] == pytest.approx(-1 / 8)
    assert t.energies[1] == pytest.approx(3 / 8)
    assert t.multiplicities[:3].tolist() == [1, 2, 2]
    assert compare_to_analytic(t) < 1e-12
    assert not degeneracy_mismatches(t)


@pytest.mark.parametrize("N", [2, 3])
def test_differences_independent_of_alpha(N):
    a = _table(N, 8, 0.0)
    b = _table(N, 8, 0.73)
    assert np.max(np.abs(np.diff(a.energies) - np.diff(b.energies))) < 1e-12
    assert np.max(np.abs(b.energies - a.energies - 0.73 * 0.5)) < 1e-12


def test_perturbed_hamiltonian_deviation():
    b = BasisSpec(3, 6)
    H = build_hamiltonian(b, PhysicalParams(), 0.0)
    rng = np.random.default_rng(1)
    E = rng.standard_normal((b.size, b.size)) + 1j * rng.standard_normal((b.size, b.size))
    E = 0.5 * (E + E.conj().T)
    E *= 1e-6 / np.linalg.norm(E, 2)
    t = spectrum(OperatorMatrix(H.data + E, b, "H+E", hermitian=True), alpha=0.0)
    dev = compare_to_analytic(t)
    # Weyl: eigenvalue shifts bounded by the spectral norm of the perturbation
    assert 1e-8 < dev <= 1e-6 + 1e-15


def test_scaled_units():
    params = PhysicalParams(hbar=2.0, mass=0.5, radius=3.0)
    t = _table(3, 6, 0.0, params)
    unit = 4.0 / (2 * 0.5 * 9.0)
    assert np.allclose(t.energies, unit * np.array([l * (l + 1) for l in range(7)]))
    assert not degeneracy_mismatches(t)


def test_level_dimension():
    assert [level_dimension(2, l) for l in range(4)] == [1, 2, 2, 2]
    assert [level_dimension(3, l) for l in range(4)] == [1, 3, 5, 7]


def test_outputs():
    t = _table(3, 4, 0.0)
    lines = t.to_csv().splitlines()
    assert lines[0] == "l,energy,multiplicity"
    assert lines[2] == "1,1.0,3"
    d = json.loads(t.to_json())
    assert d["levels"][2] == {"l": 2, "energy": 3.0, "multiplicity": 5}
