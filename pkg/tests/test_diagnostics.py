import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vefs import diagnostics as dg
from vefs import fields, spectral
from vefs.constitutive import ModelParams
from vefs.errors import CutoffExceeded, DegenerateDenominator, SizeMismatch


def smooth_tensor(N, shift=0.0):
    X, Y = spectral.make_grid(N).mesh()
    return np.stack([2 + np.cos(X) * np.sin(Y) + shift, 0.3 * np.sin(X + Y), 1.5 + np.cos(2 * Y)])


def test_energy_constants():
    N = 16
    p = ModelParams(s=0.5)
    kin, ela = dg.energy(np.zeros((2, N, N)), fields.identity(N), p)
    assert kin == 0 and np.isclose(ela, 0.5 / 2 * 2 * (2 * np.pi) ** 2)


def test_energy_cellular_flow():
    X, Y = spectral.make_grid(32).mesh()
    u = np.stack([-np.sin(X) * np.cos(Y), np.cos(X) * np.sin(Y)])
    kin, _ = dg.energy(u, fields.identity(32), ModelParams())
    assert np.isclose(kin, np.pi ** 2, rtol=1e-14)


def test_elastic_energy_from_square_root(rng):
    b = smooth_tensor(16)
    c = fields.square(b)
    p = ModelParams(s=0.5)
    norm2 = b[0] ** 2 + 2 * b[1] ** 2 + b[2] ** 2
    _, ela = dg.energy(np.zeros((2, 16, 16)), c, p)
    assert np.isclose(ela, 0.25 * (2 * np.pi) ** 2 * norm2.mean(), rtol=1e-14)


def test_s_tensor():
    assert np.allclose(dg.s_tensor(fields.identity(4), 100.0), fields.identity(4) / 0.98)
    c = smooth_tensor(8)
    assert np.max(np.abs(dg.s_tensor(c, 1e12) - c)) <= 1e-10
    bad = fields.identity(8)
    bad[0, 3, 5] = 200.0
    with pytest.raises(CutoffExceeded) as info:
        dg.s_tensor(bad, 100.0)
    x = -np.pi + 2 * np.pi * np.array([3, 5]) / 8
    assert np.allclose(info.value.location, x)


@given(scale=st.floats(1.0, 40.0))
def test_s_tensor_monotone(scale):
    c = np.array([1.0, 0.2, 0.5])[:, None, None] * np.ones((3, 2, 2))
    small = dg.s_tensor(c, 100.0)
    big = dg.s_tensor(c * scale * 1.01, 100.0)
    assert np.linalg.norm(big) > np.linalg.norm(small)


def test_l1_self_and_zero():
    fine = smooth_tensor(32)
    coarse = spectral.restrict(fine, 16)
    err = dg.l1_rel_error(coarse, fine)
    assert err.relative and err.value <= 1e-13
    z = dg.l1_rel_error(np.ones((3, 8, 8)), np.zeros((3, 16, 16)))
    assert not z.relative and z.value == 3 * 64


def test_l1_known_offset():
    fine = smooth_tensor(32)
    delta = 1e-3
    coarse = spectral.restrict(fine, 16) + delta * fields.identity(16)
    ref = spectral.restrict(fine, 16)
    expect = delta * 2 * 16 * 16 / sum(abs(v) for v in ref.ravel())
    assert np.isclose(dg.l1_rel_error(coarse, fine).value, expect, rtol=1e-10)


def test_l1_triangle_inequality(rng):
    exact = smooth_tensor(32)
    ref = spectral.restrict(exact, 16)
    a = ref + 1e-2 * rng.standard_normal(ref.shape)
    b = ref + 1e-2 * rng.standard_normal(ref.shape)
    den = np.abs(ref).sum()
    assert dg.l1_rel_error(a, exact).value + np.abs(a - b).sum() / den >= \
        dg.l1_rel_error(b, exact).value - 1e-15


def test_l1_size_mismatch():
    with pytest.raises(SizeMismatch):
        dg.l1_rel_error(np.zeros((3, 12, 12)), np.ones((3, 32, 32)))
    with pytest.raises(SizeMismatch):
        dg.l1_rel_error(np.zeros((2, 16, 16)), np.ones((3, 32, 32)))


def test_profiles():
    fine = smooth_tensor(32)
    coarse = spectral.restrict(fine, 16)
    prof = dg.pointwise_error_profile(coarse, fine)
    assert prof.shape == (16, 3) and np.all(prof[:, 1] <= 1e-13)
    off = dg.pointwise_error_profile(coarse + 0.25, fine, component=2, line="y0")
    assert np.allclose(off[:, 1], 0.25)
    assert np.allclose(prof[:, 0], spectral.make_grid(16).x)
    with pytest.raises(ValueError):
        dg.pointwise_error_profile(coarse, fine, line="diag")


def test_profile_reads_x0_column():
    fine = smooth_tensor(16)
    ref = fine.copy()
    coarse = fine.copy()
    coarse[0, 8, :] += np.arange(16)  # x = 0 is index N/2
    prof = dg.pointwise_error_profile(coarse, ref, component=0, line="x0")
    assert np.allclose(prof[:, 1], np.arange(16))


def test_improvement():
    assert np.isclose(dg.improvement(0.1, 0.035), 0.65)
    assert dg.improvement(0.2, 0.2) == 0
    assert dg.improvement(0.2, 0.0) == 1
    with pytest.raises(DegenerateDenominator):
        dg.improvement(0.0, 0.1)


def test_spd_monitor():
    min_eig, max_tr, _ = dg.spd_monitor(fields.identity(8), "direct_c")
    assert min_eig == 1 and max_tr == 2
    b = smooth_tensor(8)
    b[0, 2, 3] = -5.0  # indefinite b still squares to a semidefinite c
    min_eig, _, _ = dg.spd_monitor(b, "sqrt_b")
    assert min_eig >= -1e-14
    c = fields.identity(8)
    c[0, 1, 6] = -0.5
    min_eig, _, loc = dg.spd_monitor(c, "direct_c")
    assert min_eig == -0.5
    assert np.allclose(loc, -np.pi + 2 * np.pi * np.array([1, 6]) / 8)


def test_report_series_increasing():
    rep = dg.ExperimentReport()
    rep.record(dg.DiagnosticRow(0.0, 1, 1, 2, 1))
    rep.record(dg.DiagnosticRow(0.5, 1, 1, 2, 1))
    with pytest.raises(ValueError):
        rep.record(dg.DiagnosticRow(0.5, 1, 1, 2, 1))
    assert rep.completed
