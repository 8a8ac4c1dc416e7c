import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from homspec.errors import DomainError, InvalidArgument
from homspec.fixtures import fixture_config
from homspec.medium import (Identity, LorentzLine, Lorentzian, Tabulated, intensity_transmission, optical_depth,
                            thin_sample_t2_from_fwhm, thin_sample_t2_from_nm, transfer_function)
from homspec.spectral import build_grid
from homspec.units import FS, nm_to_angular_detuning

from oracles import lorentz_h, nm_to_rad_s

GRID = build_grid(815.0, 2.5e14, 4096)

line_st = st.builds(
    LorentzLine.from_fs,
    st.floats(min_value=-15, max_value=15),
    st.floats(min_value=0, max_value=8),
    st.floats(min_value=20, max_value=2000),
)


def test_line_validation():
    with pytest.raises(InvalidArgument):
        LorentzLine(0.0, -0.1, 100 * FS)
    with pytest.raises(InvalidArgument):
        LorentzLine(0.0, 1.0, 0.0)
    with pytest.raises(InvalidArgument):
        Lorentzian([])
    with pytest.raises(InvalidArgument):
        Lorentzian([LorentzLine.from_fs(0, 1, 100)], sign=2)


def test_identity_is_unity():
    assert np.all(transfer_function(Identity(), GRID).values == 1)


def test_lorentzian_matches_direct_formula():
    lines = [LorentzLine.from_fs(7.5, 1.95, 620), LorentzLine.from_fs(-6.0, 7.2, 710)]
    h = transfer_function(Lorentzian(lines), GRID).values
    ref = lorentz_h(GRID.detunings, [(l.detuning_nm, l.optical_thickness, l.t2) for l in lines], 815.0)
    assert np.allclose(h, ref, rtol=1e-13, atol=0)


@pytest.mark.parametrize("alpha_l", [0.1, 1.0, 7.2])
def test_resonance_transmission_is_exp_minus_alpha_l(alpha_l):
    line = LorentzLine.from_fs(3.0, alpha_l, 400)
    omega = nm_to_rad_s(3.0, 815.0)
    h = transfer_function(Lorentzian([line]), build_grid(815.0, omega, 2)).values
    assert abs(h[1]) ** 2 == pytest.approx(np.exp(-alpha_l), rel=1e-12)


def test_sign_convention_mirrors_the_line():
    line = LorentzLine.from_fs(5.0, 2.0, 300)
    t_plus = intensity_transmission(Lorentzian([line], sign=1), GRID)
    t_minus = intensity_transmission(Lorentzian([line], sign=-1), GRID)
    assert np.allclose(t_plus, t_minus[::-1], rtol=1e-12)
    assert GRID.detunings[np.argmin(t_plus)] > 0


@given(st.lists(line_st, min_size=1, max_size=5))
@settings(max_examples=40, deadline=None)
def test_passive_medium_never_amplifies(lines):
    assert np.all(np.abs(transfer_function(Lorentzian(lines), GRID).values) <= 1 + 1e-15)


@given(st.lists(line_st, min_size=2, max_size=5))
@settings(max_examples=40, deadline=None)
def test_optical_depth_is_additive(lines):
    total = -np.log(intensity_transmission(Lorentzian(lines), GRID))
    parts = sum(-np.log(intensity_transmission(Lorentzian([l]), GRID)) for l in lines)
    assert np.allclose(total, parts, rtol=1e-9, atol=1e-9)


def test_optical_depth_direct_matches_log_transmission():
    med = Lorentzian(fixture_config("nd_yag").medium_object().lines)
    od = optical_depth(med, GRID)
    assert np.allclose(od, -np.log(intensity_transmission(med, GRID)), rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("t2_fs", [100.0, 300.0, 1000.0])
def test_thin_line_depth_width_is_two_over_t2(t2_fs):
    line = LorentzLine.from_fs(0.0, 0.1, t2_fs)
    gamma = 1 / (t2_fs * FS)
    g = build_grid(815.0, 20 * gamma, 200000)
    od = optical_depth(Lorentzian([line]), g)
    above = g.detunings[od >= 0.5 * od.max()]
    width = above[-1] - above[0]
    assert width == pytest.approx(2 * gamma, rel=0.02)


def test_tabulated_same_grid_passthrough():
    h = transfer_function(Lorentzian([LorentzLine.from_fs(2, 1, 300)]), GRID)
    assert np.array_equal(transfer_function(Tabulated(h), GRID).values, h.values)


def test_tabulated_interpolation_error_is_second_order():
    med = Lorentzian([LorentzLine.from_fs(2.0, 2.0, 300)])
    target = build_grid(815.0, 1e14, 2000)
    exact = transfer_function(med, target).values
    errs = []
    for n in (1024, 2048, 4096):
        coarse = build_grid(815.0, 1.2e14, n)
        approx = transfer_function(Tabulated(transfer_function(med, coarse)), target).values
        errs.append(np.max(np.abs(approx - exact)))
    # halving the spacing should cut the linear-interpolation error about 4x
    assert errs[0] / errs[1] > 3.0 and errs[1] / errs[2] > 3.0


def test_tabulated_out_of_range_is_an_error():
    small = build_grid(815.0, 1e13, 64)
    tab = Tabulated(transfer_function(Identity(), small))
    with pytest.raises(DomainError):
        transfer_function(tab, GRID)
    other = build_grid(800.0, 1e14, 64)
    with pytest.raises(DomainError):
        transfer_function(Tabulated(transfer_function(Identity(), other)), build_grid(815.0, 1e13, 64))


def test_thin_sample_t2_examples():
    # 1 nm at 808 nm corresponds to about 700 fs
    assert thin_sample_t2_from_nm(1.0, 808.0) / FS == pytest.approx(700.0, rel=0.05)
    # 12 nm at 818 nm evaluated directly
    dnu = 2.998e8 * 12e-9 / (818e-9) ** 2
    assert thin_sample_t2_from_nm(12.0, 818.0) == pytest.approx(1 / (np.pi * dnu), rel=1e-3)
    assert thin_sample_t2_from_nm(12.0, 818.0) / FS == pytest.approx(59.0, abs=1.0)
    assert thin_sample_t2_from_fwhm(2e12) == pytest.approx(0.5 * thin_sample_t2_from_fwhm(1e12))
    with pytest.raises(InvalidArgument):
        thin_sample_t2_from_fwhm(0.0)


def test_nm_conversion_is_linearized_formula():
    assert nm_to_angular_detuning(1.0, 815.0) == pytest.approx(nm_to_rad_s(1.0, 815.0), rel=1e-15)
