import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fawna import model
from fawna.model import (AdmissibilityError, LinkConfig, NumericsError, ParameterError,
                         QuantizerModel, MB_MAX)
from oracles import clb_unit_literal, phi_theorem_literal

FIG2 = dict(power_over_n0=25e6, bandwidth=1e6, interfaces=5)

SETTINGS = dict(max_examples=300, deadline=None)

p_n0 = st.floats(1e3, 1e10)
bandwidth = st.floats(1e4, 1e8)
interfaces = st.integers(1, 32)
mb = st.floats(1.0, MB_MAX)
rate = st.floats(1.0, 40.0)


def unit(p, w, r, l=None, fiber=None):
    if fiber is None:
        fiber = (l if l is not None else 8.0) * r * w
    return LinkConfig.from_ratio(p, w, fiber, interfaces=r)


# -- construction ------------------------------------------------------------

@pytest.mark.parametrize("field,value", [
    ("power", -1.0), ("noise_density", 0.0), ("bandwidth", 0.0),
    ("fiber_rate", -5.0), ("bandwidth", math.nan),
])
def test_config_rejects_bad_fields(field, value):
    kw = dict(power=1.0, noise_density=1.0, bandwidth=1.0, gains=(1,), fiber_rate=10.0)
    kw[field] = value
    with pytest.raises(ParameterError) as exc:
        LinkConfig(**kw)
    assert exc.value.field == field


def test_config_rejects_empty_gains():
    with pytest.raises(ParameterError, match="gains"):
        LinkConfig(1.0, 1.0, 1.0, (), 10.0)


@pytest.mark.parametrize("mb_value", [0.99, 3.0, MB_MAX + 1e-9])
def test_quantizer_model_range(mb_value):
    with pytest.raises(ParameterError, match="mb_product"):
        QuantizerModel(1, mb_value)


def test_asymptotic_quantizer_is_unit_product():
    q = QuantizerModel.asymptotic()
    assert q.mb_product == 1.0 and q.is_asymptotic
    with pytest.raises(ParameterError):
        QuantizerModel(math.inf, 1.5)


# -- closed forms -------------------------------------------------------------

def test_wireless_capacity_fig2():
    cfg = unit(25e6, 1e6, 5)
    # 1e6 * log2(1 + 5 * 25)
    assert model.wireless_capacity(cfg) == pytest.approx(1e6 * math.log2(126), rel=1e-14)
    assert model.wireless_capacity(cfg) == pytest.approx(6.977e6, rel=1e-4)


def test_wireless_capacity_degenerate():
    assert model.wireless_capacity(unit(0.0, 1e6, 3)) == 0.0
    cfg = LinkConfig(1.0, 1.0, 1.0, (0, 0, 0), 10.0)
    assert model.wireless_capacity(cfg) == 0.0


def test_psi_values():
    q = QuantizerModel(1, 1.0)
    cfg = LinkConfig.from_ratio(1.0, 1.0, 1.0, interfaces=1)  # rho = 1
    assert model.psi(cfg, q, 1.0) == pytest.approx(1 / 3, rel=1e-15)
    assert model.psi(cfg, q, 0.0) == 0.0
    assert model.psi(cfg, q, math.inf) == 1.0


def test_phi_unit_gain_hand_value():
    q = QuantizerModel(1, 1.0)
    cfg = LinkConfig.from_ratio(1.0, 1.0, 1.0, interfaces=1)
    # log2(2) - log2(1 + 1/3)
    assert model.phi_unit_gain(cfg, q, 1.0) == pytest.approx(1 - math.log2(4 / 3), rel=1e-14)
    assert model.phi_unit_gain(cfg, q, 1.0) == pytest.approx(0.585, abs=5e-4)


def test_phi_at_zero_rate_is_whole_capacity():
    q = QuantizerModel(1, 1.0)
    cfg = unit(25e6, 1e6, 5)
    assert model.phi_unit_gain(cfg, q, 0.0) == pytest.approx(model.wireless_capacity(cfg), rel=1e-14)
    assert model.evaluate(cfg, q, 0.0).lower_bound == pytest.approx(0.0, abs=1e-6)


def test_phi_vanishes():
    q = QuantizerModel.scalar()
    cfg = LinkConfig.from_ratio(3e6, 1e6, 10e6, gains=(1, 0.5j, 2 - 1j))
    assert model.phi_general(cfg, q, math.inf) == 0.0
    assert model.phi_unit_gain(unit(3e6, 1e6, 3), q, math.inf) == 0.0
    assert model.phi_general(cfg.replace(power=0.0), q, 4.0) == 0.0


def test_phi_unit_gain_rejects_general_gains():
    cfg = LinkConfig.from_ratio(3e6, 1e6, 10e6, gains=(1, 2))
    with pytest.raises(ParameterError):
        model.phi_unit_gain(cfg, QuantizerModel.scalar(), 4.0)


@pytest.mark.parametrize("gains", [
    (1.0,), (1, 0.5j, 2 - 1j), (0.1, 0.0, 3.0, 1 + 1j), tuple(np.linspace(0.2, 2, 9)),
])
@pytest.mark.parametrize("l", [1.0, 2.5, 6.0, 10.0])
def test_phi_general_matches_dense_inverse(gains, l):
    q = QuantizerModel(1, 1.3)
    cfg = LinkConfig.from_ratio(40e6, 2e6, 1e9, gains=gains)
    expected = phi_theorem_literal(40e6, 2e6, gains, 1.3, l)
    assert model.phi_general(cfg, q, l) == pytest.approx(expected, rel=1e-9)


def test_diag_rank_one_solve_matches_numpy():
    rng = np.random.default_rng(3)
    for r in (1, 2, 7, 20):
        diag = rng.uniform(0.5, 3, r)
        v = rng.standard_normal(r) + 1j * rng.standard_normal(r)
        b = rng.standard_normal(r) + 1j * rng.standard_normal(r)
        coef = rng.uniform(0.1, 5)
        x, denom = model.diag_rank_one_solve(diag, coef, v, b)
        mat = np.diag(diag) + coef * np.outer(v, v.conj())
        np.testing.assert_allclose(x, np.linalg.solve(mat, b), rtol=1e-10)
        assert denom == pytest.approx(np.linalg.det(mat).real / np.prod(diag), rel=1e-10)


def test_diag_rank_one_solve_singular():
    with pytest.raises(NumericsError):
        model.diag_rank_one_solve([1.0, 1.0], -0.5, [1.0, 1.0], [1.0, 0.0])


def test_coarse_quantizer_clamps_to_zero():
    q = QuantizerModel.scalar()
    assert q.distortion_factor(1.0) > 1
    cfg = LinkConfig.from_ratio(2e6, 1e6, 1e6, interfaces=1)  # l = 1
    assert model.psi(cfg, q, 1.0) < 0
    rep = model.capacity_lower_bound(cfg, q)
    assert rep.lower_bound == 0.0 and rep.clamped
    assert rep.lower_bound == max(0.0, rep.upper_bound - rep.phi)


def test_singular_inner_matrix_saturates_penalty():
    q = QuantizerModel.scalar()
    cfg = LinkConfig.from_ratio(50e6, 1e6, 5e6, interfaces=5)  # l = 1, r rho psi < -1
    with pytest.raises(NumericsError):
        model.phi_unit_gain(cfg, q, 1.0)
    rep = model.capacity_lower_bound(cfg, q)
    assert rep.clamped and rep.lower_bound == 0.0 and rep.phi == rep.upper_bound


def test_capacity_lower_bound_fig2_limit():
    cfg = LinkConfig.from_ratio(25e6, 1e6, 1e9, interfaces=5)
    rep = model.capacity_lower_bound(cfg, QuantizerModel(1, 1.0))
    assert rep.quantizer_rate == 200.0
    assert (rep.upper_bound - rep.lower_bound) / rep.upper_bound < 1e-6
    assert rep.per_interface_snr == (25.0,) * 5


def test_capacity_lower_bound_boundary_and_inadmissible():
    q = QuantizerModel(1, 1.0)
    cfg = LinkConfig.from_ratio(25e6, 1e8 / 3, 1e8, interfaces=3)  # W = C_f / r
    rep = model.capacity_lower_bound(cfg, q)
    assert rep.quantizer_rate == pytest.approx(1.0) and rep.admissible
    with pytest.raises(AdmissibilityError) as exc:
        model.capacity_lower_bound(cfg.replace(bandwidth=4e7), q)
    assert exc.value.r_max == 2
    assert exc.value.w_max == pytest.approx(1e8 / 3)
    assert "r_max=2" in str(exc.value)


def test_envelope_limits_and_halving():
    q = QuantizerModel(1, 1.0)
    cfg = unit(25e6, 1e6, 5)
    up, lo = model.phi_decay_envelope(cfg, q, 400.0)
    assert up == pytest.approx(0.0, abs=1e-60) and lo == pytest.approx(0.0, abs=1e-60)
    for l in (20, 25, 30):
        u1, _ = model.phi_decay_envelope(cfg, q, l)
        u2, _ = model.phi_decay_envelope(cfg, q, l + 1)
        assert u2 / u1 == pytest.approx(0.5, rel=1e-4)


def test_unit_gain_report_matches_literal_formula():
    for p, w, r, cf in [(20e6, 5e6, 7, 100e6), (100e6, 54.5e6, 2, 200e6), (25e6, 1e6, 5, 2e7)]:
        rep = model.capacity_lower_bound(LinkConfig.from_ratio(p, w, cf, interfaces=r),
                                         QuantizerModel(1, 1.0))
        assert rep.lower_bound == pytest.approx(clb_unit_literal(p, w, r, cf, 1.0), rel=1e-12)


# -- properties ---------------------------------------------------------------

@given(p=p_n0, w=bandwidth, r=interfaces, m=mb, l=rate)
@settings(**SETTINGS)
def test_general_equals_unit_gain(p, w, r, m, l):
    q = QuantizerModel(1, m)
    cfg = unit(p, w, r, l)
    try:
        expected = model.phi_unit_gain(cfg, q, l)
    except NumericsError:
        with pytest.raises(NumericsError):
            model.phi_general(cfg, q, l)
        return
    got = model.phi_general(cfg, q, l)
    assert abs(got - expected) / max(expected, 1e-300) < 1e-9


@given(p=p_n0, w=bandwidth, r=interfaces, m=mb, l=st.floats(1.0, 60.0))
@settings(**SETTINGS)
def test_ordering(p, w, r, m, l):
    rep = model.capacity_lower_bound(unit(p, w, r, l), QuantizerModel(1, m))
    assert 0.0 <= rep.lower_bound <= rep.upper_bound
    assert rep.lower_bound == max(0.0, min(rep.upper_bound, rep.upper_bound - rep.phi))


@given(p=p_n0, w=bandwidth, r=interfaces, l=st.floats(4.0, 40.0),
       m1=mb, m2=mb)
@settings(**SETTINGS)
def test_phi_monotone_in_mb_product(p, w, r, l, m1, m2):
    lo_m, hi_m = sorted((m1, m2))
    cfg = unit(p, w, r, l)
    f = lambda m: model.phi(cfg, QuantizerModel(1, m), l)
    assert f(1.0) <= f(lo_m) <= f(hi_m) <= f(MB_MAX)


@given(p=p_n0, w=bandwidth, r=interfaces, m=mb, l=st.floats(1.0, 40.0),
       factor=st.floats(1.0001, 1e3))
@settings(**SETTINGS)
def test_lower_bound_monotone_in_power(p, w, r, m, l, factor):
    q = QuantizerModel(1, m)
    cfg = unit(p, w, r, l)
    lo = model.capacity_lower_bound(cfg, q).lower_bound
    hi = model.capacity_lower_bound(cfg.replace(power=p * factor), q).lower_bound
    assert hi >= lo


@given(p=p_n0, w=bandwidth, r=interfaces, m=mb, l=st.floats(10.0, 40.0))
@settings(**SETTINGS)
def test_phi_inside_envelope(p, w, r, m, l):
    q = QuantizerModel(1, m)
    cfg = unit(p, w, r, l)
    up, lo = model.phi_decay_envelope(cfg, q, l)
    val = model.phi_unit_gain(cfg, q, l)
    assert lo <= val * (1 + 1e-12)
    assert val <= up * (1 + 1e-12)


@given(p=p_n0, n0=st.floats(1e-21, 1e3), w=bandwidth, r=interfaces, m=mb, l=rate)
@settings(**SETTINGS)
def test_reports_depend_on_power_ratio_only(p, n0, w, r, m, l):
    q = QuantizerModel(1, m)
    cfg = LinkConfig(p * n0, n0, w, (1.0,) * r, l * r * w)
    doubled = cfg.replace(power=2 * cfg.power, noise_density=2 * cfg.noise_density)
    assert model.capacity_lower_bound(cfg, q) == model.capacity_lower_bound(doubled, q)


@given(p=p_n0, w=bandwidth, r=interfaces, m=mb)
@settings(**SETTINGS)
def test_lower_bound_approaches_upper_as_fiber_grows(p, w, r, m):
    rep = model.capacity_lower_bound(unit(p, w, r, 200.0), QuantizerModel(1, m))
    assert (rep.upper_bound - rep.lower_bound) / rep.upper_bound < 1e-6
