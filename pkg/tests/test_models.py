import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from flrd.errors import ConfigError, ModelValidationError, SingularityError, ValidationError
from flrd.models import (BasisSpec, FarimaRational, LongMemorySymbol, SpectralModel, TaperedRational, alpha_eval,
                         autocovariances, covariance_symbol, fractional_coefficients, fractional_noise_model,
                         load_model, lrd_asymptote, m_symbol_eval, ma_coefficients, model_from_config,
                         spectral_density_symbol, validate_assumptions)
from oracles import acov_quadpack

INV_2PI = 1 / (2 * np.pi)


def farima(L=1, ar=(), ma=(), sig=1.0, kernel="exact_diff", family="constant", bounds=(0.01, 0.99), dom=None):
    return SpectralModel(BasisSpec(L), LongMemorySymbol(family, *bounds), FarimaRational(np.full(L, sig), ar, ma),
                         kernel, dom)


def near_white(L=1, kernel="power_law"):
    """alpha = 1e-12 stands in for the excluded alpha = 0."""
    return fractional_noise_model(L, kernel, sigma_eigs=1.0, bounds=(1e-12, 0.99), theta_domain=[[1e-12, 0.99]])


# --------------------------------------------------------------------------- alpha

def test_alpha_families():
    m = farima(L=3)
    assert alpha_eval(m, 2, [0.4]) == 0.4
    m = farima(L=3, family="log_decay", dom=[[0.0, 0.5], [0.0, 0.5]])
    assert alpha_eval(m, 1, [0.2, 0.2]) == pytest.approx(0.4, abs=1e-15)
    m = farima(L=3, family="exponential", dom=[[0.0, 0.5], [0.0, 0.5]])
    assert alpha_eval(m, 2, [0.2, 0.3]) == pytest.approx(0.2 + 0.3 * math.exp(-1), abs=1e-15)
    assert alpha_eval(m, 2, [0.2, 0.3]) == pytest.approx(0.31036, abs=1e-5)


def test_alpha_rejects_out_of_range():
    m = farima(L=3, family="log_decay", dom=[[0.0, 0.9], [0.0, 0.9]])
    with pytest.raises(ModelValidationError, match="IV\\(i\\)"):
        m.alpha([0.8, 0.8])
    with pytest.raises(ValidationError):
        farima().alpha([1.2])
    with pytest.raises(ValidationError):
        LongMemorySymbol("quadratic")


@given(st.floats(0.01, 0.45), st.floats(0.0, 0.45))
def test_alpha_within_bounds_on_domain(t1, t2):
    for fam in ("log_decay", "exponential"):
        m = farima(L=5, family=fam, bounds=(0.01, 0.9), dom=[[0.01, 0.45], [0.0, 0.45]])
        a = m.alpha([t1, t2])
        assert np.all((a >= 0.01) & (a <= 0.9))


def test_two_parameter_families_identifiable():
    for fam in ("log_decay", "exponential"):
        m = farima(L=3, family=fam, dom=[[0.05, 0.45], [0.0, 0.4]])
        th = np.array([[a, b] for a in np.linspace(0.05, 0.45, 5) for b in np.linspace(0, 0.4, 5)])
        al = np.array([m.alpha(t) for t in th])
        d = np.abs(al[:, None, :] - al[None, :, :]).max(axis=2)
        assert np.all(d[~np.eye(len(th), dtype=bool)] > 1e-6)


# --------------------------------------------------------------------------- short memory

def test_farima_symbol_values():
    m = farima()
    assert m_symbol_eval(m, 1.3, 1) == pytest.approx(INV_2PI, abs=1e-15)
    m = farima(ma=[0.5])
    assert m_symbol_eval(m, 0.0, 1) == pytest.approx(0.125 / np.pi, abs=1e-15)
    phi = 0.5
    m = farima(ar=[phi], sig=2.0)
    w = 0.7
    assert m_symbol_eval(m, w, 1) == pytest.approx(2 * INV_2PI / (1 - 2 * phi * np.cos(w) + phi**2), rel=1e-13)


def test_farima_per_component_coefficients():
    ms = FarimaRational([1.0, 0.25], ar=[[0.5], []], ma=[[], [1.0, 0.3]])
    assert ms.ar[1].size == 0 and ms.ma[0].size == 0
    z = np.exp(-1j * 0.4)
    assert ms(0.4, 2) == pytest.approx(0.25 * INV_2PI * abs(z + 0.3 * z**2) ** 2, rel=1e-13)
    with pytest.raises(ValidationError):
        FarimaRational([1.0, 1.0], ar=[[0.5]])


def test_tapered_symbol():
    ts = TaperedRational([[1.0]], [[1.0]], [1.0], "cosine")
    assert ts(np.pi, 1) == pytest.approx(0.0, abs=1e-15)
    assert ts(0.0, 1) == 1.0
    w = np.linspace(-np.pi, np.pi, 11)
    np.testing.assert_allclose(ts.h(w), ts.h(-w))
    tri = TaperedRational([[1.0]], [[1.0]], [1.0], "triangular")
    assert tri(np.pi, 1) == 0.0 and tri(-np.pi / 2, 1) == pytest.approx(0.5)
    # P = 1 + lambda, Q = 2 + omega^2
    ts = TaperedRational([[1.0], [1.0]], [[2.0, 1.0]], [3.0], "cosine")
    assert ts(0.5, 1) == pytest.approx(4 / 2.25 * np.cos(0.25) ** 2, rel=1e-13)
    with pytest.raises(ModelValidationError):
        TaperedRational([[1.0]], [[0.0]], [1.0])(0.3, 1)


# --------------------------------------------------------------------------- density

def test_density_values():
    m = farima()
    assert spectral_density_symbol(m, np.pi, 1, [0.4]) == pytest.approx(INV_2PI * 2**-0.4, rel=1e-13)
    assert spectral_density_symbol(m, np.pi, 1, [0.4]) == pytest.approx(0.120617, abs=1e-6)
    pl = farima(kernel="power_law")
    r = spectral_density_symbol(pl, 0.01, 1, [0.4]) / spectral_density_symbol(m, 0.01, 1, [0.4])
    assert abs(r - 1) < 1e-4
    with pytest.raises(SingularityError):
        spectral_density_symbol(m, 0.0, 1, [0.4])
    nw = near_white()
    assert spectral_density_symbol(nw, 2.0, 1, [1e-12]) == pytest.approx(INV_2PI, rel=1e-11)


@given(st.floats(1e-4, np.pi), st.floats(0.05, 0.95))
def test_density_positive_and_even(w, a):
    m = farima(ar=[0.3], ma=[1.0, -0.2])
    assert spectral_density_symbol(m, w, 1, [a]) > 0
    assert spectral_density_symbol(m, w, 1, [a]) == pytest.approx(spectral_density_symbol(m, -w, 1, [a]), rel=1e-12)


# --------------------------------------------------------------------------- covariances

def test_covariance_symbol_white():
    nw = near_white()
    assert covariance_symbol(nw, 0, 1, [1e-12]) == pytest.approx(1.0, abs=1e-10)
    assert abs(covariance_symbol(nw, 5, 1, [1e-12])) < 1e-10


def test_covariance_power_law_tail():
    m = farima(kernel="power_law", sig=1.0)
    r = covariance_symbol(m, 100, 1, [0.5])
    assert r == pytest.approx(0.3989 * 100**-0.5, rel=0.05)


@pytest.mark.parametrize("kind,alpha,ar,ma", [("exact_diff", 0.4, (), ()), ("exact_diff", 0.7, (0.5,), (1.0, 0.3)),
                                              ("power_law", 0.3, (), ()), ("power_law", 0.6, (-0.4,), ())])
def test_covariance_routes_match_quadpack(kind, alpha, ar, ma):
    m = farima(ar=ar, ma=ma, sig=1.3, kernel=kind)
    msym = lambda w: m.mshort(w, 1)
    lags = [0, 1, 7, 64, 300]
    oracle = np.array([acov_quadpack(msym, alpha, kind, t) for t in lags])
    fft = autocovariances(m, [alpha], 300, "fft")[lags, 0]
    np.testing.assert_allclose(fft, oracle, rtol=5e-6)
    quad = [covariance_symbol(m, t, 1, [alpha]) for t in lags]
    np.testing.assert_allclose(quad, oracle, rtol=1e-7)
    if kind == "exact_diff":
        closed = autocovariances(m, [alpha], 300, "closed")[lags, 0]
        np.testing.assert_allclose(closed, oracle, rtol=1e-10)
    else:
        with pytest.raises(ValidationError):
            autocovariances(m, [alpha], 3, "closed")


def test_closed_fractional_noise_variance():
    m = farima(sig=1.0)
    d = 0.2
    r0 = math.gamma(1 - 2 * d) / math.gamma(1 - d) ** 2
    assert autocovariances(m, [0.4], 0, "closed")[0, 0] == pytest.approx(r0, rel=1e-14)
    assert r0 == pytest.approx(1.0986855396, rel=1e-10)


def test_hole_correction_matters():
    m = farima(sig=1.0)
    with_hole = covariance_symbol(m, 0, 1, [0.9])
    without = covariance_symbol(m, 0, 1, [0.9], hole_correction=False)
    exact = autocovariances(m, [0.9], 0, "closed")[0, 0]
    assert abs(with_hole - exact) < 1e-8 * exact < abs(without - exact)


def test_lrd_asymptote():
    m = farima(kernel="power_law", sig=1.0)
    amp = lrd_asymptote(m, 1, 1, [0.5])
    assert amp == pytest.approx(2 * math.sqrt(math.pi) * math.sin(math.pi / 4) / (2 * math.pi), rel=1e-14)
    assert amp == pytest.approx(0.39894, abs=1e-5)
    small = farima(kernel="power_law", bounds=(1e-6, 0.99), dom=[[1e-6, 0.99]])
    assert lrd_asymptote(small, 1, 1, [1e-6]) < 1e-5
    ex = farima(sig=1.0)
    ratio = covariance_symbol(ex, 400, 1, [0.3]) / lrd_asymptote(ex, 400, 1, [0.3])
    assert abs(ratio - 1) < 0.10
    with pytest.raises(ValidationError):
        lrd_asymptote(m, 0, 1, [0.5])


# --------------------------------------------------------------------------- MA representation

def test_fractional_coefficients():
    a = fractional_coefficients(0.25, 5)
    assert a[0] == 1 and a[1] == 0.25 and a[2] == pytest.approx(0.15625, abs=1e-15)
    j = np.arange(1, 6)
    ref = np.exp([math.lgamma(k + 0.25) - math.lgamma(k + 1) - math.lgamma(0.25) for k in j])
    np.testing.assert_allclose(a[1:], ref, rtol=1e-13)


def test_ma_coefficients():
    m = farima(sig=1.0)
    b = ma_coefficients(m, 1, [0.5], 10)
    np.testing.assert_allclose(b, fractional_coefficients(0.25, 10), rtol=1e-15)
    m = farima(ar=[0.5], bounds=(1e-12, 0.99), dom=[[1e-12, 0.99]])
    np.testing.assert_allclose(ma_coefficients(m, 1, [1e-12], 20), 0.5 ** np.arange(21), atol=1e-10)
    with pytest.raises(ValidationError):
        ma_coefficients(farima(ar=[0.5, 0.1], ma=[1.0, 0.2]), 1, [0.4], 3)
    ts = SpectralModel(BasisSpec(1), LongMemorySymbol(), TaperedRational([[1.0]], [[1.0]], [1.0]))
    with pytest.raises(ValidationError):
        ma_coefficients(ts, 1, [0.4], 10)


def test_ma_weights_reproduce_covariance():
    m = farima(ar=[0.4], ma=[1.0, 0.5], sig=0.7)
    b = ma_coefficients(m, 1, [0.3], 200000)
    r = [0.7 * np.dot(b[: b.size - t], b[t:]) for t in (0, 3)]
    np.testing.assert_allclose(r, autocovariances(m, [0.3], 3, "closed")[[0, 3], 0], rtol=2e-3)


# --------------------------------------------------------------------------- assumptions

def test_validate_fractional_noise():
    rep = validate_assumptions(farima(L=3))
    assert rep.slow_variation == 0.0 and rep.warnings == []
    assert rep.m_bounds[0] > 0
    assert all(np.isfinite(v) for v in rep.integrability.values())


def test_validate_root_failures():
    with pytest.raises(ModelValidationError, match="roots"):
        validate_assumptions(farima(ar=[1 / 1.01 * 1.0201]))  # root 0.99
    with pytest.raises(ModelValidationError, match="roots"):
        validate_assumptions(farima(ar=[1.01]))
    with pytest.raises(ModelValidationError, match="share a root"):
        validate_assumptions(farima(ar=[0.5], ma=[1.0, -0.5]))
    with pytest.raises(ModelValidationError, match="roots"):
        validate_assumptions(farima(ma=[1.0, 2.0]))


def test_validate_alpha_bound_failure():
    with pytest.raises(ModelValidationError, match="IV\\(i\\)"):
        validate_assumptions(farima(bounds=(0.01, 1.0), dom=[[0.01, 0.99]]))


def test_validate_tapered_warns_or_passes():
    ts = SpectralModel(BasisSpec(2), LongMemorySymbol(), TaperedRational([[1.0]], [[1.0, 4.0]], [1.0, 2.0]))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rep = validate_assumptions(ts)
    assert rep.m_bounds[0] > 0
    steep = SpectralModel(BasisSpec(1), LongMemorySymbol(), TaperedRational([[1.0]], [[1e-6, 1.0]], [1.0]))
    with pytest.warns(UserWarning, match="slowly varying"):
        validate_assumptions(steep)


# --------------------------------------------------------------------------- config

def test_model_config_roundtrip(tmp_path):
    cfg = {"basis": {"L": 3}, "alpha": {"family": "log_decay", "bounds": [0.05, 0.95]},
           "short_memory": {"type": "farima", "ar": [0.2]}, "kernel": "exact_diff",
           "theta_domain": [[0.1, 0.4], [0.0, 0.3]]}
    p = tmp_path / "m.json"
    p.write_text(json.dumps(cfg))
    m = load_model(p)
    assert m.L == 3 and m.p == 2
    np.testing.assert_allclose(m.mshort.sigma_eigs, [1, 0.25, 1 / 9])
    tcfg = {"basis": {"L": 2}, "alpha": {"family": "constant"},
            "short_memory": {"type": "tapered", "P": [[1.0]], "Q": [[1.0]], "taper": "triangular"}}
    assert isinstance(model_from_config(tcfg).mshort, TaperedRational)


@pytest.mark.parametrize("drop", ["basis", "alpha", "short_memory"])
def test_model_config_missing_field(drop):
    cfg = {"basis": {"L": 1}, "alpha": {"family": "constant"}, "short_memory": {"type": "farima"}}
    del cfg[drop]
    with pytest.raises(ConfigError, match=drop):
        model_from_config(cfg)


def test_model_config_invalid_values():
    with pytest.raises(ConfigError):
        model_from_config({"basis": {"L": 1}, "alpha": {"family": "cubic"}, "short_memory": {"type": "farima"}})
    with pytest.raises(ConfigError):
        model_from_config({"basis": {"L": 1}, "alpha": {"family": "constant"}, "short_memory": {"type": "arma"}})
