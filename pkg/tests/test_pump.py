import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from twistspdc import (
    InfeasibleWaist,
    InvalidParams,
    NormalizedPoint,
    OutOfRange,
    TgsmParams,
    TwistBoundViolation,
    beta_squared,
    delta_from_beta,
    is_physical,
    max_twist,
    mixture_model,
    params_from_normalized,
    pump_cm,
    pump_oam,
    purity,
    sample_component_means,
    symplectic_spectrum,
)
from twistspdc.pump import covariance_z_scores, feasible_waists, tgsm_matrix

K = 2 * math.pi / 400e-9
SIGMA = 50e-6
DELTA_SQ_01 = 4 * SIGMA**2 * 0.01 / 0.99  # delta^2 at beta = 0.1


@st.composite
def pump_params(draw):
    sigma = 10 ** draw(st.floats(-5, -3))
    beta = 10 ** draw(st.floats(-2, 0))
    t = draw(st.floats(0, 1))
    sign = draw(st.sampled_from([1, -1]))
    inv_R = draw(st.floats(0, 1e-2)) / sigma
    return params_from_normalized(NormalizedPoint(beta, t, sign), sigma, K, inv_R), beta, t


class TestParams:
    def test_rejects_bad_waist(self):
        with pytest.raises(InvalidParams):
            TgsmParams(sigma=0.0)

    def test_twist_bound(self):
        inv_d2 = 1 / DELTA_SQ_01
        TgsmParams(SIGMA, inv_d2, u=inv_d2 / K)
        TgsmParams(SIGMA, inv_d2, u=-inv_d2 / K * (1 + 1e-13))
        with pytest.raises(TwistBoundViolation):
            TgsmParams(SIGMA, inv_d2, u=inv_d2 / K * (1 + 1e-9))

    def test_coherent_forbids_twist(self):
        with pytest.raises(TwistBoundViolation):
            TgsmParams(SIGMA, u=1.0)

    def test_from_delta(self):
        p = TgsmParams.from_delta(SIGMA, 2 * SIGMA)
        assert p.beta_sq == pytest.approx(0.5)
        assert TgsmParams.from_delta(SIGMA).delta == math.inf

    def test_normalized_point_ranges(self):
        for bad in ((0.0, 0.0), (1.2, 0.0), (0.5, -0.1), (0.5, 1.1)):
            with pytest.raises(OutOfRange):
                NormalizedPoint(*bad)
        with pytest.raises(OutOfRange):
            NormalizedPoint(0.5, 0.5, twist_sign=0)


class TestPumpCM:
    def test_coherent(self):
        V = pump_cm(TgsmParams(SIGMA, k=K))
        s2 = SIGMA**2
        np.testing.assert_allclose(V, np.diag([s2, 0.25 / s2, s2, 0.25 / s2]), rtol=1e-15)

    def test_gsm(self):
        delta = 80e-6
        V = pump_cm(TgsmParams.from_delta(SIGMA, delta, k=K))
        tau2 = 1 / delta**2 + 0.25 / SIGMA**2
        np.testing.assert_allclose(V, np.diag([SIGMA**2, tau2, SIGMA**2, tau2]), rtol=1e-15)

    def test_twisted_example(self):
        p = params_from_normalized(NormalizedPoint(0.1, 1.0), SIGMA, K)
        V = pump_cm(p)
        assert V[1, 1] == pytest.approx(2.55025e11, rel=1e-6)
        assert V[0, 3] == pytest.approx(24.75, rel=1e-9)
        assert V[2, 1] == pytest.approx(-24.75, rel=1e-9)
        np.testing.assert_allclose(symplectic_spectrum(V).values, [0.5, 50.0], rtol=1e-9)
        assert is_physical(V)

    def test_layout_against_oracle(self):
        inv_R = 30.0
        p = params_from_normalized(NormalizedPoint(0.3, 0.7, -1), SIGMA, K, inv_R)
        expected, _ = oracles.tgsm(SIGMA, 0.3, 0.7, oracles.wavenumber(), inv_R, -1)
        expected = np.array(expected.tolist(), dtype=float)
        np.testing.assert_allclose(pump_cm(p), expected, rtol=1e-12, atol=1e-15)

    @settings(max_examples=100, deadline=None)
    @given(pump_params())
    def test_purity_is_beta_squared(self, drawn):
        p, beta, _ = drawn
        assert purity(pump_cm(p)) == pytest.approx(beta**2, rel=1e-9)
        assert p.beta_sq == pytest.approx(beta**2, rel=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(pump_params())
    def test_boundary_behaviour(self, drawn):
        p, beta, _ = drawn
        if beta == 1.0:
            return
        u_max = p.inv_delta_sq / p.k
        edge = tgsm_matrix(p.sigma, p.inv_delta_sq, p.inv_R, u_max, p.k)
        assert symplectic_spectrum(edge).min == pytest.approx(0.5, abs=1e-9)
        inside = tgsm_matrix(p.sigma, p.inv_delta_sq, p.inv_R, u_max * (1 - 1e-9), p.k)
        assert is_physical(inside)

    @pytest.mark.parametrize("beta", [0.01, 0.1, 0.5, 0.9])
    def test_unphysical_past_bound(self, beta):
        p = params_from_normalized(NormalizedPoint(beta, 1.0), SIGMA, K)
        outside = tgsm_matrix(p.sigma, p.inv_delta_sq, 0.0, p.u * (1 + 1e-6), p.k)
        assert not is_physical(outside)


class TestConversions:
    def test_beta_squared(self):
        assert beta_squared(SIGMA, math.inf) == 1.0
        assert beta_squared(SIGMA, 2 * SIGMA) == pytest.approx(0.5)
        assert beta_squared(SIGMA, math.sqrt(1.010101e-10)) == pytest.approx(0.01, rel=1e-6)

    def test_delta_from_beta(self):
        assert delta_from_beta(1.0, SIGMA) == math.inf
        assert delta_from_beta(1 / math.sqrt(2), SIGMA) == pytest.approx(2 * SIGMA, rel=1e-12)
        assert delta_from_beta(0.1, SIGMA) == pytest.approx(1.00504e-5, rel=1e-5)

    def test_delta_from_beta_range(self):
        for bad in (0.0, -0.5, 1.5):
            with pytest.raises(OutOfRange):
                delta_from_beta(bad, SIGMA)

    def test_max_twist(self):
        assert max_twist(K, math.inf) == 0.0
        assert max_twist(1.5707963e7, math.sqrt(1.010101e-10)) == pytest.approx(630.25, rel=1e-5)
        assert max_twist(K, 2e-5) == pytest.approx(max_twist(K, 1e-5) / 4, rel=1e-12)

    def test_params_from_normalized(self):
        p = params_from_normalized(NormalizedPoint(1.0, 0.8), SIGMA, K)
        assert p.u == 0.0 and p.delta == math.inf
        p = params_from_normalized(NormalizedPoint(0.1, 1.0), SIGMA, K)
        assert p.u == pytest.approx(630.25, rel=1e-5)
        assert p.u == pytest.approx(max_twist(K, p.delta), rel=1e-12)
        p = params_from_normalized(NormalizedPoint(0.1, 0.0), SIGMA, K)
        assert p.u == 0.0
        assert p.delta**2 == pytest.approx(1.010101e-10, rel=1e-6)

    @settings(max_examples=200, deadline=None)
    @given(beta=st.floats(0.01, 1.0), t=st.floats(0, 1), sigma=st.floats(1e-5, 1e-3))
    def test_round_trip(self, beta, t, sigma):
        p = params_from_normalized(NormalizedPoint(beta, t), sigma, K)
        assert math.sqrt(beta_squared(sigma, p.delta)) == pytest.approx(beta, rel=1e-12)
        if beta < 1.0:
            assert p.u / max_twist(K, p.delta) == pytest.approx(t, rel=1e-12, abs=1e-15)


class TestOAM:
    def test_untwisted(self):
        p = params_from_normalized(NormalizedPoint(0.4, 0.0), SIGMA, K)
        assert pump_oam(p) == 0.0

    def test_example(self):
        p = params_from_normalized(NormalizedPoint(0.1, 1.0), SIGMA, K)
        assert pump_oam(p) == pytest.approx(49.5, rel=1e-9)

    def test_sign(self):
        plus = params_from_normalized(NormalizedPoint(0.2, 0.6, 1), SIGMA, K)
        minus = params_from_normalized(NormalizedPoint(0.2, 0.6, -1), SIGMA, K)
        assert pump_oam(minus) == -pump_oam(plus)

    @settings(max_examples=50, deadline=None)
    @given(pump_params())
    def test_read_from_matrix(self, drawn):
        p, _, _ = drawn
        V = pump_cm(p)
        assert pump_oam(p) == V[0, 3] - V[2, 1]
        assert pump_oam(p) == pytest.approx(2 * p.k * p.u * p.sigma**2, rel=1e-12, abs=1e-300)


def _scaled_max(A, ref):
    d = np.sqrt(np.diag(ref))
    return np.max(np.abs(A) / np.outer(d, d))


def _scaled_min_eig(A, ref):
    d = np.sqrt(np.diag(ref))
    return np.min(np.linalg.eigvalsh(A / np.outer(d, d)))


class TestMixture:
    def test_coherent_williamson(self):
        p = TgsmParams(SIGMA, k=K)
        m = mixture_model(p)
        np.testing.assert_array_equal(m.ensemble_cov, np.zeros((4, 4)))
        np.testing.assert_allclose(m.component_cm, pump_cm(p), rtol=1e-12)

    def test_coherent_symmetric_waist(self):
        p = TgsmParams(SIGMA, k=K)
        m = mixture_model(p, mode="symmetric-waist")
        assert _scaled_max(m.ensemble_cov, pump_cm(p)) < 1e-12

    def test_gsm_symmetric_waist(self):
        p = params_from_normalized(NormalizedPoint(0.5, 0.0), SIGMA, K)
        waist = SIGMA * math.sqrt(0.5)
        m = mixture_model(p, mode="symmetric-waist", waist=waist)
        s0 = waist**2
        np.testing.assert_allclose(
            m.component_cm, np.diag([s0, 0.25 / s0, s0, 0.25 / s0]), rtol=1e-15
        )
        assert _scaled_min_eig(m.ensemble_cov, pump_cm(p)) >= -1e-12
        assert _scaled_max(m.covariance - pump_cm(p), pump_cm(p)) < 1e-12

    def test_williamson_at_bound(self):
        p = params_from_normalized(NormalizedPoint(0.1, 1.0), SIGMA, K)
        m = mixture_model(p)
        V = pump_cm(p)
        assert purity(m.component_cm) == pytest.approx(1.0, abs=1e-9)
        assert _scaled_min_eig(m.ensemble_cov, V) >= -1e-12
        assert np.linalg.norm(m.covariance - V) / np.linalg.norm(V) < 1e-9
        assert _scaled_max(m.covariance - V, V) < 1e-9

    def test_symmetric_waist_infeasible(self):
        p = params_from_normalized(NormalizedPoint(0.05, 1.0), SIGMA, K)
        with pytest.raises(InfeasibleWaist) as info:
            mixture_model(p, mode="symmetric-waist")
        assert info.value.min_eigenvalue < 0

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            mixture_model(TgsmParams(SIGMA, k=K), mode="nope")

    def test_feasible_waists(self):
        p = params_from_normalized(NormalizedPoint(0.5, 0.0), SIGMA, K)
        waists, ok = feasible_waists(p, n_points=50)
        assert len(waists) == 50 and waists[-1] == pytest.approx(SIGMA)
        # a GSM beam admits the waist sigma * sqrt(beta), so the feasible set is non-empty
        assert ok.any()

    @settings(max_examples=60, deadline=None)
    @given(pump_params())
    def test_williamson_contracts(self, drawn):
        p, _, _ = drawn
        m = mixture_model(p)
        V = pump_cm(p)
        assert purity(m.component_cm) == pytest.approx(1.0, abs=1e-9)
        assert _scaled_max(m.covariance - V, V) < 1e-9
        assert _scaled_min_eig(m.ensemble_cov, V) >= -1e-12


class TestSampling:
    def test_zero_ensemble(self):
        m = mixture_model(TgsmParams(SIGMA, k=K))
        samples = sample_component_means(m, 100, seed=1)
        assert samples.shape == (100, 4)
        np.testing.assert_array_equal(samples, 0.0)

    def test_deterministic(self):
        p = params_from_normalized(NormalizedPoint(0.5, 0.5), SIGMA, K)
        m = mixture_model(p)
        a = sample_component_means(m, 1000, seed=7)
        b = sample_component_means(m, 1000, seed=7)
        c = sample_component_means(m, 1000, seed=8)
        assert a.tobytes() == b.tobytes()
        assert not np.array_equal(a, c)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            sample_component_means(mixture_model(TgsmParams(SIGMA, k=K)), 0)

    def test_z_scores(self):
        p = params_from_normalized(NormalizedPoint(0.5, 0.5), SIGMA, K)
        m = mixture_model(p)
        samples = sample_component_means(m, 100_000, seed=0)
        z = covariance_z_scores(samples, m.ensemble_cov)
        assert np.all(np.abs(z) <= 5)

    def test_z_scores_detect_wrong_target(self):
        p = params_from_normalized(NormalizedPoint(0.5, 0.5), SIGMA, K)
        m = mixture_model(p)
        samples = sample_component_means(m, 100_000, seed=0)
        z = covariance_z_scores(samples, 1.1 * m.ensemble_cov)
        assert np.max(np.abs(z)) > 5

    def test_z_scores_oracle(self):
        # standard normal samples: Var(x_i x_j) = 1 + delta_ij
        rng = np.random.default_rng(4)
        x = rng.standard_normal((50_000, 2))
        z = covariance_z_scores(x, np.eye(2))
        emp = x.T @ x / len(x)
        assert z[0, 1] == pytest.approx(emp[0, 1] / math.sqrt(1 / len(x)), rel=1e-9)
        assert z[0, 0] == pytest.approx((emp[0, 0] - 1) / math.sqrt(2 / len(x)), rel=1e-9)
