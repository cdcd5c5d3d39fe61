import math

import numpy as np
import pytest

from kapa.kernel_filters import (
    KernelFilterConfig,
    KernelFilterState,
    kapa_predict,
    kapa_step,
    nkapa_step,
    run_kernel,
)
from kapa.kernels import KernelSpec, kernel_eval
from kapa.linear_filters import LinearFilterConfig, LinearFilterState, apa_step, napa_step, run_linear
from kapa.signal_io import SignalBuffer, make_regressors

from oracles import literal_kapa, literal_kernel_filter

GAUSS = KernelSpec("gaussian", gaussian_a=1.0)
LIN = KernelSpec("linear")


def fresh(L=1, K=10, eta=0.2, eps=1e-3, kernel=GAUSS, algo="kapa", cap=None):
    cfg = KernelFilterConfig(kernel=kernel, step_eta=eta, reg_epsilon=eps, window_K=K, order_L=L, dict_cap=cap, algorithm=algo)
    return KernelFilterState.for_config(cfg), cfg


class TestPredict:
    def test_empty(self):
        s, cfg = fresh(L=2)
        assert kapa_predict(s, GAUSS, [0.3, 0.1]) == 0.0

    def test_single_center(self):
        s, cfg = fresh(L=2)
        kapa_step(s, cfg, [0.3, -0.4], 1.0)
        assert kapa_predict(s, GAUSS, [0.3, -0.4]) == pytest.approx(0.2, abs=1e-16)

    def test_two_centers(self):
        s, cfg = fresh(L=1, K=1, eta=1.0)
        kapa_step(s, cfg, [0.0], 1.0)
        kapa_step(s, cfg, [1.0], math.exp(-1.0) - 1.0)
        np.testing.assert_allclose(s.coeffs, [1.0, -1.0], atol=1e-15)
        assert kapa_predict(s, GAUSS, [0.0]) == pytest.approx(1.0 - math.exp(-1.0), abs=1e-12)
        assert 1.0 - math.exp(-1.0) == pytest.approx(0.632121, abs=1e-6)

    def test_length_mismatch(self):
        s, _ = fresh(L=2)
        with pytest.raises(ValueError, match="length mismatch"):
            kapa_predict(s, GAUSS, [1.0])


class TestKapaStep:
    def test_first_step(self):
        s, cfg = fresh(L=1)
        s, y, e = kapa_step(s, cfg, [0.0], 1.0)
        assert (y, e) == (0.0, 1.0)
        assert s.coeffs.tolist() == [0.2]

    def test_second_step_hand_trace(self):
        s, cfg = fresh(L=1, K=2)
        kapa_step(s, cfg, [0.0], 1.0)
        s, y, e = kapa_step(s, cfg, [1.0], 0.0)
        ei = math.exp(-1.0)
        assert y == pytest.approx(0.2 * ei, abs=1e-15)
        assert y == pytest.approx(0.073576, abs=1e-6)
        np.testing.assert_allclose(s.coeffs, [0.36, -0.04 * ei], atol=1e-15)
        assert s.coeffs[1] == pytest.approx(-0.014715, abs=1e-6)
        # oracle agrees exactly
        hist, outs = literal_kapa([[0.0], [1.0]], [1.0, 0.0], GAUSS, 0.2, 2)
        assert hist[-1] == s.coeffs.tolist()
        assert outs[-1] == (y, e)

    def test_window_one_freezes_immediately(self, rng):
        s, cfg = fresh(L=3, K=1)
        before = []
        for _ in range(20):
            kapa_step(s, cfg, rng.standard_normal(3) * 0.3, rng.standard_normal())
            assert s.coeffs[:-1].tolist() == before
            before = s.coeffs.tolist()

    @pytest.mark.parametrize("kernel", [GAUSS, LIN, KernelSpec("polynomial", poly_degree=3), KernelSpec("gaussian", gaussian_a=4.0)])
    @pytest.mark.parametrize("K", [1, 2, 5])
    def test_matches_literal_pseudocode_exactly(self, rng, kernel, K):
        L = 3
        us, ds = rng.standard_normal((60, L)) * 0.4, rng.standard_normal(60)
        s, cfg = fresh(L=L, K=K, kernel=kernel)
        outs = [kapa_step(s, cfg, u, d)[1:] for u, d in zip(us, ds)]
        hist, ref = literal_kapa(us.tolist(), ds.tolist(), kernel, 0.2, K)
        assert outs == ref
        assert s.coeffs.tolist() == hist[-1]

    def test_freeze_rule(self, rng):
        K, n = 4, 40
        s, cfg = fresh(L=2, K=K)
        hist = []
        for _ in range(n):
            kapa_step(s, cfg, rng.standard_normal(2) * 0.5, rng.standard_normal())
            hist.append(s.coeffs.tolist())
        # hist[k-1] holds a(k); unit n (1-based) is final after step n + K - 1
        for unit in range(1, n + 1):
            final_step = unit + K - 1
            for k in range(final_step + 1, n + 1):
                assert hist[k - 1][unit - 1] == hist[min(final_step, n) - 1][unit - 1]

    def test_first_step_predictor(self, rng):
        s, cfg = fresh(L=4, eta=0.2)
        u1 = rng.standard_normal(4) * 0.3
        kapa_step(s, cfg, u1, 0.8)
        for v in rng.standard_normal((20, 4)) * 0.3:
            assert kapa_predict(s, GAUSS, v) == 0.2 * 0.8 * kernel_eval(GAUSS, v, u1)

    def test_non_finite(self):
        s, cfg = fresh(L=1)
        with pytest.raises(ValueError, match="non-finite"):
            kapa_step(s, cfg, [np.nan], 1.0)

    def test_state_sizes(self, rng):
        s, cfg = fresh(L=2, K=3)
        for k in range(1, 10):
            kapa_step(s, cfg, rng.standard_normal(2), 0.1)
            assert len(s) == len(s.coeffs) == s.centers.shape[0] == k
            assert s.window_gram.shape == (min(k, 3),) * 2


class TestNkapaStep:
    def test_first_step(self):
        s, cfg = fresh(L=1, eps=1.0, algo="nkapa")
        s, y, e = nkapa_step(s, cfg, [0.5], 1.0)
        assert s.coeffs[0] == pytest.approx(0.1, abs=1e-16)

    def test_window_one_scaling(self, rng):
        eps = 0.05
        kernel = KernelSpec("polynomial", poly_degree=2)
        s, cfg = fresh(L=3, K=1, eps=eps, kernel=kernel, algo="nkapa")
        for _ in range(30):
            u = rng.standard_normal(3) * 0.5
            _, y, e = nkapa_step(s, cfg, u, rng.standard_normal())
            assert s.coeffs[-1] == pytest.approx(0.2 * e / (kernel_eval(kernel, u, u) + eps), rel=1e-13)

    def test_requires_epsilon(self):
        s, cfg = fresh(L=1, eps=0.0)
        with pytest.raises(ValueError, match="reg_epsilon"):
            nkapa_step(s, cfg, [1.0], 1.0)
        with pytest.raises(ValueError, match="reg_epsilon"):
            KernelFilterConfig(algorithm="nkapa", reg_epsilon=0.0)

    def test_matches_literal(self, rng):
        us, ds = rng.standard_normal((50, 3)) * 0.4, rng.standard_normal(50)
        s, cfg = fresh(L=3, K=4, eps=0.01, algo="nkapa")
        outs = np.array([nkapa_step(s, cfg, u, d)[1:] for u, d in zip(us, ds)])
        ref, (_, coeffs) = literal_kernel_filter(us, ds, GAUSS, 0.2, 4, eps=0.01)
        np.testing.assert_allclose(outs, ref, rtol=0, atol=1e-12)
        np.testing.assert_allclose(s.coeffs, coeffs, rtol=0, atol=1e-12)


class TestLinearKernelEquivalence:
    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("normalized", [False, True])
    def test_dual_form(self, seed, normalized):
        r = np.random.default_rng(seed)
        L, K = int(r.integers(1, 9)), int(r.integers(1, 9))
        us, ds = r.standard_normal((300, L)) * 0.15, r.standard_normal(300) * 0.5
        lin = LinearFilterState(LinearFilterConfig(order_L=L, window_K=K, algorithm="napa" if normalized else "apa"))
        ks, kc = fresh(L=L, K=K, kernel=LIN, algo="nkapa" if normalized else "kapa")
        lstep, kstep = (napa_step, nkapa_step) if normalized else (apa_step, kapa_step)
        for u, d in zip(us, ds):
            _, y1, e1 = lstep(lin, u, d)
            _, y2, e2 = kstep(ks, kc, u, d)
            assert abs(y1 - y2) < 1e-8 and abs(e1 - e2) < 1e-8
        # the expansion is the linear weight vector in dual form
        np.testing.assert_allclose(ks.coeffs @ ks.centers, lin.weights, atol=1e-8)


class TestRunKernel:
    def test_unbounded_dictionary(self, rng):
        x = SignalBuffer(rng.standard_normal(1000) * 0.1)
        run = run_kernel(KernelFilterConfig(), x, x)
        assert run.dictionary_size == 1000 == len(run.state)

    def test_cap(self, rng):
        x = SignalBuffer(rng.standard_normal(1000) * 0.1)
        run = run_kernel(KernelFilterConfig(dict_cap=100), x, x)
        assert run.dictionary_size == 100
        assert run.state.evictions == 900
        np.testing.assert_array_equal(run.state.centers, make_regressors(x, 10)[-100:])

    @pytest.mark.parametrize("algo,eps", [("kapa", None), ("nkapa", 0.01)])
    @pytest.mark.parametrize("cap", [3, 5, 12])
    def test_cap_matches_literal(self, rng, algo, eps, cap):
        K = 3
        us, ds = rng.standard_normal((80, 2)) * 0.5, rng.standard_normal(80)
        s, cfg = fresh(L=2, K=K, cap=cap, algo=algo, eps=eps or 1e-3)
        step = nkapa_step if algo == "nkapa" else kapa_step
        outs = np.array([step(s, cfg, u, d)[1:] for u, d in zip(us, ds)])
        ref, (centers, coeffs) = literal_kernel_filter(us, ds, GAUSS, 0.2, K, eps=eps, cap=cap)
        np.testing.assert_allclose(outs, ref, rtol=0, atol=1e-12)
        np.testing.assert_allclose(s.coeffs, coeffs, rtol=0, atol=1e-12)
        np.testing.assert_array_equal(s.centers, np.array(centers))

    def test_cap_validation(self):
        with pytest.raises(ValueError, match="dict_cap"):
            KernelFilterConfig(window_K=10, dict_cap=5)

    def test_deterministic(self, rng):
        x, d = SignalBuffer(rng.standard_normal(400) * 0.2), SignalBuffer(rng.standard_normal(400) * 0.2)
        a = run_kernel(KernelFilterConfig(algorithm="nkapa"), x, d)
        b = run_kernel(KernelFilterConfig(algorithm="nkapa"), x, d)
        assert a.to_csv() == b.to_csv()

    def test_csv_summary(self, rng):
        x = SignalBuffer(rng.standard_normal(20) * 0.2)
        text = run_kernel(KernelFilterConfig(), x, x).to_csv()
        lines = text.splitlines()
        assert lines[0] == "k,y,e" and len(lines) == 22
        assert lines[-1].startswith("# final: dictionary_size=20 kernel=gaussian gaussian_a=1.0 coeff_l1=")

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            run_kernel(KernelFilterConfig(), SignalBuffer([1.0]), SignalBuffer([1.0, 2.0]))

    def test_nonlinear_target_favours_kernel(self):
        r = np.random.default_rng(11)
        x = r.standard_normal(4000) * 0.3
        w = r.standard_normal(10)
        X = make_regressors(SignalBuffer(x), 10)
        d = np.tanh(X @ w) + 0.01 * r.standard_normal(4000)
        inp, des = SignalBuffer(x), SignalBuffer(d)
        tail = slice(-400, None)
        kapa = run_kernel(KernelFilterConfig(), inp, des)
        apa = run_linear(LinearFilterConfig(algorithm="apa"), inp, des)
        assert np.mean(kapa.e[tail] ** 2) < np.mean(apa.e[tail] ** 2)
