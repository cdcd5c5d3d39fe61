import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kapa.metrics import (
    EnhancementReport,
    curve_to_csv,
    learning_curve,
    mse,
    output_snr_db,
    snr_db,
    spectrogram_csv,
    spectrogram_to_csv,
)
from kapa.signal_io import SignalBuffer, mix_at_snr, synth_testbed, TestbedSpec

from oracles import brute_snr_db


class TestMse:
    def test_zero(self):
        assert mse([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_plain_mean(self):
        assert mse([1.0, 2.0], [0.0, 0.0]) == 2.5

    def test_dof(self):
        assert mse([1.0, 2.0], [0.0, 0.0], dof_p=1) == 5.0

    def test_dof_too_large(self):
        with pytest.raises(ValueError):
            mse([1.0, 2.0], [0.0, 0.0], dof_p=2)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            mse([1.0], [1.0, 2.0])

    def test_equals_full_window_curve_point(self, rng):
        e = rng.standard_normal(300)
        assert mse(e, np.zeros(300)) == learning_curve(e, 1000)[0][1]
        assert mse(e, np.zeros(300)) == np.mean(e * e)


class TestSnr:
    def test_equal_power(self):
        assert snr_db([1.0, -1.0], [1.0, 1.0]) == 0.0

    def test_twenty_db(self):
        assert snr_db([1.0, 1.0], [0.1, 0.1]) == pytest.approx(20.0, abs=1e-12)
        assert brute_snr_db([1.0, 1.0], [0.1, 0.1]) == pytest.approx(20.0, abs=1e-12)

    def test_infinite(self):
        assert snr_db([1.0, 1.0], [0.0, 0.0]) == math.inf

    @given(st.floats(1e-3, 1e3) | st.floats(-1e3, -1e-3), st.integers(0, 10**6))
    def test_scale_invariance(self, alpha, seed):
        r = np.random.default_rng(seed)
        s, v = r.standard_normal(64), r.standard_normal(64)
        assert snr_db(alpha * s, alpha * v) == pytest.approx(snr_db(s, v), abs=1e-9)

    def test_output_snr_identity(self):
        c = SignalBuffer([0.1, -0.3, 0.2])
        assert output_snr_db(c, c) == math.inf

    def test_output_snr_zero_estimate(self):
        c = SignalBuffer([0.1, -0.3, 0.2])
        assert output_snr_db(c, np.zeros(3)) == 0.0

    def test_output_snr_closes_mix(self):
        clean, noise = synth_testbed(TestbedSpec(length=2000, seed=5))
        noisy, _ = mix_at_snr(clean, noise, 5.0)
        assert abs(output_snr_db(clean, noisy) - 5.0) < 1e-9

    def test_output_snr_length(self):
        with pytest.raises(ValueError):
            output_snr_db([1.0, 2.0], [1.0])


class TestLearningCurve:
    def test_constant(self):
        curve = learning_curve(np.full(100, 0.3), 10)
        assert all(v == pytest.approx(0.09, rel=1e-14) for _, v in curve)
        assert [i for i, _ in curve] == list(range(10, 101, 5))

    def test_geometric_decay_non_increasing(self):
        curve = learning_curve(0.99 ** np.arange(2000), 50)
        vals = [v for _, v in curve]
        assert all(b <= a for a, b in zip(vals, vals[1:]))

    def test_against_brute_force(self, rng):
        e = rng.standard_normal(97)
        for i, v in learning_curve(e, 8):
            assert v == pytest.approx(sum(x * x for x in e[i - 8:i]) / 8, rel=1e-12)

    def test_window_longer_than_sequence(self):
        assert learning_curve([1.0, 3.0], 10) == [(2, 5.0)]

    def test_window_one(self):
        assert learning_curve([1.0, 2.0, 3.0], 1) == [(1, 1.0), (2, 4.0), (3, 9.0)]

    def test_bad_window(self):
        with pytest.raises(ValueError):
            learning_curve([1.0], 0)

    def test_csv(self):
        assert curve_to_csv([(2, 5.0)]) == "index,mse\n2,5.0\n"


class TestSpectrogram:
    def test_tone_at_bin_center(self):
        frame, fs, b = 256, 8000, 20
        t = np.arange(4096) / fs
        x = np.sin(2 * np.pi * b * fs / frame * t)
        S = spectrogram_csv(SignalBuffer(x, fs), frame)
        assert S.shape == ((4096 - frame) // (frame // 2) + 1, frame // 2 + 1)
        for row in S:
            assert np.argmax(row) == b
            others = np.delete(row, [b - 1, b, b + 1])
            assert row[b] >= 10 * others.max()

    def test_zero(self):
        assert np.all(spectrogram_csv(np.zeros(600), 128, 64) == 0.0)

    def test_too_short(self):
        with pytest.raises(ValueError, match="shorter"):
            spectrogram_csv(np.zeros(100), 256)

    def test_bad_hop(self):
        with pytest.raises(ValueError):
            spectrogram_csv(np.zeros(600), 128, 0)

    def test_csv_header(self):
        text = spectrogram_to_csv(spectrogram_csv(np.ones(8), 4, 4), 8000)
        lines = text.splitlines()
        assert lines[0] == "0,2000,4000" and len(lines) == 3


class TestReport:
    def test_text_and_csv(self):
        rep = EnhancementReport("kapa", {"eta": 0.2, "seed": 3}, 5.0, 7.25, 1e-3, dictionary_size=10)
        assert "output SNR:     7.2500 dB" in rep.to_text()
        lines = rep.to_csv().splitlines()
        assert lines[0] == "algorithm,input_snr_db,output_snr_db,mse_final,dictionary_size,config"
        assert lines[1] == "kapa,5.0000,7.2500,1.000000e-03,10,eta=0.2 seed=3"
