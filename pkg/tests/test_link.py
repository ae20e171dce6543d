import numpy as np
import pytest
from scipy import optimize, special, stats

import chaoslink as cl
from chaoslink import analysis as an
from chaoslink.link import (
    BerResult,
    ModulationConfig,
    SymbolStats,
    UnstableCouplingError,
    ber_measure,
    ber_predict,
    ber_sweep,
    channel_awgn,
    fit_symbol_gaussians,
    integrate_and_dump,
    mask_transmit,
    nrz_waveform,
    optimal_threshold,
    prbs,
    run_link,
    unmask_receive,
)

PARAMS = cl.DEFAULT_PARAMS
CFG = ModulationConfig(amplitude=0.1, samples_per_bit=50)


class TestPrbs:
    def test_degree3_window_property(self):
        # one full period of a degree-3 m-sequence: every nonzero 3-bit
        # window appears exactly once cyclically
        bits = prbs(7, seed=5, degree=3)
        doubled = np.concatenate([bits, bits])
        windows = {tuple(doubled[k : k + 3]) for k in range(7)}
        assert len(windows) == 7
        assert (0, 0, 0) not in windows

    def test_balance(self):
        bits = prbs(100_000, seed=12345)
        assert abs(bits.mean() - 0.5) < 0.01

    def test_deterministic(self):
        assert np.array_equal(prbs(1000, seed=42), prbs(1000, seed=42))

    def test_zero_seed_rejected(self):
        with pytest.raises(ValueError):
            prbs(10, seed=0)
        with pytest.raises(ValueError):
            prbs(10, seed=1 << 23)  # zero modulo the register size

    def test_unknown_degree_rejected(self):
        with pytest.raises(ValueError):
            prbs(10, seed=1, degree=5)


class TestMaskTransmit:
    def test_additive_identity_bit_exact(self):
        bits = prbs(500, seed=77)
        masked = mask_transmit(PARAMS, bits, CFG, seed=3)
        assert np.array_equal(masked.w_star, masked.w_clean + masked.info)

    def test_vanishing_amplitude_equals_free_run(self):
        bits = prbs(100, seed=77)
        tiny = ModulationConfig(amplitude=1e-300, samples_per_bit=50)
        masked = mask_transmit(PARAMS, bits, tiny, seed=3)
        free = cl.generate_trajectory(masked.w_star.size, params=PARAMS, seed=3)
        assert np.array_equal(masked.w_star, free.w)

    def test_unstable_coupling_rejected_with_margins(self):
        bad = PARAMS.replace(gamma=-0.5)
        with pytest.raises(UnstableCouplingError, match="margins"):
            mask_transmit(bad, prbs(10, seed=1), CFG, seed=0)

    def test_length_accounting(self):
        bits = prbs(64, seed=9)
        masked = mask_transmit(PARAMS, bits, CFG, seed=1)
        assert masked.w_star.size == masked.preamble_samples + 64 * CFG.samples_per_bit

    def test_masked_spectrum_stays_noise_like(self):
        # no spectral line near the bit rate: the data-band peak stays close
        # to the chaos floor
        bits = prbs(4000, seed=3)
        masked = mask_transmit(PARAMS, bits, CFG, seed=5)
        psd = an.welch_psd(masked.w_star, segment_length=2048)
        data_band = (psd.frequencies >= 0.01) & (psd.frequencies <= 0.03)
        chaos_band = (psd.frequencies >= 0.05) & (psd.frequencies <= 0.45)
        ratio = psd.power[data_band].max() / np.median(psd.power[chaos_band])
        assert ratio < 2.5


class TestChannel:
    def test_zero_sigma_identity(self):
        x = np.linspace(-1, 1, 100)
        assert np.array_equal(channel_awgn(x, 0.0, seed=1), x)

    def test_added_variance(self):
        x = np.zeros(100_000)
        noisy = channel_awgn(x, 0.3, seed=2)
        assert noisy.var() == pytest.approx(0.09, rel=0.05)

    def test_seeded_determinism(self):
        x = np.ones(1000)
        assert np.array_equal(
            channel_awgn(x, 0.1, seed=3), channel_awgn(x, 0.1, seed=3)
        )

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError):
            channel_awgn(np.zeros(10), -0.1, seed=0)


class TestUnmask:
    def test_noiseless_recovery_is_exact(self):
        bits = prbs(1000, seed=77)
        masked = mask_transmit(PARAMS, bits, CFG, seed=3)
        recovered = unmask_receive(masked, seed=11)
        reference = nrz_waveform(bits, CFG.amplitude, CFG.samples_per_bit)
        assert np.max(np.abs(recovered - reference)) < 1e-9

    def test_tiny_amplitude_leaves_sync_residual_only(self):
        tiny = ModulationConfig(amplitude=1e-12, samples_per_bit=50)
        masked = mask_transmit(PARAMS, prbs(200, seed=5), tiny, seed=3)
        recovered = unmask_receive(masked, seed=11)
        assert np.max(np.abs(recovered)) < 1e-9

    def test_receiver_mismatch_decorrelates(self):
        bits = prbs(2000, seed=31)
        masked = mask_transmit(PARAMS, bits, CFG, seed=8)
        reference = nrz_waveform(bits, CFG.amplitude, CFG.samples_per_bit)
        one_pct = PARAMS.replace(
            a=PARAMS.a * 1.01, b=PARAMS.b * 1.01, c=PARAMS.c * 1.01
        )
        rec1 = unmask_receive(masked, recv_params=one_pct, seed=12)
        corr1 = np.corrcoef(rec1, reference)[0, 1]
        assert corr1 < 0.7
        two_pct = PARAMS.replace(
            a=PARAMS.a * 1.02, b=PARAMS.b * 1.02, c=PARAMS.c * 1.02
        )
        rec2 = unmask_receive(masked, recv_params=two_pct, seed=12)
        assert np.corrcoef(rec2, reference)[0, 1] < 0.5

    def test_polarity_self_check_fixes_inverted_sign(self):
        bits = prbs(200, seed=5)
        masked = mask_transmit(PARAMS, bits, CFG, seed=3)
        flipped = unmask_receive(masked, received=-masked.w_star, seed=11)
        # an inverted channel flips the pilot, and the self-check undoes it
        symbols = integrate_and_dump(flipped, CFG)
        decisions = (symbols > 0).astype(np.uint8)
        assert np.count_nonzero(decisions != bits) <= len(bits) // 4


class TestIntegrateAndDump:
    def test_constant_input(self):
        out = integrate_and_dump(np.full(500, 0.37), CFG)
        assert np.allclose(out, 0.37)

    def test_alternating_nrz_exact(self):
        bits = np.tile([1, 0], 20)
        wave = nrz_waveform(bits, 0.1, 50)
        out = integrate_and_dump(wave, CFG)
        assert np.allclose(out, np.where(bits > 0, 0.1, -0.1))

    def test_noise_variance_shrinks_by_n(self):
        rng = np.random.default_rng(0)
        noise = rng.normal(0, 1.0, 50 * 4000)
        out = integrate_and_dump(noise, CFG)
        assert out.var() == pytest.approx(1.0 / 50, rel=0.1)

    def test_partial_block_dropped_with_warning(self):
        with pytest.warns(RuntimeWarning, match="trailing"):
            out = integrate_and_dump(np.zeros(120), CFG)
        assert out.size == 2


class TestSymbolGaussians:
    def test_recovers_synthetic_parameters(self):
        rng = np.random.default_rng(1)
        n = 20_000
        labels = (rng.uniform(size=n) < 0.5).astype(np.uint8)
        stats_values = np.where(
            labels == 1, rng.normal(1.0, 0.25, n), rng.normal(0.0, 0.2, n)
        )
        fitted = fit_symbol_gaussians(stats_values, labels)
        se0 = 0.2 / np.sqrt((labels == 0).sum())
        se1 = 0.25 / np.sqrt((labels == 1).sum())
        assert fitted.mu0 == pytest.approx(0.0, abs=4 * se0)
        assert fitted.mu1 == pytest.approx(1.0, abs=4 * se1)
        assert fitted.sigma0 == pytest.approx(0.2, rel=0.05)
        assert fitted.sigma1 == pytest.approx(0.25, rel=0.05)
        assert fitted.p0 + fitted.p1 == pytest.approx(1.0)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            fit_symbol_gaussians(np.ones(10), np.ones(10))

    def test_filtered_classes_pass_normality(self):
        # with 50-sample averaging the decision statistics are near-Gaussian
        bits = prbs(3000, seed=10)
        _, fitted, _, _ = run_link(
            PARAMS, bits, CFG, seed=6, noise_sigma=0.006, filtered=True
        )
        for cls in (0, 1):
            x = fitted.stats[fitted.labels == cls]
            z = (x - x.mean()) / x.std(ddof=1)
            result = stats.anderson(z, dist="norm")
            assert result.statistic < result.critical_values[-1]  # 1% level

    def test_unfiltered_classes_overlap_heavily(self):
        bits = prbs(1000, seed=10)
        _, filt, _, _ = run_link(
            PARAMS, bits, CFG, seed=6, noise_sigma=0.006, filtered=True
        )
        _, unfilt, _, _ = run_link(
            PARAMS, bits, CFG, seed=6, noise_sigma=0.006, filtered=False
        )

        def separation(s):
            return (s.mu1 - s.mu0) / np.sqrt(0.5 * (s.sigma0**2 + s.sigma1**2))

        # per-sample classes overlap heavily (tails cross within ~1 sigma);
        # averaging 50 samples multiplies the separation by about sqrt(50)
        assert separation(unfilt) < 3.0
        assert separation(filt) > 5 * separation(unfilt)


class TestBerPredict:
    def _stats(self, mu0, s0, mu1, s1, p0=0.5):
        values = np.array([mu0, mu0, mu1, mu1])
        labels = np.array([0, 0, 1, 1], dtype=np.uint8)
        return SymbolStats(
            stats=values, labels=labels, mu0=mu0, sigma0=s0, mu1=mu1, sigma1=s1,
            p0=p0, p1=1 - p0,
        )

    def test_closed_form_value(self):
        s = self._stats(0.0, 0.25, 1.0, 0.25)
        expected = 0.5 * special.erfc(2.0 / np.sqrt(2.0))
        assert ber_predict(s, 0.5) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(0.02275, abs=1e-5)

    def test_threshold_below_everything_decides_all_ones(self):
        s = self._stats(0.0, 0.25, 1.0, 0.25, p0=0.3)
        assert ber_predict(s, -1e9) == pytest.approx(0.3, abs=1e-12)

    def test_symmetric_minimum_at_midpoint(self):
        s = self._stats(0.0, 0.25, 1.0, 0.25)
        mid = ber_predict(s, 0.5)
        assert mid <= ber_predict(s, 0.45)
        assert mid <= ber_predict(s, 0.55)

    def test_monotone_in_separation_and_spread(self):
        base = self._stats(0.0, 0.25, 1.0, 0.25)
        wider = self._stats(0.0, 0.25, 2.0, 0.25)
        noisier = self._stats(0.0, 0.4, 1.0, 0.4)
        assert optimal_threshold(wider)[1] < optimal_threshold(base)[1]
        assert optimal_threshold(noisier)[1] > optimal_threshold(base)[1]


class TestOptimalThreshold:
    def _stats(self, mu0, s0, mu1, s1, p0=0.5):
        values = np.array([mu0, mu0, mu1, mu1])
        labels = np.array([0, 0, 1, 1], dtype=np.uint8)
        return SymbolStats(
            stats=values, labels=labels, mu0=mu0, sigma0=s0, mu1=mu1, sigma1=s1,
            p0=p0, p1=1 - p0,
        )

    def test_symmetric_case_midpoint(self):
        lam, _ = optimal_threshold(self._stats(0.0, 0.25, 1.0, 0.25))
        assert lam == pytest.approx(0.5, abs=1e-6)

    def test_matches_stationarity_condition(self):
        s = self._stats(0.0, 0.2, 1.0, 0.35, p0=0.4)
        lam, _ = optimal_threshold(s)

        def weighted_pdf_gap(x):
            return s.p0 * stats.norm.pdf(x, s.mu0, s.sigma0) - s.p1 * stats.norm.pdf(
                x, s.mu1, s.sigma1
            )

        root = optimize.brentq(weighted_pdf_gap, s.mu0, s.mu1)
        assert lam == pytest.approx(root, abs=1e-4)

    def test_unordered_classes_rejected(self):
        with pytest.raises(ValueError):
            optimal_threshold(self._stats(1.0, 0.2, 0.0, 0.2))


class TestBerMeasure:
    def test_zero_errors_upper_bound(self):
        bits = prbs(100_000, seed=1)
        result = ber_measure(bits, bits)
        assert result.measured_ber == 0.0
        assert result.confidence_interval[0] == 0.0
        # exact one-sided 97.5% bound, about 3.7/n
        assert result.confidence_interval[1] == pytest.approx(3.689e-5, rel=1e-3)

    def test_complement_is_all_errors(self):
        bits = prbs(1000, seed=1)
        assert ber_measure(bits, 1 - bits).measured_ber == 1.0

    def test_counting(self):
        bits = np.zeros(100_000, dtype=np.uint8)
        recovered = bits.copy()
        recovered[:5] = 1
        result = ber_measure(bits, recovered)
        assert result.measured_ber == pytest.approx(5e-5)
        assert result.errors == 5
        lo, hi = result.confidence_interval
        assert lo < 5e-5 < hi

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ber_measure(np.zeros(10), np.zeros(11))

    def test_interval_contains_estimate_invariant(self):
        with pytest.raises(ValueError):
            BerResult(
                measured_ber=0.5, bits=10, errors=5, confidence_interval=(0.6, 0.7)
            )


class TestEndToEnd:
    def test_noiseless_link_error_free(self):
        bits = prbs(10_000, seed=77)
        _, _, _, decisions = run_link(PARAMS, bits, CFG, seed=3)
        assert ber_measure(bits, decisions).errors == 0

    def test_sweep_reproducible_across_seeds_within_ci(self):
        first = ber_sweep(PARAMS, [0.05], CFG, n_bits=20_000, seed=1, noise_sigma=0.012)[0]
        second = ber_sweep(PARAMS, [0.05], CFG, n_bits=20_000, seed=2, noise_sigma=0.012)[0]
        lo = max(first.confidence_interval[0], second.confidence_interval[0])
        hi = min(first.confidence_interval[1], second.confidence_interval[1])
        assert lo <= hi

    def test_sweep_validates_amplitudes(self):
        with pytest.raises(ValueError):
            ber_sweep(PARAMS, [0.1, 0.05], CFG, n_bits=100, seed=1)
        with pytest.raises(ValueError):
            ber_sweep(PARAMS, [-0.1], CFG, n_bits=100, seed=1)

    def test_threaded_sweep_matches_sequential(self):
        seq = ber_sweep(PARAMS, [0.05, 0.1], CFG, n_bits=2000, seed=4, noise_sigma=0.012)
        par = ber_sweep(
            PARAMS, [0.05, 0.1], CFG, n_bits=2000, seed=4, noise_sigma=0.012,
            max_workers=2,
        )
        assert [r.measured_ber for r in seq] == [r.measured_ber for r in par]
        assert [r.amplitude for r in par] == [0.05, 0.1]
