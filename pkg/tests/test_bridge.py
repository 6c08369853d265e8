import math

import numpy as np
import pytest

from qbvsim.bridge import (
    DL,
    FLEX,
    UL,
    BridgeDelayModel,
    ConstantDelay,
    EmpiricalDelay,
    NoModelForPcp,
    ShiftedLognormalDelay,
    TddAlignedDelay,
    fit_shifted_lognormal,
    fitted_jitter_model,
    sample_delay,
    tdd_pattern_4d2f4u,
)

MS = 1_000_000


def test_constant_is_degenerate():
    m = ConstantDelay(5 * MS)
    rng = np.random.default_rng(0)
    assert all(m.sample(rng, t) == 5 * MS for t in range(0, 100, 7))


class TestEmpirical:
    def test_frequencies_uniform(self):
        m = EmpiricalDelay((4 * MS, 6 * MS, 15 * MS))
        rng = np.random.default_rng(12345)
        n = 1_000_000
        draws = [m.sample(rng, 0) for _ in range(n)]
        for v in m.samples_ns:
            freq = draws.count(v) / n
            assert abs(freq - 1 / 3) < 0.002

    def test_ecdf_counting(self):
        m = EmpiricalDelay((1, 2, 3))
        assert m.ecdf(2) == pytest.approx(2 / 3)
        assert m.ecdf(0) == 0.0
        assert m.ecdf(3) == 1.0

    def test_requires_sorted(self):
        with pytest.raises(ValueError):
            EmpiricalDelay((3, 1, 2))

    def test_from_csv(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("delay_ns\n300\n100\n200\n")
        m = EmpiricalDelay.from_csv(p)
        assert m.samples_ns == (100, 200, 300)

    def test_from_csv_missing_column(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("x\n1\n")
        with pytest.raises(ValueError):
            EmpiricalDelay.from_csv(p)


class TestShiftedLognormal:
    def test_cdf_ppf_roundtrip(self):
        m = ShiftedLognormalDelay(4 * MS, 14.7, 0.5, 17 * MS)
        for p in (0.01, 0.5, 0.9, 0.999):
            assert m.cdf(m.ppf(p)) == pytest.approx(p, abs=1e-9)

    def test_support(self):
        m = ShiftedLognormalDelay(4 * MS, 14.7, 0.5, 17 * MS)
        rng = np.random.default_rng(1)
        draws = [m.sample(rng, 0) for _ in range(20_000)]
        assert min(draws) >= 4 * MS
        assert max(draws) <= 17 * MS

    def test_untruncated_mean(self):
        m = ShiftedLognormalDelay(0, 0.0, 0.5)
        assert m.mean_ns() == pytest.approx(math.exp(0.125), rel=1e-12)

    def test_rejects_bad_truncation(self):
        with pytest.raises(ValueError):
            ShiftedLognormalDelay(4 * MS, 14.7, 0.5, 3 * MS)


class TestFit:
    def test_fit_hits_targets(self):
        m = fit_shifted_lognormal(6.8 * MS, 0.999, 15 * MS, 4 * MS, 17 * MS)
        assert m.mean_ns() == pytest.approx(6.8 * MS, rel=1e-3)
        assert m.ppf(0.999) == pytest.approx(15 * MS, rel=1e-3)

    def test_reference_model_statistics(self):
        m = fitted_jitter_model()
        rng = np.random.default_rng(99)
        draws = np.array([m.sample(rng, 0) for _ in range(200_000)])
        assert 6.5 * MS <= draws.mean() <= 7.25 * MS
        assert draws.max() <= 17.5 * MS
        assert draws.min() >= 4 * MS
        p999 = np.sort(draws)[int(math.ceil(0.999 * len(draws))) - 1]
        assert abs(p999 - 15 * MS) < 0.3 * MS


class TestTddAligned:
    def _slot_walk_wait(self, model, entry):
        # brute-force oracle: scan instants after entry for a DL slot start
        t = entry + 1
        while True:
            phase = t % model.period_ns
            i = phase // model.slot_ns
            if model.pattern[i] == DL and phase % model.slot_ns == 0:
                return t - entry
            t += 1
            if t - entry > 2 * model.period_ns:
                raise AssertionError("no DL slot found")

    def test_pattern_period(self):
        m = TddAlignedDelay(ConstantDelay(0), 500_000, tdd_pattern_4d2f4u())
        assert m.period_ns == 5 * MS

    def test_wait_from_first_ul_slot(self):
        m = TddAlignedDelay(ConstantDelay(0), 500_000, tdd_pattern_4d2f4u())
        entry = 6 * 500_000  # start of the first UL slot
        assert m.wait_to_next_dl(entry) == 2 * MS
        assert m.wait_to_next_dl(entry) == self._slot_walk_wait(m, entry)

    def test_wait_matches_slot_walk_oracle(self):
        m = TddAlignedDelay(ConstantDelay(0), 500_000, tdd_pattern_4d2f4u())
        for entry in (0, 1, 499_999, 500_000, 2_250_000, 4_999_999, 5_000_000):
            assert m.wait_to_next_dl(entry) == self._slot_walk_wait(m, entry)

    def test_wait_bounded_by_period(self):
        m = TddAlignedDelay(ConstantDelay(0), 500_000, tdd_pattern_4d2f4u())
        for entry in range(0, 5 * MS, 173_333):
            assert 0 < m.wait_to_next_dl(entry) <= m.period_ns

    def test_base_delay_added(self):
        m = TddAlignedDelay(ConstantDelay(100), 500_000, (DL, UL))
        rng = np.random.default_rng(0)
        entry = 250_000  # mid-DL: next DL start is 1 ms
        assert m.sample(rng, entry) == 750_000 + 100

    def test_needs_a_dl_slot(self):
        with pytest.raises(ValueError):
            TddAlignedDelay(ConstantDelay(0), 500_000, (UL, FLEX))


class TestBridgeDelayModel:
    def test_per_pcp_dispatch(self):
        m = BridgeDelayModel.for_pcps({2: ConstantDelay(5)}, default=ConstantDelay(9))
        rng = np.random.default_rng(0)
        assert sample_delay(m, 2, 0, rng) == 5
        assert sample_delay(m, 0, 0, rng) == 9

    def test_missing_pcp_raises(self):
        m = BridgeDelayModel.for_pcps({2: ConstantDelay(5)})
        with pytest.raises(NoModelForPcp):
            m.variant_for(0)

    def test_reproducible_stream(self):
        m = BridgeDelayModel.uniform(fitted_jitter_model())
        a = [sample_delay(m, 2, 0, np.random.default_rng(7)) for _ in range(1)]
        b = [sample_delay(m, 2, 0, np.random.default_rng(7)) for _ in range(1)]
        assert a == b
