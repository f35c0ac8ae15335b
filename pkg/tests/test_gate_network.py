import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from edgedistill.errors import InvalidInputError, InvalidParameterError, UndefinedMetricError
from edgedistill.gate import Outcome, confidence, confidence_batch, gate, upload_mask
from edgedistill.metrics import accuracy, relative_accuracy, upload_proportion
from edgedistill.network import (
    DelayLedger,
    LinkConfig,
    affine_delay,
    average_delay,
    sample_delay,
    transmission_delay,
)

probs = st.floats(0.0, 1.0)


class TestConfidence:
    @pytest.mark.parametrize("dist, expected", [((0.5, 0.5), 0.0), ((1.0, 0.0), 1.0), ((0.8, 0.2), 0.6)])
    def test_examples(self, dist, expected):
        assert confidence(dist) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("bad", [(0.2, 0.3, 0.5), (0.7, 0.7), (-0.1, 1.1), (np.nan, 0.5)])
    def test_rejects_non_binary_distribution(self, bad):
        with pytest.raises(InvalidInputError):
            confidence(bad)

    @given(probs)
    def test_symmetric(self, a):
        assert confidence((a, 1 - a)) == confidence((1 - a, a))

    @given(probs)
    def test_batch_matches_scalar(self, a):
        assert confidence_batch(np.array([[a, 1 - a]]))[0] == confidence((a, 1 - a))


class TestGate:
    @pytest.mark.parametrize(
        "score, tau, outcome",
        [(0.6, 0.3, Outcome.ACCEPT_LOCAL), (0.3, 0.3, Outcome.ACCEPT_LOCAL), (0.0, 0.1, Outcome.UPLOAD_TO_CLOUD)],
    )
    def test_examples(self, score, tau, outcome):
        decision = gate(score, tau)
        assert decision.outcome is outcome
        assert decision.uploaded == (outcome is Outcome.UPLOAD_TO_CLOUD)

    @pytest.mark.parametrize("tau", [-0.01, 1.01, float("nan")])
    def test_tau_out_of_range(self, tau):
        with pytest.raises(InvalidParameterError):
            gate(0.5, tau)

    @given(probs)
    def test_zero_threshold_never_uploads(self, s):
        assert not gate(s, 0.0).uploaded

    @given(probs)
    def test_unit_threshold_uploads_below_one(self, s):
        assert gate(s, 1.0).uploaded == (s < 1.0)

    @given(st.lists(probs, min_size=1, max_size=40), probs, probs)
    def test_upload_set_monotone_in_tau(self, scores, t1, t2):
        lo, hi = sorted((t1, t2))
        a = upload_mask(np.array(scores), lo)
        b = upload_mask(np.array(scores), hi)
        assert np.all(b[a])
        assert list(a) == [gate(s, lo).uploaded for s in scores]


class TestDelay:
    @pytest.mark.parametrize("bits, bw, expected", [(240000, 20e6, 0.012), (240000, 5e6, 0.048), (8, 8, 1.0)])
    def test_transmission(self, bits, bw, expected):
        assert transmission_delay(bits, bw) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("bits, bw", [(0, 5e6), (240000, 0), (-8, 8)])
    def test_nonpositive(self, bits, bw):
        with pytest.raises(InvalidParameterError):
            transmission_delay(bits, bw)

    def test_sample_delay_defaults(self):
        link = LinkConfig()
        assert link.image_size_bits == 30 * 1000 * 8
        assert sample_delay(False, link) == pytest.approx(0.048, abs=1e-15)
        assert sample_delay(True, link) == pytest.approx(0.060, abs=1e-15)

    def test_infinite_cloud_bandwidth_limit(self):
        d = sample_delay(True, LinkConfig(bw_edge_to_cloud_bps=1e15))
        assert 0.048 < d < 0.048 + 1e-9

    def test_average(self):
        assert average_delay(DelayLedger([0.048])) == pytest.approx(0.048, abs=1e-15)
        assert average_delay(DelayLedger([0.048, 0.060])) == pytest.approx(0.054, abs=1e-15)

    def test_empty_ledger(self):
        with pytest.raises(UndefinedMetricError):
            average_delay(DelayLedger())

    @given(st.integers(1, 3000), st.data())
    def test_affine_law(self, n, data):
        uploads = data.draw(st.integers(0, n))
        link = LinkConfig()
        ledger = DelayLedger()
        ledger.extend(sample_delay(i < uploads, link) for i in range(n))
        assert abs(average_delay(ledger) - affine_delay(uploads / n, link)) <= 1e-12
        # the same law written out with the raw link parameters
        assert abs(average_delay(ledger) - (240000 / 5e6 + 240000 / 20e6 * uploads / n)) <= 1e-12

    def test_bad_link(self):
        with pytest.raises(InvalidParameterError):
            LinkConfig(bw_local_to_edge_bps=-1)


class TestMetrics:
    @pytest.mark.parametrize("pred, lab, expected", [([1, 0], [1, 0], 1.0), ([1, 0], [0, 1], 0.0), ([1, 1, 0, 0], [1, 1, 0, 1], 0.75)])
    def test_accuracy(self, pred, lab, expected):
        assert accuracy(pred, lab) == expected

    def test_accuracy_empty(self):
        with pytest.raises(UndefinedMetricError):
            accuracy([], [])

    def test_relative_accuracy(self):
        assert relative_accuracy(0.7, 0.7) == 1.0
        assert relative_accuracy(0.6, 0.8) == pytest.approx(0.75)
        with pytest.raises(UndefinedMetricError):
            relative_accuracy(0.5, 0.0)

    @pytest.mark.parametrize("u, n, expected", [(0, 2880, 0.0), (2880, 2880, 1.0), (1440, 2880, 0.5)])
    def test_upload_proportion(self, u, n, expected):
        assert upload_proportion(u, n) == expected

    @pytest.mark.parametrize("u, n", [(3, 2), (-1, 2), (0, 0)])
    def test_upload_proportion_invalid(self, u, n):
        with pytest.raises(InvalidInputError):
            upload_proportion(u, n)
