import math

import pytest

from src.core.errors import CapacityError, ModelDomainError
from src.models.params import SystemParams, WdmParams
from src.models.rates import SchemeSpec
from src.services import mac_rates

TDMA = SchemeSpec.parse("tdma")


def test_tdma_nominal_rate(nominal):
    report = mac_rates.rate_tdma(nominal, 16)
    assert report.per_user_rate == pytest.approx(16.5e3, rel=0.1)
    assert report.total_rate == pytest.approx(16 * report.per_user_rate)
    assert report.per_user_bits_per_frame == pytest.approx(report.breakdown.p_y0)


def test_tdma_rate_is_clamped_at_high_loss():
    report = mac_rates.rate_tdma(SystemParams(path_loss_db=60.0), 16)
    assert report.breakdown.p_y0 < 0
    assert report.per_user_rate == 0.0
    assert report.total_rate == 0.0


@pytest.mark.parametrize("n_active", [0, 17])
def test_active_pairs_bounded_by_star(nominal, n_active):
    with pytest.raises(ModelDomainError):
        mac_rates.rate_tdma(nominal, n_active)


def test_conditional_rate_without_interferers_is_tdma(nominal):
    assert mac_rates.rate_cdma_conditional(nominal, 0, 1) == mac_rates.rate_tdma(nominal, 1).per_user_rate


def test_one_interferer_kills_weight_one_key(nominal):
    assert mac_rates.rate_cdma_conditional(nominal, 1, 1) == 0.0


def test_heavy_codes_survive_one_interferer(nominal):
    assert mac_rates.rate_cdma_conditional(nominal, 1, 200) > 0.0


def test_conditional_rate_rejects_negative_count(nominal):
    with pytest.raises(ModelDomainError):
        mac_rates.rate_cdma_conditional(nominal, -1, 1)


def test_binomial_weight_values():
    assert mac_rates.binomial_weight(0, 15, 1 / 16) == pytest.approx(0.37981, abs=1e-4)
    assert mac_rates.binomial_weight(0, 15, 0.0) == 1.0
    assert mac_rates.binomial_weight(3, 15, 0.0) == 0.0
    assert math.fsum(mac_rates.binomial_weight(m, 15, 0.25) for m in range(16)) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("m, n, prob", [(-1, 5, 0.1), (6, 5, 0.1), (1, 5, 1.5)])
def test_binomial_weight_domain(m, n, prob):
    with pytest.raises(ModelDomainError):
        mac_rates.binomial_weight(m, n, prob)


def test_single_pair_cdma_equals_tdma(nominal):
    assert mac_rates.rate_cdma(nominal, 1, 3).per_user_rate == mac_rates.rate_tdma(nominal, 1).per_user_rate


def test_cdma_weight_one_nominal_rate(nominal):
    report = mac_rates.rate_cdma(nominal, 16, 1)
    assert report.per_user_rate == pytest.approx(6e3, rel=0.15)
    assert report.collision_probability == 0.0625
    assert len(report.terms) == 16
    assert report.approx_rate == pytest.approx(report.per_user_rate, rel=1e-9)


def test_cdma_closed_form_on_request(nominal):
    exact = mac_rates.rate_cdma(nominal, 16, 1)
    approx = mac_rates.rate_cdma(nominal, 16, 1, exact=False)
    assert approx.per_user_rate == exact.approx_rate
    assert approx.total_rate == pytest.approx(16 * exact.approx_rate)


def test_cdma_capacity_is_checked(nominal):
    with pytest.raises(CapacityError):
        mac_rates.rate_cdma(nominal, 16, 2)
    assert mac_rates.rate_cdma(nominal, 16, 2, ignore_capacity=True).per_user_rate >= 0.0


def test_weight_one_is_best_at_full_load(nominal):
    rates = [mac_rates.rate_cdma(nominal, 16, w, ignore_capacity=True).per_user_rate for w in (1, 2, 3)]
    assert rates[0] > rates[1] > rates[2]


def test_cdma_rate_invariants(nominal):
    tdma = mac_rates.rate_tdma(nominal, 1).per_user_rate
    previous = math.inf
    for n_active in range(1, 17):
        report = mac_rates.rate_cdma(nominal, n_active, 1)
        assert 0.0 <= report.per_user_rate <= tdma
        assert report.per_user_rate <= previous
        assert math.fsum(term.weight for term in report.terms) == pytest.approx(1.0, abs=1e-12)
        previous = report.per_user_rate


def test_worst_case(nominal):
    assert mac_rates.rate_cdma_worst_case(nominal, 16, 1) == 0.0
    assert mac_rates.rate_cdma_worst_case(nominal, 1, 1) == mac_rates.rate_tdma(nominal, 1).per_user_rate


def test_min_interference_weight(nominal):
    w = mac_rates.min_interference_weight(nominal)
    assert 10 <= w <= 20
    assert mac_rates.rate_cdma_conditional(nominal, 1, w) > 0.0
    assert mac_rates.rate_cdma_conditional(nominal, 1, w - 1) == 0.0


def test_min_interference_weight_not_found(nominal):
    assert mac_rates.min_interference_weight(nominal, w_max=5) == 0


def test_lbs_collision_probability(nominal):
    assert mac_rates.lbs_collision_probability(nominal, 0) == 1 / 16
    assert mac_rates.lbs_collision_probability(nominal, 1000) == pytest.approx(6.50e-3, rel=1e-2)
    assert mac_rates.lbs_collision_probability(nominal, 5, w1_yield=1.0) == 0.0


def test_lbs_collision_probability_rejects_negative_k(nominal):
    with pytest.raises(ModelDomainError):
        mac_rates.lbs_collision_probability(nominal, -1)


def test_lbs_without_listening_is_cdma(nominal):
    assert mac_rates.rate_lbs(nominal, 16, 0).per_user_rate == mac_rates.rate_cdma(nominal, 16, 1).per_user_rate


def test_lbs_after_thousand_periods(nominal):
    tdma = mac_rates.rate_tdma(nominal, 16).per_user_rate
    assert mac_rates.rate_lbs(nominal, 16, 1000).per_user_rate / tdma == pytest.approx(0.9068, abs=2e-3)


def test_lbs_reaches_tdma(nominal):
    tdma = mac_rates.rate_tdma(nominal, 16).per_user_rate
    assert mac_rates.rate_lbs(nominal, 16, 2500).per_user_rate == pytest.approx(tdma, rel=1e-2)
    assert abs(mac_rates.rate_lbs(nominal, 16, 100_000).per_user_rate - tdma) / tdma < 1e-3


def test_lbs_improves_with_listening(nominal):
    rates = [mac_rates.rate_lbs(nominal, 16, k).per_user_rate for k in (0, 10, 100, 500, 1000)]
    assert rates == sorted(rates)
    assert rates[0] < rates[-1]


def test_lbs_overhead_and_time_to_key(nominal):
    assert mac_rates.lbs_overhead(nominal, 1000) == 16_000.0
    report = mac_rates.rate_tdma(nominal, 16)
    assert mac_rates.time_to_key(report, 1e6) == pytest.approx(1e6 / report.per_user_rate)
    dead = mac_rates.rate_tdma(SystemParams(path_loss_db=60.0), 16)
    assert mac_rates.time_to_key(dead, 1e6) == math.inf


def test_single_channel_wdm_is_inner(nominal):
    for inner in ("tdma", "cdma:1", "lbs:500"):
        scheme = SchemeSpec.parse(inner)
        wdm = mac_rates.rate_wdm(nominal, WdmParams(n_channels=1, alpha_xt=1e-2), scheme, 16)
        assert wdm.per_user_rate == mac_rates.evaluate(nominal, scheme, 16).per_user_rate
        assert wdm.scheme.startswith("wdm1-")


def test_wdm_hundreds_of_users_at_30_db(nominal):
    report = mac_rates.rate_wdm(nominal, WdmParams(n_channels=30, alpha_xt=1e-3), TDMA, 16)
    assert report.per_user_rate > 0.0


def test_max_wdm_channels_at_20_db(nominal):
    assert mac_rates.max_wdm_channels(nominal, 1e-2, TDMA) == 8


def test_max_wdm_channels_at_30_db(nominal):
    assert mac_rates.max_wdm_channels(nominal, 1e-3, TDMA) * nominal.n_star >= 480


def test_max_wdm_channels_limits(nominal):
    assert mac_rates.max_wdm_channels(nominal, 0.0, TDMA, w_max=20) == 20
    assert mac_rates.max_wdm_channels(nominal, 1.0, TDMA) in (0, 1)
    with pytest.raises(ModelDomainError):
        mac_rates.max_wdm_channels(nominal, 1e-2, TDMA, w_max=0)


def test_max_wdm_channels_reports_code_shortage(nominal):
    with pytest.raises(CapacityError):
        mac_rates.max_wdm_channels(nominal, 1e-2, SchemeSpec.parse("cdma:3"))


def test_evaluate_dispatches_on_scheme(nominal):
    assert mac_rates.evaluate(nominal, TDMA, 16).scheme == "tdma"
    assert mac_rates.evaluate(nominal, SchemeSpec.parse("cdma:1"), 16).scheme == "cdma-w1"
    assert mac_rates.evaluate(nominal, SchemeSpec.parse("lbs:100"), 16).scheme == "lbs-k100"
    assert mac_rates.evaluate(nominal, SchemeSpec.parse("wdm:8:0.01:tdma"), 16).scheme == "wdm8-xt0.01/tdma"


def test_star_size_keeps_tdma_total_flat():
    totals = [
        mac_rates.rate_tdma(SystemParams(n_star=n, n_chips=128, frame_t=128.0), n).total_rate
        for n in (4, 8, 16, 32, 64)
    ]
    assert (max(totals) - min(totals)) / max(totals) < 0.2


@pytest.mark.parametrize("w", [1, 2, 3, 4])
def test_interferers_never_help(nominal, w):
    report = mac_rates.rate_cdma(nominal, 16, w, ignore_capacity=True)
    assert report.terms[0].m == 0
    assert all(term.rate <= report.terms[0].rate for term in report.terms[1:])


def test_lbs_and_wdm_never_beat_tdma(nominal):
    tdma = mac_rates.rate_tdma(nominal, 16).per_user_rate
    for k in (0, 10, 100, 500, 1000, 10_000):
        assert mac_rates.rate_lbs(nominal, 16, k).per_user_rate <= tdma
    for n_channels in (1, 2, 8, 30):
        for alpha_xt in (0.0, 1e-3, 1e-2):
            report = mac_rates.rate_wdm(nominal, WdmParams(n_channels=n_channels, alpha_xt=alpha_xt), TDMA, 16)
            assert report.per_user_rate <= tdma


def test_one_second_of_key_and_listening_overhead(nominal):
    per_pair_bits = mac_rates.rate_tdma(nominal, 16).per_user_rate * 1.0
    assert per_pair_bits >= 15e3
    overhead_s = mac_rates.lbs_overhead(nominal, 1000) * 1e-9
    assert overhead_s == pytest.approx(16e-6)
    assert overhead_s / 1.0 < 1e-4
