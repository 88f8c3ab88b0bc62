import pytest
from pydantic import ValidationError

from src.core.errors import ModelDomainError
from src.models.params import SystemParams, WdmParams
from src.services import network_model


def test_lossless_link_transmits_everything():
    p = SystemParams(eta_d=1.0, path_loss_db=0.0, n_star=2)
    assert network_model.link_transmissivity(p) == pytest.approx(0.5)


def test_nominal_transmissivity(eta):
    assert eta == pytest.approx(4.710e-3, abs=1e-6)


def test_transmissivity_scales_with_star_size(nominal):
    doubled = nominal.model_copy(update={"n_star": 32})
    assert network_model.link_transmissivity(doubled) == network_model.link_transmissivity(nominal) / 2


def test_noiseless_tdma_yield():
    assert network_model.y_tdma(SystemParams(gamma_dc=0.0, gamma_xtalk=0.0)) == 0.0


def test_nominal_tdma_yield(y0):
    assert y0 == pytest.approx(1.24e-7, abs=1e-10)


def test_tdma_yield_linear_in_gate_width():
    narrow = SystemParams(tau_d=0.5)
    assert network_model.y_tdma(SystemParams(tau_d=1.0)) == pytest.approx(2 * network_model.y_tdma(narrow))


def test_tdma_yield_out_of_range():
    with pytest.raises(ModelDomainError):
        network_model.y_tdma(SystemParams(gamma_dc=2.0))


def test_cdma_yield(nominal, eta, y0):
    assert network_model.y_cdma(nominal, eta, 0, 1) == y0
    assert network_model.y_cdma(nominal, eta, 1, 1) == pytest.approx(2.261e-3, abs=1e-5)
    assert network_model.y_cdma(nominal, eta, 2, 2) == pytest.approx(network_model.y_cdma(nominal, eta, 1, 1))


def test_cdma_yield_uses_given_background(nominal, eta):
    assert network_model.y_cdma(nominal, eta, 1, 4, background=1e-4) == pytest.approx(1e-4 + eta * 0.48 / 4)


@pytest.mark.parametrize("m, w", [(-1, 1), (0, 0)])
def test_cdma_yield_rejects_bad_counts(nominal, eta, m, w):
    with pytest.raises(ModelDomainError):
        network_model.y_cdma(nominal, eta, m, w)


def test_cdma_yield_above_one(nominal):
    with pytest.raises(ModelDomainError):
        network_model.y_cdma(nominal, 1.0, 10, 1)


def test_wdm_yield(nominal, eta, y0):
    assert network_model.y_wdm(nominal, eta, WdmParams(n_channels=1, alpha_xt=0.5)) == y0
    assert network_model.y_wdm(nominal, eta, WdmParams(n_channels=40, alpha_xt=0.0)) == y0
    eight = network_model.y_wdm(nominal, eta, WdmParams(n_channels=8, alpha_xt=1e-2))
    assert eight == pytest.approx(1.584e-4, abs=2e-6)


def test_wdm_params_bounds():
    with pytest.raises(ValidationError):
        WdmParams(n_channels=0)
    with pytest.raises(ValidationError):
        WdmParams(alpha_xt=1.5)


def test_prescribed_timing_nominal():
    timing = network_model.prescribe_timing(1.0, 0.0, 16)
    assert timing["frame_t"] == 16.0
    assert timing["n_chips"] == 16
    assert timing["b_opt"] == 1.0
    assert timing["tau_p"] == timing["tau_c"] == timing["tau_d"] == 1.0


def test_prescribed_timing_dead_time_dominates():
    timing = network_model.prescribe_timing(1.0, 1000.0, 16)
    assert timing["frame_t"] == 1000.0
    assert timing["n_chips"] == 1000


def test_prescribed_timing_faster_detector():
    timing = network_model.prescribe_timing(0.5, 0.0, 16)
    assert timing["b_opt"] == 2.0
    assert timing["frame_t"] == 8.0
    assert timing["n_chips"] == 16


def test_prescribed_timing_rejects_zero_resolution():
    with pytest.raises(ModelDomainError):
        network_model.prescribe_timing(0.0, 0.0, 16)


def test_prescribed_params_are_valid():
    p = network_model.prescribed_params(0.3, dead_time=10.0, n_star=8)
    assert p.n_chips == 34
    assert p.frame_t >= p.n_chips * p.tau_c
    assert p.frame_t >= p.dead_time


def test_params_reject_gate_longer_than_chip():
    with pytest.raises(ValidationError) as excinfo:
        SystemParams(tau_d=2.0, tau_c=1.0)
    assert "tau_d" in str(excinfo.value)
    assert "tau_c" in str(excinfo.value)


def test_params_reject_short_frame():
    with pytest.raises(ValidationError):
        SystemParams(n_chips=32, frame_t=16.0)


def test_params_reject_unknown_field():
    with pytest.raises(ValidationError):
        SystemParams(colour="blue")


def test_fixed_chip_stretches_frame(nominal):
    p = network_model.apply_timing(nominal.model_dump() | {"n_chips": 128}, "fixed_chip")
    assert p.frame_t == 128.0
    assert p.tau_c == 1.0


def test_fixed_frame_shrinks_chip(nominal):
    p = network_model.apply_timing(nominal.model_dump() | {"n_chips": 64}, "fixed_frame")
    assert p.frame_t == 16.0
    assert p.tau_c == p.tau_p == p.tau_d == 0.25
    assert p.b_opt == 4.0
    # crosstalk grows with bandwidth and shrinks with the gate, dark counts only shrink
    assert network_model.y_tdma(p) == pytest.approx((1e-7 + 0.3 * 8e-8 * 4) * 0.25)


def test_apply_timing_none_keeps_params(nominal):
    assert network_model.apply_timing(nominal, "none") == nominal


def test_apply_timing_unknown_mode(nominal):
    with pytest.raises(ModelDomainError):
        network_model.apply_timing(nominal, "stretchy")


def test_decoy_inputs_carry_params(nominal, eta, y0):
    inputs = network_model.decoy_inputs(nominal, y0)
    assert inputs.eta == eta
    assert inputs.mu == 0.48
    assert inputs.e0 == 0.5
    assert inputs.f_ec == 1.22
    assert network_model.decoy_inputs(nominal, y0, mu=0.3).mu == 0.3


@pytest.mark.parametrize("w", [1, 2, 4])
def test_cdma_yield_is_affine_in_interferers(nominal, eta, y0, w):
    yields = [network_model.y_cdma(nominal, eta, m, w) for m in range(16)]
    steps = [b - a for a, b in zip(yields, yields[1:])]
    assert yields[0] == y0
    assert steps == pytest.approx([eta * nominal.mu / w] * len(steps), rel=1e-9)


def test_transmissivity_falls_with_path_loss(nominal):
    values = [
        network_model.link_transmissivity(nominal.model_copy(update={"path_loss_db": loss}))
        for loss in range(0, 61, 2)
    ]
    assert all(later < earlier for earlier, later in zip(values, values[1:]))
