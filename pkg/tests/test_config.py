import math

import pytest

from netmimo.config import SystemConfig, dbm_to_watts, load_config, parse_config_text
from netmimo.errors import ParameterError


def test_defaults_are_reference_deployment():
    c = SystemConfig()
    assert c.lambda_ == 1.0 / (math.pi * 500.0**2)
    assert (c.W, c.P_T, c.N_o, c.N_f, c.gap, c.alpha, c.d_o, c.M) == (20e6, 43.0, -174.0, 9.0, 3.0, 3.76, 0.392, 5)


def test_power_conversions():
    c = SystemConfig()
    assert c.tx_power_w == pytest.approx(19.952623149688797, rel=1e-12)
    assert 10 * math.log10(c.noise_w * 1e3) == pytest.approx(-174 + 10 * math.log10(20e6) + 9, abs=1e-12)
    assert c.gap_linear == pytest.approx(1.9952623149688795)
    assert dbm_to_watts(30.0) == pytest.approx(1.0)


def test_snr_depends_on_eta():
    c = SystemConfig()
    assert c.snr(0.6) == pytest.approx(c.tx_power_w / (3 * c.noise_w))
    assert c.snr(0.3) == pytest.approx(2 * c.snr(0.6))
    with pytest.raises(ParameterError):
        c.snr(0.0)


def test_empty_file_gives_defaults(tmp_path):
    p = tmp_path / "empty.cfg"
    p.write_text("")
    assert load_config(p) == SystemConfig()


def test_partial_file_overrides_only_given_keys(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# comment\nM = 8\nlambda = 1e-6   # trailing\n")
    c = load_config(p)
    assert c.M == 8 and c.lambda_ == 1e-6 and c.alpha == 3.76


@pytest.mark.parametrize("text, key", [
    ("alpha = 1.5", "alpha"),
    ("M = 2.5", "M"),
    ("M = 0", "M"),
    ("lambda = -1", "lambda"),
    ("d_o = 0", "d_o"),
    ("gap = -1", "gap"),
    ("alpha = abc", "alpha"),
    ("bogus = 1", "bogus"),
    ("M = 4\nM = 5", "M"),
])
def test_invalid_values_name_the_key(text, key):
    with pytest.raises(ParameterError, match=key):
        parse_config_text(text)


def test_alpha_message_states_constraint():
    with pytest.raises(ParameterError, match="alpha > 2 required"):
        parse_config_text("alpha = 1.5")


def test_round_trip_and_digest():
    c = SystemConfig(M=7)
    assert SystemConfig.from_dict(c.to_dict()) == c
    assert c.digest() == SystemConfig(M=7).digest() != SystemConfig().digest()
