import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spdcpurity import scenarios as sc
from spdcpurity.errors import ConfigParseError, ValidationError
from spdcpurity.phasematch import deltak_exact, solve_cut_angle
from spdcpurity.quadratic_state import evaluate

FIG2_FILE = """\
# minimal fig2 description
crystal = LiIO3
length_mm = 1
lambda_p_nm = 405
lambda_s_nm = 810
lambda_i_nm = 810
w_p_um = 400
phi_deg = 10
rho0_deg = 0
pump_duration_fs = 0
dl_nm = 1
w_um = 100
"""


def _close(a, b, tol=1e-9):
    for name in a.__dataclass_fields__:
        x, y = getattr(a, name), getattr(b, name)
        if isinstance(x, float) and isinstance(y, float):
            assert x == pytest.approx(y, rel=tol, abs=tol), name
        else:
            assert x == y, name


@pytest.mark.parametrize("name", list(sc.PRESETS))
def test_presets_valid_and_evaluate(name):
    config = sc.preset(name)
    theta = solve_cut_angle(config)
    assert abs(deltak_exact(config.replace(theta=theta), np.zeros(6))) < 1e-9
    report = evaluate(config)
    assert 0 < report.purity_spatial_pair <= 1 and 0 < report.purity_signal <= 1
    assert sc.PRESETS[name].note


def test_required_presets_present():
    required = {"fig2", "valencia_w30", "valencia_w462", "teich", "altman", "fig4", "fig5a", "fig5b", "fig5c"}
    assert required <= set(sc.PRESETS)


def test_preset_values():
    assert sc.preset("fig2").phi_s == pytest.approx(math.radians(10))
    assert sc.preset("fig2").w_p_um == 400.0
    assert sc.preset("altman").lambda_p_um == 0.3511
    assert sc.preset("teich").phi_s == 0.0
    assert sc.preset("valencia_w462").pump_bandwidth_nm == 0.4
    assert sc.preset("valencia_w30_ws48").w_s_um == 48.0


def test_unknown_preset_lists_names():
    with pytest.raises(ValidationError, match="fig2.*altman"):
        sc.preset("fig9")


def test_teich_waist_sensitivity():
    base = sc.preset("teich")
    p1 = evaluate(base).purity_spatial_pair
    p2 = evaluate(base.replace(w_p_um=2 * base.w_p_um)).purity_spatial_pair
    assert abs(p1 - p2) < 1e-3


# --- config files ------------------------------------------------------------

def test_minimal_file_equals_fig2(tmp_path):
    path = tmp_path / "fig2.cfg"
    path.write_text(FIG2_FILE)
    _close(sc.load_config(path), sc.preset("fig2"))


def test_missing_wavelength_derived_or_rejected():
    one_missing = FIG2_FILE.replace("lambda_i_nm = 810\n", "")
    assert sc.parse_config(one_missing).lambda_i_um == pytest.approx(0.81, rel=1e-12)
    two_missing = one_missing.replace("lambda_s_nm = 810\n", "")
    with pytest.raises(ValidationError, match="energy-conservation"):
        sc.parse_config(two_missing)
    with pytest.raises(ValidationError, match="energy conservation"):
        sc.parse_config(FIG2_FILE.replace("lambda_i_nm = 810", "lambda_i_nm = 800"))


def test_degree_suffix_and_round_trip():
    config = sc.parse_config(FIG2_FILE.replace("phi_deg = 10", "phi_s_deg = 12.5\nphi_i_deg = 12.5"))
    assert config.phi_s == pytest.approx(math.radians(12.5), rel=1e-15)
    _close(sc.parse_config(sc.dump_config(config)), config)


@pytest.mark.parametrize("name", list(sc.PRESETS))
def test_dump_parse_round_trip(name):
    config = sc.preset(name)
    _close(sc.parse_config(sc.dump_config(config)), config)


@settings(max_examples=40, deadline=None)
@given(
    w=st.floats(1, 1e4), dl=st.floats(0, 50), phi=st.floats(-30, 30), wp=st.floats(1, 1e4),
    rho=st.one_of(st.none(), st.floats(0, 5)),
)
def test_round_trip_property(w, dl, phi, wp, rho):
    config = sc.preset("fig2").replace(
        w_s_um=w, w_i_um=w, dl_s_nm=dl, dl_i_nm=dl, phi_s=math.radians(phi), phi_i=math.radians(phi), w_p_um=wp,
        rho0=None if rho is None else math.radians(rho),
    )
    _close(sc.parse_config(sc.dump_config(config)), config)


@pytest.mark.parametrize(
    "text, line, message",
    [
        ("crystal = BBO\nfoo_um = 3\n", 2, "unknown key"),
        ("crystal = BBO\n\nlength_um = abc\n", 3, "not a number"),
        ("crystal = BBO\ncrystal = BBO\n", 2, "duplicate"),
        ("# c\nlength_um 3\n", 2, "key = value"),
        ("w_um = 3\nw_s_um = 4\n", 2, "second time"),
        ("pump = pulsed\n", 1, "cw"),
    ],
)
def test_parse_errors_carry_line(text, line, message):
    with pytest.raises(ConfigParseError, match=f"line {line}: .*{message}"):
        sc.parse_config(text)


def test_file_special_values():
    text = FIG2_FILE.replace("pump_duration_fs = 0", "pump = cw").replace("w_um = 100", "w_um = inf")
    text = text.replace("rho0_deg = 0", "rho0 = computed") + "theta = auto\n"
    config = sc.parse_config(text)
    assert config.is_cw and math.isinf(config.w_s_um) and config.rho0 is None and config.theta is None


def test_file_can_start_from_preset():
    config = sc.parse_config("preset = altman\nw_p_um = 200\n")
    assert config.w_p_um == 200.0 and config.lambda_p_um == 0.3511


def test_missing_file():
    with pytest.raises(ValidationError, match="file not found"):
        sc.load_config("/nonexistent/x.cfg")


# --- sweeps ------------------------------------------------------------------

def test_single_value_sweep_equals_direct():
    config = sc.preset("fig2")
    table = sc.sweep(config, "ws", [250.0])
    direct = evaluate(config.replace(w_s_um=250.0, w_i_um=250.0)).as_dict()
    assert [table.columns[k][0] for k in sc.OUTPUTS] == [direct[k] for k in sc.OUTPUTS]


def test_fig2_sweep_without_bandwidth_is_pure():
    table = sc.sweep(sc.preset("fig2").replace(dl_s_nm=0.0, dl_i_nm=0.0), "w_um", [50, 100, 400, 1000, 3000])
    assert all(s == "ok" for s in table.status)
    assert min(table.columns["purity_spatial_pair"]) >= 0.999


def test_fig5a_interior_maximum():
    values = np.geomspace(10, 3000, 15)
    p = sc.sweep(sc.preset("fig5a"), "wp", values, outputs=("purity_signal",)).columns["purity_signal"]
    assert max(p) > p[0] and max(p) > p[-1]


def test_sweep_validation():
    config = sc.preset("fig2")
    with pytest.raises(ValidationError, match="not sweepable"):
        sc.sweep(config, "length", [1.0])
    with pytest.raises(ValidationError, match="strictly increasing"):
        sc.sweep(config, "ws", [100.0, 100.0])
    with pytest.raises(ValidationError):
        sc.sweep(config, "ws", [])
    with pytest.raises(ValidationError):
        sc.sweep(config, "ws", [1.0], outputs=("fidelity",))


def test_failing_rows_are_flagged():
    table = sc.sweep(sc.preset("fig2"), "phi", [10.0, 80.0])
    assert table.status[0] == "ok"
    assert table.status[1].startswith("PhaseMatchingError")
    assert all(table.columns[k][1] is None for k in table.columns)


def test_csv_schema_and_determinism(tmp_path):
    config = sc.preset("fig2")
    t1 = sc.sweep(config, "dl", [0.5, 1.0, 10.0])
    t2 = sc.sweep(config, "dl", [0.5, 1.0, 10.0])
    text = t1.to_csv()
    assert text == t2.to_csv()
    assert "\r" not in text and text.endswith("\n")
    header = text.splitlines()[0].split(",")
    assert header[0] == "dl_nm (nm)" and header[-1] == "status"
    assert all(h.endswith("(1)") for h in header[1:-1])
    path = tmp_path / "t.csv"
    t1.to_csv(path)
    assert path.read_bytes() == text.encode()
    back = sc.read_sweep_csv(path)
    assert back.values == t1.values and back.columns == t1.columns and back.status == t1.status


def test_csv_flagged_rows_have_empty_cells():
    text = sc.sweep(sc.preset("fig2"), "phi", [10.0, 80.0]).to_csv()
    row = text.splitlines()[2].split(",")
    assert row[1:5] == ["", "", "", ""]
