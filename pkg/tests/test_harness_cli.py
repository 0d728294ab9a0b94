import os

import numpy as np
import pytest

from passcovert import cli, harness
from passcovert.errors import ParseError, ValidationError

FAST = """
radiation: {models: [equal, proportional]}
wardens: {counts: [3, 5]}
detector: {tau_points: 21}
jamming_sweep: {P_J_max_mW: [0, 10, 40, 80]}
rate: {P_C_mW: [0, 5, 10]}
optimizer: {epsilons: [0.2], multistart: 2, K_max: 2, random_trials: 5}
validate: {trials: 20000, tau_points: 3}
"""


def write(tmp_path, text, name="s.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_empty_file_gives_reference_defaults(tmp_path):
    cfg = harness.load_scenario(write(tmp_path, ""))
    g = cfg.base_geometry
    assert g.wavelength == pytest.approx(299_792_458.0 / 5e9)
    assert g.n_eff == 1.4 and g.offset == 0.4 and g.length == 4.0 and g.height == 4.0
    assert cfg.P_max == pytest.approx(0.1) and cfg.P_J_max == pytest.approx(0.04)
    assert (cfg.n_C, cfg.n_J) == (4, 4)
    assert cfg.sigma_w_sq == pytest.approx(10 ** (-11.4) * 1e-3, rel=1e-15)
    assert cfg.sigma_w_sq == pytest.approx(3.98e-15, rel=1e-3)


def test_dbm_string():
    cfg = harness.parse_config_text('noise: {warden_dBm: "−114 dBm", bob_dBm: "-100 dBm"}')
    assert cfg.sigma_w_sq == pytest.approx(10 ** (-11.4) * 1e-3, rel=1e-15)
    assert cfg.sigma_b_sq == pytest.approx(1e-13, rel=1e-12)


def test_budget_violation():
    with pytest.raises(ValidationError) as e:
        harness.parse_config_text("powers: {P_C_mW: 70, P_J_max_mW: 40}")
    assert e.value.field == "powers"


def test_unknown_key_has_path():
    with pytest.raises(ValidationError) as e:
        harness.parse_config_text("geometry: {lenght_m: 3}")
    assert e.value.field == "geometry.lenght_m"


def test_parse_error_has_line():
    with pytest.raises(ParseError) as e:
        harness.parse_config_text("seed: 1\ngeometry: {length_m: [1, 2}\n")
    assert e.value.line == 2


def test_warden_pool_nested():
    a = harness.parse_config_text("wardens: {counts: [5]}")
    b = harness.parse_config_text("wardens: {counts: [5, 8]}")
    assert np.array_equal(a.geometry(5).wardens, b.geometry(5).wardens)
    w = b.geometry(8).wardens
    assert np.all((w[:, 0] >= 0) & (w[:, 0] <= 4) & (np.abs(w[:, 1]) <= 2) & (w[:, 2] == 0))


def test_records_roundtrip():
    recs = [{"a": 0.1, "b": 3, "c": None, "d": True, "e": "x,y", "f": 1e-300}]
    for fmt in ("csv", "jsonl"):
        back = harness.loads_records(harness.dumps_records(recs, fmt), fmt)
        assert back == recs


def test_dep_curve_below_noise_floor_is_one():
    cfg = harness.parse_config_text("wardens: {counts: [5]}\nradiation: {models: [equal]}\n"
                                    "detector: {tau_W: {start: 0.0, stop: 3.0e-15, points: 5}}")
    rows = harness.run_dep_vs_tau(cfg)["dep_curve"]
    assert [r["dep_exact"] for r in rows] == [1.0] * 5


def test_jamming_single_point():
    cfg = harness.parse_config_text("wardens: {counts: [5]}\nradiation: {models: [equal]}\n"
                                    "jamming_sweep: {P_J_max_mW: [40]}")
    out = harness.run_dep_vs_jamming(cfg)
    assert len(out["dep_vs_jamming"]) == 1


def test_acr_curve_monotone_and_zero_start():
    cfg = harness.parse_config_text(FAST)
    rows = harness.run_acr_vs_pc(cfg)["acr_curve"]
    for model in ("equal", "proportional"):
        for M in (3, 5):
            acr = [r["acr"] for r in rows if r["model"] == model and r["M"] == M]
            assert acr[0] == 0.0
            assert all(b >= a for a, b in zip(acr, acr[1:]))


@pytest.mark.parametrize("cmd", ["dep-curve", "dep-vs-jamming", "acr-curve", "validate"])
@pytest.mark.parametrize("fmt", ["csv", "jsonl"])
def test_cli_byte_identical(tmp_path, cmd, fmt):
    cfgp = write(tmp_path, FAST)
    outs = []
    for k in range(2):
        out = tmp_path / f"o{k}"
        assert cli.main([cmd, "--config", cfgp, "--out", str(out), "--seed", "4", "--format", fmt]) == 0
        outs.append({f: (out / f).read_bytes() for f in sorted(os.listdir(out))})
    assert outs[0] == outs[1] and outs[0]


def test_cli_optimize_streams(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["optimize", "--config", write(tmp_path, FAST), "--out", str(out)]) == 0
    rows = harness.loads_records((out / "optimizer_study.csv").read_text())
    methods = {r["method"] for r in rows}
    assert methods == {"mm_bcd_sca_K1", "mm_bcd_sca_K5", "grid", "random_mean"}
    for model in ("equal", "proportional"):
        for M in (3, 5):
            grp = {r["method"]: r["acr"] for r in rows if r["model"] == model and r["M"] == M}
            assert grp["mm_bcd_sca_K5"] >= grp["mm_bcd_sca_K1"] >= grp["random_mean"]
    assert (out / "optimizer_traces.csv").exists() and (out / "optimizer_designs.csv").exists()


def test_cli_exit_codes(tmp_path):
    assert cli.main(["dep-curve", "--config", write(tmp_path, "powers: {P_C_mW: 99}"), "--out", str(tmp_path)]) == 2
    assert cli.main(["dep-curve", "--config", str(tmp_path / "missing.yaml"), "--out", str(tmp_path)]) == 2
    assert cli.main(["dep-curve", "--config", write(tmp_path, "seed: [1"), "--out", str(tmp_path)]) == 2
    bad = "antennas: {n_C: 30, min_spacing_m: 0.2}"  # 30 PAs at 0.2 m spacing need 5.8 m of guide
    assert cli.main(["dep-curve", "--config", write(tmp_path, bad), "--out", str(tmp_path)]) == 3


def test_yaml11_exponent_string():
    cfg = harness.parse_config_text("geometry: {carrier_hz: 5.0e9}")
    assert cfg.base_geometry.wavelength == pytest.approx(299_792_458.0 / 5e9)
    with pytest.raises(ValidationError):
        harness.parse_config_text("geometry: {carrier_hz: five}")


@pytest.mark.parametrize("name", ["reference", "smoke", "toy"])
def test_shipped_configs_load(name):
    path = os.path.join(os.path.dirname(__file__), "..", "configs", f"{name}.yaml")
    cfg = harness.load_scenario(path)
    if name == "reference":
        ref = harness.parse_config_text("")
        for model in ref.models:
            for M in ref.warden_counts:
                a, b = cfg.scenario(model, M), ref.scenario(model, M)
                assert np.array_equal(a.geom.wardens, b.geom.wardens) and np.array_equal(a.geom.bob, b.geom.bob)
                assert (a.P_max, a.sigma_w_sq, a.sigma_b_sq, a.dx_min) == (b.P_max, b.sigma_w_sq, b.sigma_b_sq, b.dx_min)
                assert cfg.design(model) == ref.design(model)
