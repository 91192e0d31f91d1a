import math

import pytest

import phonox


PARAMS = {
    "g_om": 500e3,
    "g_em": 2e6,
    "kappa_o_i": 400e6,
    "kappa_o_e": 600e6,
    "kappa_mu": 5e6,
    "kappa_mu_e": 4e6,
    "gamma_m": 50e3,
    "omega_o": 194e12,
    "n_c": 100.0,
}


def test_version_and_materials():
    assert phonox.__version__ == "0.1.0"
    names = phonox.material_names()
    assert {"si", "ln", "sapphire"} <= set(names)
    ln = phonox.material("ln")
    assert ln["density"] > 0


def test_cooperativities_match_closed_form():
    m = phonox.compute_metrics(PARAMS)
    # rates are /2pi values; the 2pi factors cancel in both ratios
    kappa_o = PARAMS["kappa_o_i"] + PARAMS["kappa_o_e"]
    c_om = 4 * PARAMS["g_om"] ** 2 * PARAMS["n_c"] / (kappa_o * PARAMS["gamma_m"])
    c_em = 4 * PARAMS["g_em"] ** 2 / (PARAMS["kappa_mu"] * PARAMS["gamma_m"])
    assert m["C_om"] == pytest.approx(c_om, rel=1e-12)
    assert m["C_em"] == pytest.approx(c_em, rel=1e-12)
    assert m["eta_o"] == pytest.approx(0.6, rel=1e-12)


def test_invalid_parameters_raise_value_error():
    bad = dict(PARAMS, gamma_m=0.0)
    with pytest.raises(ValueError):
        phonox.compute_metrics(bad)


def test_microwave_quantities():
    c_i, c_m, f, tan_d = 0.2e-15, 0.5e-15, 4e9, 1e-3
    q = phonox.microwave_quantities(c_i, c_m, f, tan_d)
    w = 2 * math.pi * f
    assert q["Z_mu"] == pytest.approx(1 / (w * (c_i + c_m)), rel=1e-12)
    assert q["kappa_ln_hz"] == pytest.approx(f * tan_d * c_i / (c_i + c_m), rel=1e-12)


def test_anti_crossing_splitting():
    wp, wm, p_plus, p_minus = phonox.anti_crossing(10.0, 10.0, 0.5)
    assert wp - wm == pytest.approx(1.0)
    assert p_plus == pytest.approx(0.5)


def test_hard_wall_chain():
    n, wx, tau = 10, 100.0, 2.0
    w = sorted(z.real for z in phonox.chain_spectrum(n, wx, tau))
    ref = sorted(wx + 2 * tau - 2 * tau * math.cos(j * math.pi / (n + 1)) for j in range(1, n + 1))
    assert w == pytest.approx(ref, abs=1e-9)


def test_taper_law_endpoint():
    hn = 500.0
    ref = (-1271.0 + 9.365 * hn - 0.01875 * hn**2 + 1.238e-5 * hn**3) * 1e-9
    assert phonox.taper_hx(500e-9) == pytest.approx(ref, rel=1e-12)


def test_nelder_mead_with_python_objective():
    r = phonox.nelder_mead(lambda x: (x[0] - 3.0) ** 2 + (x[1] + 1.0) ** 2, [0.0, 0.0], max_evals=500)
    assert r["x"] == pytest.approx([3.0, -1.0], abs=1e-5)
    trace = r["best_trace"]
    assert all(b <= a for a, b in zip(trace, trace[1:]))


def test_presets_and_modes():
    assert "sOMC-transducer" in phonox.device_preset_names()
    layout = phonox.device_preset("sOMC-transducer")
    modes = phonox.transducer_modes(layout, mech_modes=6)
    assert len(modes["f_m"]) == 6
    assert modes["f_o"] > 1e14


def test_run_cli_metrics(tmp_path):
    args = ["metrics"]
    for k, v in PARAMS.items():
        args += ["--" + k.replace("_", "-"), repr(v)]
    code, out, err = phonox.run_cli(args + ["--output", str(tmp_path / "run")])
    assert code == 0, err
    assert (tmp_path / "run" / "run.json").exists()
    code, _, _ = phonox.run_cli(["frobnicate"])
    assert code != 0
