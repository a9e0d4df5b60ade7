import math

import numpy as np
import pytest

import hybridqc


def test_builtin_scenarios():
    names = hybridqc.scenarios()
    assert {"fig3a", "fig3b", "fig4", "fig5a", "fig5b"} <= set(names)
    assert "[modes]" in hybridqc.scenario_text("fig3a")


def test_run_ry():
    r = hybridqc.run("fig3a", grid=0.5)
    s = r["summary"]
    assert s["format_version"] == 1
    assert s["gate"] == "ry"
    assert s["lambda"] < 1e-4
    assert r["matrix"].shape == (4, 4)
    assert np.iscomplexobj(r["matrix"])
    assert r["times"][0] == 0.0
    assert r["times"][-1] == pytest.approx(s["gate_duration_ns"])
    assert max(abs(n - 1.0) for n in r["norm2"]) < 1e-9
    assert r["csv"].startswith("t_ns")


def test_overrides_and_options():
    r = hybridqc.run("fig3a", ["spins.A.Gbar=120"], picture="interaction", integrator="adaptive", trajectory=False)
    s = r["summary"]
    # pi / Gbar, up to the small duration trim of the pair model
    assert s["resonant_time_ns"] == pytest.approx(math.pi / (2 * math.pi * 0.12), rel=1e-2)
    assert s["propagation"]["picture"] == "interaction"
    assert r["csv"] == ""


def test_sweep_rows():
    rows = hybridqc.sweep("fig3a", "spins.A.Gbar", [0, 60])
    assert rows[0]["exit_code"] == 1 and rows[0]["summary"] is None
    assert rows[1]["summary"]["lambda"] < 1e-4


def test_errors():
    with pytest.raises(hybridqc.ValidationError):
        hybridqc.run("nosuch")
    with pytest.raises(ValueError):
        hybridqc.run("fig3a", tolerance=1e-2)
    with pytest.raises(ValueError):
        hybridqc.validate("[modes]\nmode A: fundamental 22\n")


def test_validate_and_spectrum():
    findings = hybridqc.validate(hybridqc.scenario_text("fig4"))
    assert all(f[0] != "error" for f in findings)
    levels = hybridqc.cpb_spectrum(10.0, 4.0)
    assert levels["gap01_ghz"] > 0
    assert levels["gap12_ghz"] > levels["gap01_ghz"]
