import json

import pytest

from lamos.errors import InvalidParameterError
from lamos.experiments import (
    CONFIG_ENV,
    DEFAULT_BASELINES,
    BaselineModel,
    Settings,
    ablation_rows,
    compare_rows,
    load_settings,
    monotonicity_violations,
    scaling_claims,
    settings_from_dict,
    sweep_rows,
)


def row(rows, design, n):
    return next(r for r in rows if r.design == design and r.n == n)


def test_baseline_cycles():
    modsram = DEFAULT_BASELINES[0]
    assert modsram.cycles(256) == 767
    assert modsram.cycles(512) > 3000
    assert modsram.cycles(2048) == 49088
    for b in DEFAULT_BASELINES:
        assert all(b.cycles(n) > 0 for n in (1, 8, 256, 4096))
    with pytest.raises(InvalidParameterError):
        BaselineModel("x", 0, 100.0, 1.0)


def test_table_at_256():
    rows = compare_rows([256])
    assert [r.design for r in rows] == ["LaMoS", "ModSRAM", "MeNTT", "BP-NTT"]
    lamos = row(rows, "LaMoS", 256)
    assert (lamos.cycles, lamos.latency_ns) == (104, 260)
    assert lamos.latency_area == pytest.approx(0.0286)
    assert row(rows, "ModSRAM", 256).latency_ns == pytest.approx(1826.19, abs=0.01)
    assert lamos.speedup == pytest.approx(7.024, abs=0.001)
    for r in rows:
        assert r.latency_area == pytest.approx(r.latency_ns * 1e-3 * r.area_mm2)


def test_scaling_endpoints():
    rows = compare_rows([2048])
    assert {r.design for r in rows} == {"LaMoS", "ModSRAM"}
    assert row(rows, "LaMoS", 2048).latency_ns == 8660
    assert row(rows, "ModSRAM", 2048).latency_ns == pytest.approx(116876.19, abs=0.01)
    claims = scaling_claims(rows)
    assert len(claims) == 2 and all(c.ok for c in claims)


def test_area_efficiency_reported_as_modelled():
    # about 1.05e6 modmuls per second per mm^2 at 2048 bits
    assert row(compare_rows([2048]), "LaMoS", 2048).ops_per_mm2 == pytest.approx(1.0498e6, rel=1e-3)


def test_ablation():
    rows = {r.n: r for r in ablation_rows()}
    assert (rows[256].serial, rows[256].parallel) == (197, 104)
    assert (rows[512].naive, rows[512].grouped) == (389, 296)
    assert (rows[1024].naive, rows[1024].grouped) == (1538, 968)


def test_sweep():
    rows = sweep_rows([256, 512, 1024, 2048], [1, 2, 4, 8])
    assert max(r.cycles for r in rows if r.m == 4) == 1736 < 2000
    assert next(r for r in rows if (r.n, r.m) == (256, 2)).cycles == 104
    assert not monotonicity_violations(rows)
    with pytest.raises(InvalidParameterError):
        sweep_rows([], [1])


def test_settings_overlay():
    s = settings_from_dict({
        "arch": {"macro_count": 4, "limb_bits": 8, "clock_mhz": 500.0},
        "area_mm2": 0.2,
        "baselines": {"ModSRAM": {"clock_mhz": 400.0}, "Other": {"cycles_ref": 10, "clock_mhz": 1.0, "area_mm2": 1.0}},
    })
    assert s.arch.macro_count == 4 and s.arch.clock_mhz == 500.0
    assert s.baseline("ModSRAM").clock_mhz == 400.0
    assert s.baseline("ModSRAM").cycles_ref == 767
    assert s.baseline("Other").cycles(256) == 10
    assert settings_from_dict(s.as_dict()) == s


@pytest.mark.parametrize("doc", [{"arc": {}}, {"arch": {"macros": 2}}, {"baselines": {"ModSRAM": {"speed": 1}}},
                                 {"arch": {"grouping": "sometimes"}}, {"area_mm2": 0}])
def test_settings_reject_bad_documents(doc):
    with pytest.raises(InvalidParameterError):
        settings_from_dict(doc)


def test_load_settings_from_file_and_env(tmp_path, monkeypatch):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"arch": {"macro_count": 8}}))
    assert load_settings(path).arch.macro_count == 8
    monkeypatch.setenv(CONFIG_ENV, str(path))
    assert load_settings().arch.macro_count == 8
    monkeypatch.delenv(CONFIG_ENV)
    assert load_settings() == Settings()
    path.write_text("{not json")
    with pytest.raises(InvalidParameterError):
        load_settings(path)
