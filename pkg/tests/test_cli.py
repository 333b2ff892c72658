import csv
import io
import json
from pathlib import Path

import numpy as np
import pytest

from hcmu import io as hio
from hcmu.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(p)


def _plan(**kw):
    base = {"genus": 0, "cusps": [{"x": 0, "y": 0, "residue": 1 / 3}], "smooth_maxima": [{"x": 1, "y": 0}]}
    base.update(kw)
    return {"plan": base}


@pytest.fixture(scope="module")
def bundles(tmp_path_factory):
    d = tmp_path_factory.mktemp("bundles")
    out = {}
    for c in "abc":
        path = d / f"{c}.json"
        assert main(["synthesize", "--config", str(CONFIGS / f"config_{c}.json"), "--out", str(path)]) == 0
        out[c] = str(path)
    return out


def test_check_feasible(tmp_path, capsys):
    assert main(["check", "--config", _write(tmp_path, "c.json", _plan())]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["S"] == 1 and rep["feasible"] is True


def test_check_infeasible_genus_one(tmp_path, capsys):
    cfg = _plan(genus=1, smooth_maxima=[])
    assert main(["check", "--config", _write(tmp_path, "c.json", cfg)]) == 1
    rep = json.loads(capsys.readouterr().out)
    assert rep["S"] == -1 and rep["feasible"] is False
    assert rep["diagnostics"][0]["code"] == "NegativeSaddleBudget"


def test_check_no_maxima(tmp_path, capsys):
    assert main(["check", "--config", _write(tmp_path, "c.json", _plan(smooth_maxima=[]))]) == 1
    codes = [d["code"] for d in json.loads(capsys.readouterr().out)["diagnostics"]]
    assert "NoMaxima" in codes


def test_check_parse_errors(tmp_path, capsys):
    assert main(["check", "--config", _write(tmp_path, "bad.json", '{"plan": {"cusps": [\n  {"x": 0,,}]}}')]) == 2
    err = capsys.readouterr().err
    assert "line 2" in err and "column" in err
    bad_field = _plan(cusps=[{"x": 0, "y": 0, "residue": "big"}])
    assert main(["check", "--config", _write(tmp_path, "b.json", bad_field)]) == 2
    assert "plan.cusps[0]" in capsys.readouterr().err
    assert main(["check", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["frobnicate", "--config", "x"]) == 2


def test_synthesize_classifications(bundles):
    kinds = {c: sorted(r["kind"] for r in hio.load_json(p)["classification"]) for c, p in bundles.items()}
    assert kinds["a"] == ["CUSP", "SMOOTH_MAX"]
    assert kinds["b"] == ["CONICAL_SADDLE", "CUSP", "SMOOTH_MAX", "SMOOTH_MAX"]
    assert kinds["c"] == ["CONICAL_MAX", "CUSP"]
    saddle = [r for r in hio.load_json(bundles["b"])["classification"] if r["kind"] == "CONICAL_SADDLE"][0]
    assert saddle["angle_factor"] == 2.0
    cone = [r for r in hio.load_json(bundles["c"])["classification"] if r["kind"] == "CONICAL_MAX"][0]
    assert cone["angle_factor"] == pytest.approx(0.5, rel=1e-15)


def test_synthesize_infinity_saddle(tmp_path, capsys):
    assert main(["synthesize", "--config", str(CONFIGS / "config_symmetric.json")]) == 0
    b = json.loads(capsys.readouterr().out)
    assert b["realized_saddles"] == [{"at": "infinity", "multiplicity": 1}]


def test_synthesize_infeasible_exits_1(tmp_path):
    assert main(["synthesize", "--config", _write(tmp_path, "c.json", _plan(smooth_maxima=[]))]) == 1


def _sample(tmp_path, bundle, name="s.csv", cfg=None):
    cfg = cfg or str(CONFIGS / "config_a.json")
    out = tmp_path / name
    assert main(["sample", "--config", cfg, "--bundle", bundle, "--out", str(out)]) == 0
    return out.read_bytes()


def test_sample_format_and_determinism(tmp_path, bundles):
    a = _sample(tmp_path, bundles["a"], "1.csv")
    b = _sample(tmp_path, bundles["a"], "2.csv")
    assert a == b
    text = a.decode()
    lines = text.split("\r\n")
    assert lines[0].startswith("#")
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    assert body[0] == "x,y,K,conformal_factor"
    assert len(body) == 1 + 200 * 200
    rows = np.array([[float(v) for v in ln.split(",")] for ln in body[1:]])
    assert np.all((rows[:, 2] > -1) & (rows[:, 2] < 2))
    assert np.all(rows[:, 3] > 0)


def test_sample_singular_rows_and_symmetry(tmp_path, bundles):
    # grid through both poles; columns mirror across Re z = 1/2
    cfg = {**json.loads((CONFIGS / "config_a.json").read_text()),
           "sampling": {"xmin": -1, "xmax": 2, "ymin": -1, "ymax": 1, "nx": 31, "ny": 21}}
    text = _sample(tmp_path, bundles["a"], cfg=_write(tmp_path, "g.json", cfg)).decode()
    assert "# singular rows: 2" in text
    rows = list(csv.reader(io.StringIO(text.replace("\r\n", "\n")), ))
    data = [r for r in rows if r and not r[0].startswith("#")][1:]
    grid = {(round(float(x), 12), round(float(y), 12)): (float(k), f) for x, y, k, f in data}
    assert np.isnan(grid[(0.0, 0.0)][0]) and grid[(1.0, 0.0)][1] == "nan"
    from hcmu import sigma

    pairs = 0
    for (x, y), (k, _) in grid.items():
        if np.isnan(k):
            continue
        # rows mirrored across the real axis carry equal K
        assert k == pytest.approx(grid[(x, round(-y, 12) + 0.0)][0], abs=1e-14)
        # z -> 1 - conj(z) swaps cusp and maximum: sigma(K) + sigma(K') = 2 A0 = 0
        mirror = grid.get((round(1 - x, 12) + 0.0, y))
        if mirror is not None and -1 < mirror[0] < 2 and -1 < k < 2:
            assert sigma(k, -1.0) + sigma(mirror[0], -1.0) == pytest.approx(0.0, abs=1e-9)
            pairs += 1
    assert pairs > 100


def test_bundle_round_trip(tmp_path, bundles):
    from hcmu import make_metric, make_params, realize_on_sphere
    from hcmu.configs import CONFIG_B

    real = realize_on_sphere(CONFIG_B)
    direct = make_metric(real.form, make_params(real.form, Lambda=real.report.Lambda))
    loaded = hio.metric_from_bundle(hio.load_json(bundles["b"]))
    rng = np.random.default_rng(0)
    z = rng.uniform(-1, 3, 100) + 1j * rng.uniform(-1.5, 1.5, 100)
    for a, b in ((direct.field.K(z), loaded.field.K(z)), (direct.conformal_factor(z), loaded.conformal_factor(z))):
        assert [f"{v:.17g}" for v in a] == [f"{v:.17g}" for v in b]


def test_bundle_round_trip_with_base_point(tmp_path, capsys):
    cfg = {**json.loads((CONFIGS / "config_a.json").read_text()), "normalization": {"p0": {"x": 0.5, "y": 0}, "K0": 0.5}}
    cpath = _write(tmp_path, "n.json", cfg)
    bpath = str(tmp_path / "b.json")
    assert main(["synthesize", "--config", cpath, "--out", bpath]) == 0
    m = hio.metric_from_bundle(hio.load_json(bpath))
    assert m.params.A0 == pytest.approx(2.0, abs=1e-14)
    assert m.field.K(0.5 + 3j) == pytest.approx(0.5, abs=1e-14)


def test_verify_and_corrupted_bundle(tmp_path, bundles, capsys):
    cfg = str(CONFIGS / "config_a.json")
    main(["verify", "--config", cfg, "--bundle", bundles["a"]])
    rep = json.loads(capsys.readouterr().out)
    checks = {c["name"]: c["passed"] for c in rep["checks"]}
    assert checks["curvature_pde"] and checks["gradient_ode"] and checks["energy_C1"]

    b = hio.load_json(bundles["a"])
    b["mu"] *= 1.01
    bad = _write(tmp_path, "bad.json", b)
    assert main(["verify", "--config", cfg, "--bundle", bad]) == 1
    checks = {c["name"]: c["passed"] for c in json.loads(capsys.readouterr().out)["checks"]}
    assert not checks["curvature_pde"] and not checks["params_consistency"]


def test_verify_missing_bundle(tmp_path):
    cfg = str(CONFIGS / "config_a.json")
    assert main(["verify", "--config", cfg, "--bundle", str(tmp_path / "nope.json")]) == 2
    assert main(["verify", "--config", cfg]) == 2


def test_shipped_configs_pass_verify(bundles):
    # the shipped configs set deep cusp radii, where s(r) does fall below 0.05
    for c in "abc":
        assert main(["verify", "--config", str(CONFIGS / f"config_{c}.json"), "--bundle", bundles[c],
                     "--out", "/dev/null"]) == 0


def test_energy_command(tmp_path, bundles, capsys):
    out = tmp_path / "e.json"
    assert main(["energy", "--config", str(CONFIGS / "config_c.json"), "--bundle", bundles["c"],
                 "--out", str(out), "--n-max", "2"]) == 0
    rows = json.loads(out.read_text())
    assert [r["n"] for r in rows] == [0, 1, 2]
    assert set(rows[0]) == {"n", "quadrature", "closed_form", "rel_error"}
    assert all(r["rel_error"] < 0.01 for r in rows)
