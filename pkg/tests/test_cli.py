import csv
import json

import pytest

from mcvd import cli
from mcvd.exceptions import NumericError


def write_cfg(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg) if not isinstance(cfg, str) else cfg)
    return str(path)


def run(tmp_path, cfg, *extra):
    out = tmp_path / "out.csv"
    code = cli.main(["run", write_cfg(tmp_path, cfg), "--out", str(out), *extra])
    return code, out


def header(path):
    return path.read_text().splitlines()[0]


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_malformed_config_writes_nothing(tmp_path, capsys):
    code, out = run(tmp_path, "{not json")
    assert code == 2 and not out.exists()
    assert "malformed JSON" in capsys.readouterr().err


def test_unknown_key_is_named(tmp_path, capsys):
    code, out = run(tmp_path, {"mode": "expectations", "colour": 1})
    assert code == 2 and "colour" in capsys.readouterr().err and not out.exists()


@pytest.mark.parametrize(
    "cfg",
    [
        {"mode": "nope"},
        {"mode": "expectations", "sweep_var": "ts", "sweep": [2.0, 1.0]},
        {"mode": "expectations", "sweep_var": "ts", "sweep": []},
        {"mode": "ber_analytic", "rd": 3.0},
        {"mode": "ber_analytic", "mu": "fast"},
        {"mode": "figure", "figure": "fig9"},
        {"mode": "ber_analytic", "L": 2, "rd_b": 5.0, "rd_c": 9.0},
    ],
)
def test_config_errors(tmp_path, cfg):
    assert run(tmp_path, cfg)[0] == 2


def test_headers_are_fixed(tmp_path):
    cases = [
        ({"mode": "expectations", "sweep_var": "rd", "sweep": [8.0, 10.0]}, "rd_um,e_s,e_i,e_c,e_t"),
        ({"mode": "ber_analytic", "sweep_var": "eta", "sweep": [1, 2]}, "eta,peb0,peb1,pe"),
        ({"mode": "ber_analytic", "sweep_var": "lambda", "sweep": [1e-5]}, "lambda_per_um3,peb0,peb1,pe"),
        ({"mode": "ber_analytic", "sweep_var": "mu", "sweep": [1.0]}, "mu_per_s,peb0,peb1,pe"),
        ({"mode": "ber_mc", "realizations": 50, "sweep_var": "eta", "sweep": [1, 2]}, "eta,peb0,peb1,pe,se_pe"),
        ({"mode": "threshold_table", "rd_b": 5.0, "rd_c": 5.5, "step": 0.1}, "rd_um,eta_opt,pe_min"),
        ({"mode": "figure", "figure": "fig3"}, "ts_s,e_s,e_i,e_c,e_t"),
    ]
    for cfg, expected in cases:
        code, out = run(tmp_path, cfg)
        assert code == 0 and header(out) == expected


def test_fig3_preset(tmp_path):
    code, out = run(tmp_path, {"mode": "figure", "figure": "fig3"})
    data = rows(out)
    assert code == 0 and len(data) == 100
    assert float(data[0]["ts_s"]) == 0.1 and float(data[-1]["ts_s"]) == 10.0
    assert {d["e_c"] for d in data} == {"2.7524854034658528"}


def test_fig5_preset(tmp_path):
    code, out = run(tmp_path, {"mode": "figure", "figure": "fig5"})
    data = rows(out)
    assert code == 0 and header(out) == "series,eta,peb0,peb1,pe"
    assert {d["series"] for d in data} == {"rd_um=8", "rd_um=10", "rd_um=12"}
    pe = [float(d["pe"]) for d in data if d["series"] == "rd_um=10"]
    assert min(range(len(pe)), key=pe.__getitem__) == 3


def test_numbers_round_trip_and_output_is_deterministic(tmp_path):
    cfg = {"mode": "ber_mc", "realizations": 200, "seed": 9, "sweep_var": "eta", "sweep": [1, 3, 5], "L": 2}
    _, out = run(tmp_path, cfg)
    first = out.read_text()
    _, out = run(tmp_path, cfg)
    assert out.read_text() == first
    from mcvd.ber import ber_no_isi_fixed
    from mcvd.channel import SystemParams

    _, out = run(tmp_path, {"mode": "ber_analytic", "sweep_var": "eta", "sweep": [4]})
    assert float(rows(out)[0]["pe"]) == ber_no_isi_fixed(10.0, 4, SystemParams()).pe


def test_seed_and_realization_overrides(tmp_path):
    cfg = {"mode": "ber_mc", "realizations": 100, "sweep_var": "eta", "sweep": [2]}
    _, out = run(tmp_path, cfg, "--seed", "1")
    a = out.read_text()
    _, out = run(tmp_path, cfg, "--seed", "2")
    assert out.read_text() != a
    _, out = run(tmp_path, cfg, "--seed", "1")
    assert out.read_text() == a
    _, out = run(tmp_path, cfg, "--seed", "1", "--realizations", "1")
    assert float(rows(out)[0]["pe"]) in (0.0, 0.5, 1.0)


def test_json_mirrors_csv(tmp_path):
    cfg = {"mode": "expectations", "sweep_var": "ts", "sweep": [0.5, 1.0]}
    _, out = run(tmp_path, cfg)
    js = tmp_path / "out.json"
    assert cli.main(["run", write_cfg(tmp_path, cfg), "--out", str(js)]) == 0
    data = json.loads(js.read_text())
    assert [list(d) for d in data] == [list(r) for r in rows(out)]
    assert [d["e_s"] for d in data] == [float(r["e_s"]) for r in rows(out)]


def test_numeric_failure_keeps_partial_rows(tmp_path, monkeypatch, capsys):
    real = cli.ber.ber_no_isi_fixed

    def flaky(rd, eta, p, **kw):
        if rd > 9:
            raise NumericError("quadrature did not converge")
        return real(rd, eta, p, **kw)

    monkeypatch.setattr(cli.ber, "ber_no_isi_fixed", flaky)
    code, out = run(tmp_path, {"mode": "ber_analytic", "sweep_var": "rd", "sweep": [6.0, 8.0, 10.0, 12.0]})
    assert code == 3
    data = rows(out)
    assert header(out) == "rd_um,peb0,peb1,pe,error"
    assert [d["rd_um"] for d in data] == ["6", "8", "10"]
    assert data[-1]["error"] == "quadrature did not converge" and data[-1]["pe"] == ""
    assert "numeric error" in capsys.readouterr().err


def test_presets_commands(capsys):
    assert cli.main(["presets", "list"]) == 0
    listed = capsys.readouterr().out.split()
    assert all(f"fig{k}" in listed for k in range(3, 9))
    assert cli.main(["presets", "show", "fig5"]) == 0
    shown = json.loads(capsys.readouterr().out)
    assert shown["mode"] == "figure" and shown["mu"] == 5.0
    assert cli.main(["presets", "show", "fig1"]) == 2


def _table(path, rows_, se=True):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eta", "pe"] + (["se_pe"] if se else []))
        for r in rows_:
            w.writerow(r if se else r[:2])
    return str(path)


def test_compare_zero_se_is_undefined_not_fatal(tmp_path, capsys):
    a = _table(tmp_path / "a.csv", [[1, 0.2, 0], [2, 0.1, 0]])
    assert cli.main(["compare", a, a]) == 0
    assert "2 undefined" in capsys.readouterr().out


def test_compare_names_failing_points(tmp_path, capsys):
    mc = _table(tmp_path / "mc.csv", [[e, 0.1 * e, 0.01] for e in range(1, 6)])
    an = _table(tmp_path / "an.csv", [[e, 0.1 * e + (0.5 if e in (2, 4) else 0.001), 0] for e in range(1, 6)], se=False)
    report = tmp_path / "report.csv"
    assert cli.main(["compare", an, mc, "--out", str(report)]) == 1
    text = capsys.readouterr().out
    assert "failing points: eta=2; eta=4" in text and "pass rate: 3/5" in text
    assert [r["status"] for r in rows(report)] == ["pass", "fail", "pass", "fail", "pass"]
    assert cli.main(["compare", an, mc, "--min-pass-rate", "0.5"]) == 0


def test_compare_grid_mismatch(tmp_path, capsys):
    a = _table(tmp_path / "a.csv", [[1, 0.2, 0.01], [2, 0.1, 0.01]])
    b = _table(tmp_path / "b.csv", [[1, 0.2, 0.01], [3, 0.1, 0.01]])
    assert cli.main(["compare", a, b]) == 2
    assert "eta=2 vs 3" in capsys.readouterr().err
    c = _table(tmp_path / "c.csv", [[1, 0.2, 0.01]])
    assert cli.main(["compare", a, c]) == 2


def test_compare_analytic_against_mc(tmp_path):
    base = {"mu": 5.0, "rd": 10.0, "sweep_var": "eta", "sweep": list(range(1, 11))}
    an, mc = tmp_path / "an.csv", tmp_path / "mc.csv"
    assert cli.main(["run", write_cfg(tmp_path, {**base, "mode": "ber_analytic"}), "--out", str(an)]) == 0
    assert cli.main(["run", write_cfg(tmp_path, {**base, "mode": "ber_mc", "seed": 4}), "--out", str(mc)]) == 0
    report = cli.compare_tables(str(an), str(mc))
    assert sum(r["status"] == "pass" for r in report) >= 9


def test_module_entry_point():
    import subprocess
    import sys

    done = subprocess.run([sys.executable, "-m", "mcvd", "presets", "list"], capture_output=True, text=True)
    assert done.returncode == 0 and "fig8" in done.stdout
