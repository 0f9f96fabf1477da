import subprocess
import sys

import pytest

from finres.cli import (
    EXIT_BUDGET,
    EXIT_CONFIG,
    EXIT_CONSTRUCTION,
    EXIT_NOT_MIXING,
    EXIT_OK,
    ConfigError,
    RunConfig,
    cmd_sweep,
    cmd_verify,
    main,
    read_config_file,
)


def report(text: str) -> dict:
    """Comparable section of a report as a dict."""
    out = {}
    for line in text.splitlines():
        if line.startswith("---"):
            break
        key, _, value = line.partition(" ")
        out[key] = value
    return out


def run(argv, capsys):
    code = main(argv)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_default_henon_run_certifies_mixing(capsys):
    code, out, _ = run(["verify", "--p1", "446", "--workers", "1"], capsys)
    r = report(out)
    assert code == EXIT_OK
    assert r["status"] == "ok" and r["mixing"] == "true" and r["transitive"] == "true"
    assert float.fromhex(r["r_plus"]) < 0.05
    assert r["certified"] == "true"
    assert r["divisions"] == "446 159"


def test_report_is_deterministic_apart_from_timings(capsys):
    _, a, _ = run(["verify", "--p1", "446"], capsys)
    _, b, _ = run(["verify", "--p1", "446", "--workers", "2"], capsys)
    assert a.split("--- timings")[0] == b.split("--- timings")[0]


def test_coarse_grid_reports_escape(capsys):
    code, out, err = run(["verify", "--p1", "100"], capsys)
    assert code == EXIT_CONSTRUCTION
    r = report(out)
    assert r["status"] == "construction-failure"
    assert len(r["escape_box"].split()) == 2
    assert "escapes" in err


def test_logistic_toy_mixes(capsys):
    code, out, _ = run(["verify", "--map", "logistic", "--p1", "64"], capsys)
    r = report(out)
    assert r["mixing"] == "true"
    # mixing but r_plus above the default 0.05, so not certified
    assert r["certified"] == "false" and code == EXIT_NOT_MIXING
    code, out, _ = run(["verify", "--map", "logistic", "--p1", "256"], capsys)
    assert code == EXIT_OK


def test_budget_exit_code(capsys):
    code, out, err = run(["verify", "--p1", "446", "--memory-budget", "40K"], capsys)
    assert code == EXIT_BUDGET
    assert report(out)["status"] == "budget-exceeded"


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--p1", "0"],
        ["verify", "--map", "tent"],
        ["verify", "--eps", "-1"],
        ["verify", "--x0=1,2,3"],
        ["verify", "--region=0,1"],
        ["verify", "--a-den", "0"],
        ["verify", "--kappa", "1"],
        ["verify", "--x0=5,5"],
        ["verify", "--map", "logistic", "--b-num", "1"],
        ["verify", "--memory-budget", "lots"],
        ["frobnicate"],
    ],
)
def test_configuration_errors(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == EXIT_CONFIG
    assert "configuration error" in err
    assert out == ""


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# coarse grid\np1 = 100\nmetric = max\neps = 0x1.999999999999ap-5\n")
    assert read_config_file(cfg) == {"p1": 100, "metric": "max", "eps": 0.05}
    code, out, _ = run(["verify", "--config", str(cfg)], capsys)
    assert code == EXIT_CONSTRUCTION
    code, out, _ = run(["verify", "--config", str(cfg), "--p1", "446"], capsys)
    assert code == EXIT_OK
    bad = tmp_path / "bad.cfg"
    bad.write_text("p1 = 446\nwidth: 3\n")
    with pytest.raises(ConfigError, match=":2:"):
        read_config_file(bad)


def test_report_file_and_exports_round_trip(tmp_path, capsys):
    rep_path, g_path, c_path = tmp_path / "r.txt", tmp_path / "g.txt", tmp_path / "c.txt"
    code, out, _ = run(
        ["verify", "--p1", "446", "--report", str(rep_path), "--export-graph", str(g_path),
         "--export-cover", str(c_path)],
        capsys,
    )
    assert code == EXIT_OK and out == ""
    built = report(rep_path.read_text())
    code, out, _ = run(["analyze-graph", str(g_path)], capsys)
    again = report(out)
    assert code == EXIT_OK
    for key in ("scc_count", "period", "transitive", "mixing", "edges"):
        assert again[key] == built[key]
    assert again["boxes"] == built["boxes"]
    assert c_path.read_text().startswith("dim 2 446 159 0x1.0000000000000p-1022 euclidean")


def test_handwritten_graphs(tmp_path, capsys):
    cyc = tmp_path / "cyc.txt"
    cyc.write_text("vertices 3 edges 3\n0 1\n1 2\n2 0\n")
    code, out, _ = run(["analyze-graph", str(cyc)], capsys)
    r = report(out)
    assert code == EXIT_NOT_MIXING
    assert r["transitive"] == "true" and r["mixing"] == "false" and r["period"] == "3"
    loop = tmp_path / "loop.txt"
    loop.write_text("vertices 3 edges 4\n0 1\n1 2\n2 0\n2 2\n")
    code, out, _ = run(["analyze-graph", str(loop)], capsys)
    assert code == EXIT_OK and report(out)["mixing"] == "true"
    broken = tmp_path / "broken.txt"
    broken.write_text("vertices 3 edges 2\n0 1\n1 q\n")
    code, _, err = run(["analyze-graph", str(broken)], capsys)
    assert code == EXIT_CONFIG and ":3:" in err


def test_sweep_table_and_singleton_match(capsys):
    code, out, _ = run(["sweep", "--p1-list", "100,446,4460"], capsys)
    lines = out.splitlines()
    assert lines[0].split() == ["p1", "status", "boxes", "edges", "r_plus", "mixing", "seconds"]
    assert lines[1].split()[1] == "construction-failure"
    assert lines[2].split()[1] == "ok"
    ratio = lines[-1].split()
    assert ratio[:3] == ["ratio", "446", "4460"]
    assert code == EXIT_NOT_MIXING  # one row failed
    cfg = RunConfig(p1=446, workers=1)
    (row,) = cmd_sweep(cfg, [446])
    direct = cmd_verify(cfg)
    assert row.lines()[: row.lines().index("--- timings")] == direct.lines()[: direct.lines().index("--- timings")]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "finres", "verify", "--map", "linear1d", "--p1", "20"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode in (EXIT_OK, EXIT_NOT_MIXING)
    assert proc.stdout.startswith("status ok")
