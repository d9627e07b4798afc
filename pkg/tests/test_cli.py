import json
import math
from pathlib import Path

import pytest

from mgdyn.cli import main
from mgdyn.experiments import StaticConfig, parse_observable, static_limit_value
from mgdyn.multigraph import Multigraph, format_graph, ind_density, ms_distance_graphs
from mgdyn.oracle import naive_ms_distance

ROOT = Path(__file__).resolve().parents[1]
SMOKE = str(ROOT / "configs" / "smoke.ini")


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


@pytest.mark.parametrize("cmd,files", [
    ("verify", ["verify_report.json"]),
    ("static-limit", ["static_limit.csv", "static_limit_replicates.csv", "static_limit_report.json"]),
    ("dynamics", ["dynamics_trajectories.csv", "dynamics.csv", "dynamics_report.json"]),
    ("paths", ["paths.csv", "paths_report.json"]),
])
def test_smoke_subcommands(tmp_path, cmd, files, capsys):
    code = main([cmd, "--config", SMOKE, "--out-dir", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0, out
    assert "overall: PASS" in out
    for f in files:
        assert (tmp_path / f).stat().st_size > 0
    report = json.loads((tmp_path / files[-1]).read_text())
    assert report["seed"] == 7 and report["passed"] is True


def test_seed_flag_overrides_config(tmp_path):
    assert main(["paths", "--config", SMOKE, "--seed", "11", "--out-dir", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "paths_report.json").read_text())["seed"] == 11


def test_corrupted_formula_fails(tmp_path):
    cfg = write(tmp_path, "c.ini", "[verify]\nchecks = cm_exact\ncorrupt_formula = true\n")
    assert main(["verify", "--config", cfg, "--out-dir", str(tmp_path)]) == 1
    report = json.loads((tmp_path / "verify_report.json").read_text())
    assert report["passed"] is False


def test_empty_check_list_passes(tmp_path):
    cfg = write(tmp_path, "c.ini", "[verify]\nchecks =\n")
    assert main(["verify", "--config", cfg, "--out-dir", str(tmp_path)]) == 0


@pytest.mark.parametrize("text", [
    "[verify]\nbogus = 1\n",
    "[nonsense]\nx = 1\n",
    "[verify]\ndraws = many\n",
    "[verify]\nchecks = cm_exact, no_such_check\n",
    "[run]\nseed = -1\n",
    "[run]\nworkers = 0\n",
    "not an ini file",
])
def test_bad_config_exit_two(tmp_path, text, capsys):
    cfg = write(tmp_path, "bad.ini", text)
    assert main(["verify", "--config", cfg, "--out-dir", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err


def test_missing_config_and_bad_flags(tmp_path):
    assert main(["verify", "--config", str(tmp_path / "nope.ini")]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["verify", "--budget", "0", "--out-dir", str(tmp_path)]) == 2


def test_regime_guard(tmp_path):
    cfg = write(tmp_path, "r.ini", "[paths]\nn = 6\np1 = 0.4\np2 = 0.2\ntimes = 0.01\nreplicates = 20\n")
    assert main(["paths", "--config", cfg, "--out-dir", str(tmp_path)]) == 2
    code = main(["paths", "--config", cfg, "--unsafe-regime", "--out-dir", str(tmp_path)])
    assert code in (0, 1)
    zero = write(tmp_path, "z.ini", "[paths]\np1 = 0\np2 = 0\n")
    assert main(["paths", "--config", zero, "--unsafe-regime", "--out-dir", str(tmp_path)]) == 2


def test_empty_times_header_only(tmp_path):
    cfg = write(tmp_path, "t.ini", "[dynamics]\nn = 5\ntimes =\nreplicates = 3\n")
    assert main(["dynamics", "--config", cfg, "--out-dir", str(tmp_path)]) == 0
    lines = (tmp_path / "dynamics_trajectories.csv").read_text().splitlines()
    assert lines == ["seed,replicate,time,step,y,pattern,value"]


def test_dist_command(tmp_path, capsys):
    g1 = Multigraph.from_adjacency([[2, 1, 0], [1, 0, 2], [0, 2, 0]])
    g2 = Multigraph.from_adjacency([[0, 1], [1, 4]])
    a = write(tmp_path, "a.txt", format_graph(g1))
    b = write(tmp_path, "b.txt", format_graph(g2))
    assert main(["dist", a, a]) == 0
    assert json.loads(capsys.readouterr().out)["value"] == 0
    assert main(["dist", a, b, "--i-max", "12", "--r-max", "3"]) == 0
    ab = json.loads(capsys.readouterr().out)
    assert main(["dist", b, a, "--i-max", "12", "--r-max", "3"]) == 0
    assert json.loads(capsys.readouterr().out)["value"] == ab["value"]
    ref = naive_ms_distance(g1.adj.tolist(), g2.adj.tolist(), I_max=12, R_max=3)
    assert ab["value"] == pytest.approx(ref, abs=1e-12)
    assert ab["value"] == ms_distance_graphs(g1, g2, 12, 3).value


def test_dist_errors(tmp_path):
    bad = write(tmp_path, "bad.txt", "2\n1 5\n")
    good = write(tmp_path, "good.txt", "2\n1 2\n")
    assert main(["dist", bad, good]) == 2
    assert main(["dist", good, str(tmp_path / "missing.txt")]) == 2
    assert main(["dist", good, good, "--max-k", "0"]) == 2


def test_regular_limit_value():
    cfg = StaticConfig(model="regular", c=0.5)
    v = static_limit_value(cfg, parse_observable("K2_1"), 0).value
    assert v == pytest.approx(0.5 * math.exp(-0.5), abs=1e-12)
    assert round(v, 5) == 0.30327


def test_pattern_larger_than_graph_has_zero_density():
    obs = parse_observable("ind:0 1 0;1 0 1;0 1 0")
    assert ind_density(obs.pattern, Multigraph(2, [(0, 1)])) == 0


def test_parse_observable_errors():
    for bad in ("K2_x", "ind:0 1;1", "what:0", "L_-1"):
        with pytest.raises(ValueError):
            parse_observable(bad)
