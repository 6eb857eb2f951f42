import csv

import pytest

from vbaisac.array import beampattern, local_maxima
from vbaisac.harness import DEFAULTS, ConfigError, benchmark_uniform, parse_config
from vbaisac.harness.cli import main
from vbaisac.harness.experiments import EXPERIMENTS, LONG_HEADER, beampattern_columns

SMALL = """
[channel]
n_rx = 8
n_paths = 6
[array]
n_tx = 24
[sweep]
snr_db = -20, 0
rho = 0.5, 1.0
beampattern_rho = 0, 1
sigma_e = 0, 0.5
realizations = 3
seed = 5
"""


def read_rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def run_cli(tmp_path, command, *extra, config=SMALL):
    cfg = tmp_path / "scenario.ini"
    cfg.write_text(config)
    out = tmp_path / "out"
    code = main([command, "--config", str(cfg), "--out", str(out), *extra])
    return code, out / f"{command}.csv"


def test_defaults_round_trip():
    cfg = parse_config(DEFAULTS)
    assert cfg == parse_config()
    assert cfg.array.n_tx == 81 and cfg.sweep.realizations == 100
    assert cfg.sweep.snr_db == (-40, -35, -30, -25, -20, -15, -10, -5, 0)
    assert cfg.kinematics.waypoints == ()


def test_overrides_and_waypoints():
    cfg = parse_config("[solver]\nrho = 0.25\n[kinematics]\nwaypoints = 0.4 1.6; 1.5 2.9\n")
    assert cfg.solver.rho == 0.25
    assert cfg.kinematics.waypoints == ((0.4, 1.6), (1.5, 2.9))
    assert cfg.with_seed(9).sweep.seed == 9


@pytest.mark.parametrize("text,field", [
    ("[solver]\nrho = 1.5\n", "solver.rho"),
    ("[solver]\nrho = abc\n", "solver.rho"),
    ("[sweep]\nrealizations = 0\n", "sweep.realizations"),
    ("[solver]\nmethod = cvx\n", "solver.method"),
    ("[array]\nbogus = 1\n", "array.bogus"),
    ("[kinematics]\nwaypoints = 1 2 3\n", "kinematics.waypoints"),
    ("[kinematics]\nsteer_deg = 95\n", "kinematics.steer_deg"),
])
def test_config_errors_name_the_field(text, field):
    with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
        parse_config(text)


def test_cli_exit_codes(tmp_path, capsys):
    assert run_cli(tmp_path, "aoi", config="[solver]\nrho = 7\n")[0] == 2
    assert "solver.rho" in capsys.readouterr().err
    assert run_cli(tmp_path, "aoi", "--threads", "0")[0] == 2
    assert run_cli(tmp_path, "aoi", config="[kinematics]\nspeed = 0\naccel = 0\n")[0] == 3
    assert "degenerate-waypoint" in capsys.readouterr().err
    assert main(["print-defaults"]) == 0
    assert parse_config(capsys.readouterr().out) == parse_config()


def test_aoi_cardinality(tmp_path):
    code, path = run_cli(tmp_path, "aoi")
    rows = read_rows(path)
    kinds = [r[0] for r in rows[1:]]
    assert code == 0 and kinds == ["trajectory"] * 4 + ["aoi"] * 3


def test_beampattern_columns(tmp_path):
    code, path = run_cli(tmp_path, "beampattern")
    rows = read_rows(path)
    assert rows[0] == beampattern_columns(parse_config(SMALL))
    assert rows[0][1:3] == ["proposed_linear", "proposed_db"]
    assert len(rows) == 1802 and len(rows[1]) == 1 + 2 * 4


def test_uniform_benchmark_even_split():
    cfg = parse_config()
    bench = benchmark_uniform(cfg)
    assert bench.subarray_sizes == (27, 27, 27)
    pattern = beampattern(bench.covariance, cfg.array_config())
    peaks = pattern.power[local_maxima(pattern)[:3]]
    assert peaks.max() / peaks.min() < 1.05
    assert benchmark_uniform(parse_config("[array]\nn_tx = 82\n")).subarray_sizes == (28, 27, 27)


@pytest.mark.parametrize("command", ["se-sweep", "ee-sweep", "tv-sweep"])
def test_long_format_schema_and_coordinates(tmp_path, command):
    code, path = run_cli(tmp_path, command)
    rows = read_rows(path)
    assert code == 0 and tuple(rows[0]) == LONG_HEADER
    cfg = parse_config(SMALL)
    for r in rows[1:]:
        assert float(r[2]) in cfg.sweep.snr_db
        assert r[3] == "" or float(r[3]) in set(cfg.sweep.rho) | {cfg.solver.rho}
        assert r[4] == "" or float(r[4]) in cfg.sweep.sigma_e
        assert r[8] == "5" and r[7] == "3"
        value = r[6]
        assert len(value.lstrip("-").replace(".", "").split("e")[0].lstrip("0")) <= 12


def test_seed_changes_values_not_shape(tmp_path):
    _, path = run_cli(tmp_path, "se-sweep")
    first = read_rows(path)
    _, path = run_cli(tmp_path, "se-sweep", "--seed", "6")
    second = read_rows(path)
    assert len(first) == len(second)
    assert [r[:6] for r in first] == [r[:6] for r in second]
    assert [r[6] for r in first] != [r[6] for r in second]


@pytest.mark.parametrize("command", sorted(EXPERIMENTS))
def test_outputs_repeat_across_thread_counts(tmp_path, command):
    _, path = run_cli(tmp_path, command)
    one = path.read_bytes()
    _, path = run_cli(tmp_path, command, "--threads", "3")
    assert path.read_bytes() == one


def test_zero_sigma_rows_match_static_sweep(tmp_path):
    _, se = run_cli(tmp_path, "se-sweep")
    static = {(r[1], r[2], r[3]): r[6] for r in read_rows(se)[1:] if r[5] == "se_mean"}
    _, tv = run_cli(tmp_path, "tv-sweep")
    for r in read_rows(tv)[1:]:
        if r[4] == "0":
            assert static[(r[1], r[2], r[3])] == r[6]
