import csv
import io
import json
import math

import pytest

from scwqkd.cli import CSV_HEADER, main, run_checks, sweep_rows
from scwqkd.config import Config, ConfigError, SweepSpec, parse_config
from scwqkd.params import LinkParams, ModulationParams, SecurityParams

SMALL_SWEEP = """
[sweep]
loss_db_start = 0
loss_db_stop = 20
loss_db_step = 5
n_values = [100000, 1000000, 10000000]
"""


def write(tmp_path, text, name="cfg.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_defaults_are_reference_parameters():
    cfg = parse_config("")
    assert cfg == Config()
    p, lp, sec = cfg.modulation, cfg.link, cfg.security
    assert (p.mu0, p.m, p.M) == (4.0, 0.319, 16)
    assert lp.T == 10e-9 and lp.vartheta == 1e-3 and lp.eta_D == 0.25 and lp.gamma_dark == 25
    assert lp.eta_B_db == 6.4 and lp.delta_phi == pytest.approx(math.radians(5))
    assert sec.eps_s == sec.eps_EC == sec.eps_PA == 1e-10 and sec.ec_fail_target == 1e-6
    assert sec.F == 1e8
    assert sec.eps_qkd == pytest.approx(3e-10)


def test_overrides_and_alias():
    cfg = parse_config("[modulation]\nM = 4\n[link]\ndelta_phi_deg = 10.0\nloss_db = 3.0\n")
    assert cfg.modulation.M == 4
    assert cfg.link.delta_phi == pytest.approx(math.radians(10))
    assert cfg.link.channel_loss_db == 3.0


@pytest.mark.parametrize("text,needle", [
    ("[link]\ndelta_phy_deg = 5\n", "line 2"),
    ("[linc]\nxi = 0.2\n", "unknown section"),
    ("[link]\ndelta_phi = 0.1\n", "unknown key"),
    ("[sweep]\nloss_db_start = 10\nloss_db_stop = 0\n", "empty"),
    ("[sweep]\nn_values = []\n", "empty"),
    ("[link]\neta_D = 2.0\n", "[link]"),
    ("[link\n", "TOML"),
])
def test_config_errors(text, needle):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert needle in str(exc.value)


def test_sweep_grid():
    spec = SweepSpec(0, 10, 2.5)
    assert spec.losses() == [0.0, 2.5, 5.0, 7.5, 10.0]
    with pytest.raises(ValueError):
        SweepSpec(n_values=(10**6, 10**5))


def test_rate_sweep_csv(tmp_path, capsys):
    cfg = write(tmp_path, SMALL_SWEEP)
    out1, out2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    assert main(["rate-sweep", "--config", cfg, "--out", out1]) == 0
    assert main(["rate-sweep", "--config", cfg, "--out", out2]) == 0
    text = open(out1).read()
    assert text == open(out2).read()
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    rows = read_csv(out1)
    assert len(rows) == 15
    assert [(float(r["n"]), float(r["loss_db"])) for r in rows] == [
        (n, x) for n in (1e5, 1e6, 1e7) for x in (0, 5, 10, 15, 20)
    ]
    assert all(float(r["R"]) == 0.0 and int(r["l"]) == 0 for r in rows if r["n"] == "100000")
    r0 = next(r for r in rows if r["n"] == "10000000" and float(r["loss_db"]) == 0)
    assert float(r0["R"]) > 0


def test_rate_sweep_parallel_identical(tmp_path, monkeypatch):
    cfg = write(tmp_path, SMALL_SWEEP)
    serial, par = str(tmp_path / "s.csv"), str(tmp_path / "p.csv")
    monkeypatch.setenv("QKD_THREADS", "1")
    main(["rate-sweep", "--config", cfg, "--out", serial])
    monkeypatch.setenv("QKD_THREADS", "4")
    main(["rate-sweep", "--config", cfg, "--out", par])
    assert open(serial).read() == open(par).read()


def test_rate_sweep_conservative_is_lower(tmp_path):
    cfg = write(tmp_path, SMALL_SWEEP)
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    main(["rate-sweep", "--config", cfg, "--out", a])
    main(["rate-sweep", "--config", cfg, "--out", b, "--accounting", "conservative"])
    for x, y in zip(read_csv(a), read_csv(b)):
        assert float(y["R"]) <= float(x["R"])


def test_large_n_row_near_finite_asymptote():
    cfg = parse_config("[sweep]\nloss_db_stop = 0\nn_values = [10000000]\n")
    (row,) = sweep_rows(cfg)
    loss, n, chi, _, _, k, code, l, _ = row
    assert l / n == pytest.approx(1 - chi - (k + code) / n, rel=0.1)


def test_rate_sweep_exit_codes(tmp_path, capsys):
    bad = write(tmp_path, "[sweep]\nloss_db_start = 5\nloss_db_stop = 0\n")
    assert main(["rate-sweep", "--config", bad]) == 2
    assert "config error" in capsys.readouterr().err
    typo = write(tmp_path, "[security]\nepsilon_s = 1e-10\n", "typo.toml")
    assert main(["rate-sweep", "--config", typo]) == 2
    assert main(["rate-sweep", "--config", str(tmp_path / "missing.toml")]) == 2
    assert main(["rate-sweep", "--accounting", "loose"]) == 2
    assert main(["nonsense"]) == 2


def test_simulate_deterministic_and_transcript(tmp_path):
    cfg = write(tmp_path, "[session]\nN = 200000\nseed = 5\n")
    outs = [str(tmp_path / f"r{i}.json") for i in range(2)]
    for o in outs:
        assert main(["simulate", "--config", cfg, "--out", o, "--transcript", o + "l"]) == 0
    assert open(outs[0], "rb").read() == open(outs[1], "rb").read()
    assert open(outs[0] + "l", "rb").read() == open(outs[1] + "l", "rb").read()
    rep = json.load(open(outs[0]))
    assert rep["seed"] == 5 and rep["N"] == 200000
    assert main(["simulate", "--config", cfg, "--out", outs[1], "--seed", "6"]) == 0
    assert json.load(open(outs[1]))["seed"] == 6
    assert main(["simulate", "--config", cfg, "--seed", "-1"]) == 2


def test_simulate_usd_eve_aborts(tmp_path):
    cfg = write(tmp_path, "[session]\nN = 1000000\neve = \"usd\"\n")
    out = str(tmp_path / "r.json")
    assert main(["simulate", "--config", cfg, "--out", out]) == 0
    assert json.load(open(out))["outcome"] == "abort: detection-rate monitor"


@pytest.mark.slow
def test_simulate_honest_key(tmp_path):
    cfg = write(tmp_path, "[modulation]\nM = 2\n[session]\nN = 50000000\nseed = 2\n")
    out = str(tmp_path / "r.json")
    assert main(["simulate", "--config", cfg, "--out", out]) == 0
    rep = json.load(open(out))
    assert rep["n"] >= 10**6
    assert rep["outcome"] == "key" and rep["l"] > 0 and rep["keys_match"]
    assert len(rep["key_sha256"]) == 64


def test_verify_passes(tmp_path, capsys):
    assert main(["verify"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 11 and all(x.startswith("PASS") for x in lines)


def test_verify_reports_failure(tmp_path):
    # a weak source breaks the sideband photon number check
    cfg = write(tmp_path, "[modulation]\nmu0 = 1.0\n")
    out = str(tmp_path / "v.txt")
    assert main(["verify", "--config", cfg, "--out", out]) == 1
    assert open(out).read().startswith("FAIL")
