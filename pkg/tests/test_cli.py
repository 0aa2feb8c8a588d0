import json

from lsvlab import cli


def run(argv):
    return cli.main(argv)


def test_bump_subcommand(tmp_path):
    out = tmp_path / "bump.csv"
    assert run(["bump", "--grid-max", "12", "--step", "0.5", "--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "x,psi,bound"
    assert len(lines) == 1 + 49  # grid from -12 to 12 in steps of 0.5
    x, psi, bound = map(float, lines[1].split(","))
    assert x == -12.0 and psi >= -1e-9 and bound > 0.0


def test_lcd_builtin_vector(capsys):
    assert run(["lcd", "--vector", "ones:16", "--cap", "10"]) == 0
    out = capsys.readouterr().out.strip()
    kind, theta = out.split(",")
    assert kind == "found"
    assert abs(float(theta) - 8.0 / 3.0) < 1e-6


def test_lcd_vector_file(tmp_path, capsys):
    path = tmp_path / "v.txt"
    path.write_text("1.0\n1.618033988749895\n")
    assert run(["lcd", "--vector", str(path), "--cap", "2", "--gamma", "0.1"]) == 0
    assert capsys.readouterr().out.startswith("exceeds_cap")


def test_secular_check_csv(tmp_path):
    out = tmp_path / "sec.csv"
    code = run([
        "secular-check", "--n", "12", "--trials", "20", "--dist", "rademacher",
        "--seed", "4", "--out", str(out),
    ])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "trial,n,max_rel_error"
    assert len(lines) == 21
    errs = [float(line.split(",")[2]) for line in lines[1:]]
    assert all(e < 1e-9 for e in errs if e == e)  # skip nan (degenerate) rows


def test_chi_check_csv(tmp_path):
    out = tmp_path / "chi.csv"
    code = run([
        "chi-check", "--n", "20", "--trials", "10", "--dist", "gaussian",
        "--seed", "9", "--ell", "auto", "--lcd-cap", "20", "--out", str(out),
    ])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "trial,chi,chi_tilde,gap,r_indicator"
    for line in lines[1:]:
        _, chi, chi_t, _, _ = line.split(",")
        assert float(chi) <= float(chi_t)


def test_events_subcommand(tmp_path):
    out = tmp_path / "ev.csv"
    code = run([
        "events", "--n", "16", "--trials", "5", "--dist", "uniform",
        "--seed", "2", "--lcd-cap", "20", "--out", str(out),
    ])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0].startswith("trial,r1,r2,r3,r4")
    assert len(lines) == 6


def test_smallball_subcommand(tmp_path):
    out = tmp_path / "sb.csv"
    code = run([
        "smallball", "--n", "24", "--trials", "4000", "--dist", "gaussian",
        "--seed", "3", "--eps", "0.1", "0.3", "--out", str(out),
    ])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "eps,estimate,ci_low,ci_high,ratio,pass"
    assert len(lines) == 3


def test_sigtails_subcommand(tmp_path):
    out = tmp_path / "st.csv"
    code = run([
        "sigtails", "--n", "32", "--trials", "1500", "--dist", "gaussian",
        "--seed", "6", "--out", str(out),
    ])
    assert code == 0
    body = out.read_text()
    assert body.startswith("tail,k,t,estimate")
    assert "# lower_monotone_k=" in body


def test_tail_with_config_file(tmp_path):
    cfg = {
        "dist": {"kind": "gaussian"},
        "n": 16,
        "trials": 1200,
        "eps_grid": [0.1, 0.4],
        "seed": 5,
        "output": str(tmp_path / "run"),
        "profile_trials": 2,
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert run(["tail", "--config", str(path)]) == 0
    assert (tmp_path / "run" / "tail.csv").exists()


def test_tail_with_flags(tmp_path):
    out = tmp_path / "tail.csv"
    code = run([
        "tail", "--n", "16", "--trials", "1000", "--dist", "gaussian",
        "--seed", "8", "--eps", "0.1", "0.5", "--out", str(out),
    ])
    assert code == 0
    assert out.read_text().startswith("eps,count,trials")


def test_invalid_dist_exit_2(capsys):
    assert run(["tail", "--n", "16", "--trials", "1000", "--dist", "cauchy", "--seed", "1"]) == 2


def test_invalid_config_exit_2(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"dist": {"kind": "gaussian"}}))
    assert run(["tail", "--config", str(path)]) == 2


def test_compare_subcommand(tmp_path):
    out = tmp_path / "cmp.csv"
    code = run([
        "compare", "--n", "16", "--trials", "1000", "--dist", "rademacher",
        "--seed", "7", "--eps", "0.2", "0.5", "--out", str(out),
    ])
    assert code == 0
    body = out.read_text()
    assert body.startswith("eps,estimate_subject,estimate_gaussian,ratio,ci_overlap")
    assert "# singular_atoms" in body


def test_lindeberg_subcommand(tmp_path):
    out = tmp_path / "lg.csv"
    code = run([
        "lindeberg", "--n", "32", "--trials", "4000", "--dist", "rademacher",
        "--seed", "10", "--out", str(out),
    ])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "gap,bound,ci_low,ci_high,pass"
    assert lines[1].split(",")[-1] == "1"
