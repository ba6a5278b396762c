import csv
import json
import os
import pathlib
import subprocess

import pytest

BIN = os.environ.get("XVA_BIN", "build/xva")
CONFIGS = pathlib.Path(os.environ.get("XVA_CONFIGS", "configs"))

SMALL = ["--paths", "2000", "--steps", "10"]


def run(*args, cwd=None):
    return subprocess.run([BIN, *map(str, args)], capture_output=True, text=True, cwd=cwd)


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# seed=")
    return lines[0], list(csv.DictReader(lines[1:]))


def write_cfg(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def base_cfg():
    return json.loads((CONFIGS / "sell_call_replacement.json").read_text())


def test_price_writes_all_files(tmp_path):
    out = tmp_path / "out"
    r = run("price", CONFIGS / "forward_clean.json", "--out", out, *SMALL)
    assert r.returncode == 0, r.stderr
    assert "verdict" in r.stdout
    names = sorted(p.name for p in out.iterdir())
    assert names == ["clean.csv", "price.csv", "solution.csv", "verdict.csv", "xva.csv"]
    header, rows = read_csv(out / "price.csv")
    assert "seed=11" in header and "paths=2000" in header and "steps=10" in header
    assert len(rows) == 1
    row = rows[0]
    assert float(row["price"]) == pytest.approx(float(row["clean_price"]) + float(row["y0"]), abs=1e-9)
    _, comps = read_csv(out / "xva.csv")
    assert {c["component"] for c in comps} >= {"fca_delta", "fba_delta", "dva", "cva"}
    _, sol = read_csv(out / "solution.csv")
    assert len(sol) == 11


def test_price_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run("price", CONFIGS / "sell_call_replacement.json", "--out", d, *SMALL).returncode == 0
    for f in a.iterdir():
        assert f.read_bytes() == (b / f.name).read_bytes(), f.name


def test_seed_override_changes_output(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("paths", CONFIGS / "forward_clean.json", "--out", a, "--paths", "5", "--steps", "3").returncode == 0
    assert run("paths", CONFIGS / "forward_clean.json", "--out", b, "--paths", "5", "--steps", "3",
               "--seed", "12").returncode == 0
    assert (a / "paths.csv").read_bytes() != (b / "paths.csv").read_bytes()


def test_paths_layout(tmp_path):
    r = run("paths", CONFIGS / "treasury_bond.json", "--out", tmp_path, "--paths", "4", "--steps", "5")
    assert r.returncode == 0, r.stderr
    header, rows = read_csv(tmp_path / "paths.csv")
    assert len(rows) == 4 * 6
    assert all(float(x["B_inv"]) > 0 for x in rows)
    first = [x for x in rows if float(x["t"]) == 0.0]
    assert all(float(x["B_inv"]) == 1.0 for x in first)


def test_verify_treasury(tmp_path):
    r = run("verify", CONFIGS / "treasury_bond.json", "--out", tmp_path, "--paths", "500")
    assert r.returncode == 0, r.stderr
    assert "fca_zero" in r.stdout
    _, rows = read_csv(tmp_path / "verdict.csv")
    assert rows and all(x["outcome"] == "fca_zero" for x in rows)


def test_missing_config_exit_2(tmp_path):
    r = run("price", tmp_path / "nope.json", "--out", tmp_path / "o")
    assert r.returncode == 2
    assert "config error" in r.stderr
    assert not (tmp_path / "o").exists()


def test_bad_field_exit_2(tmp_path):
    cfg = base_cfg()
    cfg["contract"]["side"] = "long"
    r = run("price", write_cfg(tmp_path, cfg), "--out", tmp_path / "o")
    assert r.returncode == 2
    assert not (tmp_path / "o").exists()


def test_bad_override_exit_2(tmp_path):
    r = run("price", CONFIGS / "forward_clean.json", "--out", tmp_path / "o", "--steps", "0")
    assert r.returncode == 2
    assert not (tmp_path / "o").exists()


def test_unsupported_exit_2(tmp_path):
    cfg = base_cfg()
    cfg["market"]["repo"] = ["H"]
    r = run("price", write_cfg(tmp_path, cfg), "--out", tmp_path / "o", *SMALL)
    assert r.returncode == 2
    assert "unsupported" in r.stderr


def test_mixed_sign_replacement_exit_4(tmp_path):
    cfg = json.loads((CONFIGS / "forward_clean.json").read_text())
    cfg["contract"]["closeout"] = "replacement"
    p = write_cfg(tmp_path, cfg)
    r = run("verify", p, "--out", tmp_path / "o", *SMALL)
    assert r.returncode == 4, r.stderr
    assert "precondition" in r.stderr
    assert not (tmp_path / "o").exists()
    # price still solves the full equation and reports why no verdict was given
    r = run("price", p, "--out", tmp_path / "p", *SMALL)
    assert r.returncode == 0, r.stderr
    _, rows = read_csv(tmp_path / "p" / "price.csv")
    assert "options only" in rows[0]["note"]


def test_step_size_exit_3(tmp_path):
    cfg = base_cfg()
    cfg["market"]["intensity"]["hH"] = 40.0
    r = run("price", write_cfg(tmp_path, cfg), "--out", tmp_path / "o", "--paths", "200", "--steps", "5")
    assert r.returncode == 3, r.stderr
    assert "solver failure" in r.stderr


def test_missing_subcommand():
    r = run()
    assert r.returncode != 0
