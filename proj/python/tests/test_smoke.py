import json
import math
import os
import pathlib

import pytest

import xvaengine as xe

CONFIGS = pathlib.Path(os.environ.get("XVA_CONFIGS", pathlib.Path(__file__).resolve().parents[2] / "configs"))


def small(name, paths=2000, steps=10):
    return xe.load_config(str(CONFIGS / name)).with_numerics(paths=paths, steps=steps)


def test_price_forward(tmp_path):
    r = xe.price(small("forward_clean.json"), str(tmp_path))
    assert r["verdict"]["outcome"] == "fca_zero"
    assert r["price"][0] == pytest.approx(r["clean"][0] + r["y0"][0], abs=1e-12)
    assert r["fca_delta"] == (0.0, 0.0)
    assert (tmp_path / "price.csv").exists()


def test_sold_call_near_closed_form(tmp_path):
    cfg = small("sell_call_replacement.json", paths=20000, steps=25)
    cf = xe.closed_form_price(cfg)
    r = xe.price(cfg, str(tmp_path))
    assert cf is not None and r["closed_form"] == pytest.approx(cf)
    assert abs(r["price"][0] - cf) <= 0.01 * cf


def test_verify_treasury(tmp_path):
    v = xe.verify(small("treasury_bond.json", paths=500), str(tmp_path))
    assert v["outcome"] == "fca_zero" and v["mode"] == "analytic"
    assert all(e["holds"] or e["skipped"] for e in v["evidence"])


def test_closed_form_helpers():
    assert xe.norm_cdf(0.0) == 0.5
    bs = xe.bs_price(100, 100, 1, 0.2, 0.02)
    assert xe.call_price_replacement(100, 100, 1, 0.2, 0.02) == pytest.approx(bs)
    with pytest.raises(xe.RegimeError):
        xe.call_price_replacement(100, 100, 1, 0.2, 0.02, epsilon=1.0)
    assert math.isfinite(xe.call_price_replacement(100, 100, 1, 0.2, 0.02, 0.01, 0.005, 0.02, 0.6, 0.4))


def test_errors_map_to_python():
    with pytest.raises(xe.ConfigError):
        xe.parse_config("{not json")
    with pytest.raises(xe.XvaError):
        xe.load_config("/nonexistent.json")
    with pytest.raises(xe.ConfigError):
        small("forward_clean.json").with_numerics(steps=0)
    cfg = json.loads((CONFIGS / "forward_clean.json").read_text())
    cfg["contract"]["closeout"] = "replacement"
    with pytest.raises(xe.PreconditionError):
        xe.verify(xe.parse_config(json.dumps(cfg)), "/tmp/xva-never-written")
