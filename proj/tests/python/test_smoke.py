import json
import os
from pathlib import Path

import pytest

import spotindex

DATA = Path(os.environ.get("SPOTINDEX_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


@pytest.fixture(scope="module")
def catalog():
    return spotindex.Catalog.load(DATA / "catalog.csv")


@pytest.fixture(scope="module")
def traces():
    return spotindex.synthesize(DATA / "markets.json", seed=3)


def test_version_matches_cli():
    code, out, _ = spotindex.run_cli(["--version"])
    assert code == 0
    assert spotindex.__version__ in out


def test_catalog(catalog):
    assert len(catalog) == 4
    assert catalog["m4.large"].cpu_capacity == 2
    assert catalog.candidates(4, 16) == ["c4.2xlarge", "m4.2xlarge", "r4.xlarge"]


def test_synth_and_index(catalog, traces):
    assert sorted(traces) == sorted(catalog.ids)
    assert traces["m4.large"].price_at(3600) > 0
    series = spotindex.index_series(traces, catalog, catalog.ids, 3600, 7200, 300)
    assert len(series.samples) == 13
    assert not series.gaps
    for s in series.samples:
        assert s.min <= s.value <= s.max
        assert s.n_effective == 4
    assert spotindex.on_demand_index(catalog, catalog.ids) > 0


def test_simulate_matches_cli(catalog, traces, tmp_path):
    job = json.loads((DATA / "jobs" / "baseline.json").read_text())
    report = spotindex.simulate(job, traces, catalog, {"policy": "cost"})
    assert report["job_name"] == "baseline"
    assert 0 < report["availability"] <= 1
    assert report["total_cost"] > 0

    code, _, err = spotindex.run_cli(["synth", "--spec", str(DATA / "markets.json"), "--seed", "3",
                                      "--out", str(tmp_path / "m")])
    assert code == 0, err
    code, out, err = spotindex.run_cli(["simulate", "--job", str(DATA / "jobs" / "baseline.json"),
                                        "--catalog", str(DATA / "catalog.csv"), "--traces", str(tmp_path / "m"),
                                        "--policy", "cost"])
    assert code == 0, err
    assert json.loads(out)["total_cost"] == pytest.approx(report["total_cost"], rel=1e-12)


def test_errors_are_typed(catalog, traces):
    with pytest.raises(spotindex.Error):
        catalog["no-such-vm"]
    with pytest.raises(spotindex.Error, match="unknown policy"):
        spotindex.simulate(json.loads((DATA / "jobs" / "baseline.json").read_text()), traces, catalog,
                           {"policy": "nope"})
