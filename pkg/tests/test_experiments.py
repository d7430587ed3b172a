import csv
import io
import json
from fractions import Fraction

import numpy as np
import pytest

from ffavg.errors import ConfigError, DegenerateFit, IoError
from ffavg.experiments import (CSV_HEADER, SweepConfig, SweepReport, default_primes,
                               emit_report, fit_slope, run_sweep, run_verify_fourier,
                               worker_count)
from ffavg.grid import MAX_GRID_POINTS
from ffavg.operators import ExponentPair, RatioMeasurement

F = Fraction


def test_fit_slope_synthetic():
    qs = [5, 7, 11, 13, 17]
    fit = fit_slope([(q, 3.0 * q ** 0.75) for q in qs])
    assert fit.slope == pytest.approx(0.75, abs=1e-9)
    assert fit.intercept == pytest.approx(np.log(3.0))
    assert fit.residual < 1e-12
    assert fit_slope([(q, 2.0) for q in qs]).slope == pytest.approx(0, abs=1e-12)


def test_fit_slope_degenerate():
    with pytest.raises(DegenerateFit):
        fit_slope([(5, 1.0), (7, 2.0)])
    with pytest.raises(DegenerateFit):
        fit_slope([(5, 1.0), (7, 0.0), (11, 1.0)])


def test_default_primes_fit_cap():
    for d in (1, 2, 3, 4, 5):
        ps = default_primes(d)
        assert len(ps) >= 3
        assert all(q ** d <= MAX_GRID_POINTS for q in ps)


@pytest.mark.parametrize("kwargs", [
    dict(primes=(5, 9, 11)),
    dict(primes=(5, 5, 7)),
    dict(primes=()),
    dict(primes=(2, 5, 7)),
    dict(primes=(131,), d=3),
    dict(primes=(5, 7), j_policy=5),
    dict(primes=(5, 7), j_policy="some"),
    dict(primes=(5, 7), pairs=()),
    dict(primes=(5, 7), fmt="xml"),
    dict(primes=(5, 7), mode="maximal", extremizers=("adjoint_delta_zero",)),
])
def test_config_errors(kwargs):
    base = dict(primes=(5, 7), d=2, pairs=(ExponentPair(1, 1),))
    base.update(kwargs)
    with pytest.raises(ConfigError):
        run_sweep(SweepConfig(**base))


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("FFAVG_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("FFAVG_THREADS", "zero")
    with pytest.raises(ConfigError):
        worker_count()


def test_verify_fourier_small():
    rep = run_verify_fourier(SweepConfig(primes=(3, 5, 7), d=2))
    assert rep.check_failures == []
    assert rep.exit_code == 0
    assert len(rep.fourier) == 2 + 4 + 6
    for rec in rep.fourier:
        assert rec["closed_form_residual"] <= 1e-6
        assert rec["decomposition_residual"] <= 1e-6 * rec["q"]
    assert {s["quantity"] for s in rep.fitted_slopes} == {"omega_sup_over_q", "decay_constant"}


def test_verify_fourier_dimension_one():
    rep = run_verify_fourier(SweepConfig(primes=(3, 5, 7), d=1))
    assert rep.check_failures == []
    for rec in rep.fourier:
        assert rec["decay_max"] == pytest.approx(1)
        assert rec["decay_bound"] == 1


def test_verify_fourier_single_prime_has_no_slopes():
    rep = run_verify_fourier(SweepConfig(primes=(3,), d=2))
    assert rep.fitted_slopes == []


def _verdict(rep, tag, pr=None):
    for v in rep.verdicts:
        if v["extremizer"] == tag and (pr is None or (v["inv_p"], v["inv_r"]) == pr):
            return v
    raise KeyError(tag)


def test_sweep_vertex_bounded():
    pr = ExponentPair(F(2, 3), F(1, 3))
    rep = run_sweep(SweepConfig(primes=default_primes(2), d=2, pairs=(pr,), j_policy=1,
                                extremizers=("delta_zero",)))
    v = _verdict(rep, "delta_zero")
    assert v["verdict"] == "bounded" and v["matches"] is True
    assert -0.1 <= v["slope"] <= 0.1


def test_sweep_outside_slope():
    pr = ExponentPair(1, F(1, 4))
    rep = run_sweep(SweepConfig(primes=default_primes(2), d=2, pairs=(pr,), j_policy=1,
                                extremizers=("delta_zero",)))
    v = _verdict(rep, "delta_zero")
    assert v["predicted"] == "3/4"
    assert v["slope"] == pytest.approx(0.75, abs=0.15)
    assert v["verdict"] == "unbounded" and v["matches"] is True


def test_sweep_maximal_below_threshold():
    pr = ExponentPair(F(3, 4), F(3, 4))
    rep = run_sweep(SweepConfig(primes=default_primes(2), d=2, pairs=(pr,), mode="maximal",
                                extremizers=("delta_zero",)))
    v = _verdict(rep, "delta_zero")
    assert v["slope"] == pytest.approx(0.5, abs=0.15)
    assert v["matches"] is True


def test_sweep_rows_and_probe_selection():
    pr = ExponentPair(F(1, 2), 0)  # violates only the adjoint condition
    cfg = SweepConfig(primes=(5, 7, 11), d=2, pairs=(pr,),
                      extremizers=("delta_zero", "adjoint_delta_zero"))
    rep = run_sweep(cfg)
    assert {r.q for r in rep.rows} <= set(cfg.primes)
    assert len(rep.rows) == (4 + 6 + 10) * 2
    assert _verdict(rep, "delta_zero")["matches"] is None
    assert _verdict(rep, "adjoint_delta_zero")["matches"] is not None


def test_sweep_few_primes_has_no_slopes():
    rep = run_sweep(SweepConfig(primes=(5, 7), d=2, pairs=(ExponentPair(1, 1),)))
    assert rep.fitted_slopes == [] and rep.verdicts == []
    assert rep.rows


def _one_row_report():
    row = RatioMeasurement(3, 2, 1, ExponentPair(F(2, 3), F(1, 3)), "delta_zero", 1.0 / 3.0)
    return SweepReport({"d": 2}, rows=[row])


def test_csv_empty_and_single_row():
    assert emit_report(SweepReport({}), "csv") == ",".join(CSV_HEADER) + "\n"
    text = emit_report(_one_row_report(), "csv")
    lines = list(csv.reader(io.StringIO(text)))
    assert lines[0] == CSV_HEADER
    assert lines[1] == ["3", "2", "averaging", "1", "3", "2", "3", "1", "delta_zero",
                        "0.333333333333"]


def test_csv_infinite_exponent():
    row = RatioMeasurement(5, 2, "maximal", ExponentPair(0, 0), "constant", 1.0)
    lines = emit_report(SweepReport({}, rows=[row]), "csv").splitlines()
    assert lines[1] == "5,2,maximal,maximal,1,0,1,0,constant,1"


def test_json_round_trip(tmp_path):
    cfg = SweepConfig(primes=(5, 7, 11), d=2, pairs=(ExponentPair(F(2, 3), F(1, 3)),))
    rep = run_sweep(cfg)
    path = tmp_path / "r.json"
    emit_report(rep, "json", path)
    parsed = json.loads(path.read_text())
    assert set(parsed) == {"config", "rows", "fitted_slopes", "verdicts", "check_failures",
                           "fourier"}
    for row, back in zip(rep.rows, parsed["rows"]):
        assert back["ratio"] == float(format(row.ratio, ".12g"))


def test_json_deterministic():
    cfg = lambda: SweepConfig(primes=(5, 7, 11), d=2, pairs=(ExponentPair(1, F(1, 2)),), seed=4)
    assert emit_report(run_sweep(cfg()), "json") == emit_report(run_sweep(cfg()), "json")


def test_emit_io_error(tmp_path):
    with pytest.raises(IoError):
        emit_report(SweepReport({}), "csv", tmp_path / "missing" / "x.csv")
