import math

import numpy as np
import pytest

import loopsoup as ls
from loopsoup import harness
from loopsoup.harness import (CSV_FIELDS, ExperimentConfig, InsufficientReplicasError,
                              convergence_report, kappa_lambda, lambda_kappa,
                              read_stats_csv, run_ensemble, write_stats_csv)


def small_cfg(**kw):
    base = dict(domain=ls.unit_square(), lams=(0.5,), Ns=(10, 14), t0=0.03,
                replicas=4, seed=12)
    base.update(kw)
    return ExperimentConfig(**base)


def test_records_complete_and_zero_lambda():
    recs = run_ensemble(small_cfg(lams=(0.0,), replicas=2))
    assert len(recs) == 4
    for r in recs:
        assert r.loops == 0 and r.clusters == 0 and r.outermost == 0
        assert r.carpetfrac == 1.0 and r.hullfrac == 0.0
        assert math.isinf(r.mingap)
        assert r.maxdiam == 0.0


def test_row_count_and_fields(tmp_path):
    cfg = small_cfg(lams=(0.25, 0.5))
    recs = run_ensemble(cfg, out_dir=tmp_path)
    assert len(recs) == len(cfg.lams) * len(cfg.Ns) * cfg.replicas
    lines = (tmp_path / "stats.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_FIELDS)
    assert len(lines) == 1 + len(recs)
    back = read_stats_csv(tmp_path / "stats.csv")
    assert [r.row() for r in back] == [r.row() for r in recs]
    manifest = (tmp_path / "manifest.json").read_text()
    assert '"failures": {}' in manifest


def test_persisted_bytes_deterministic(tmp_path):
    cfg = small_cfg()
    run_ensemble(cfg, out_dir=tmp_path / "a")
    run_ensemble(cfg, out_dir=tmp_path / "b")
    assert (tmp_path / "a/stats.csv").read_bytes() == (tmp_path / "b/stats.csv").read_bytes()
    assert (tmp_path / "a/manifest.json").read_bytes() == (tmp_path / "b/manifest.json").read_bytes()


def test_thread_count_does_not_change_output(tmp_path):
    run_ensemble(small_cfg(threads=1), out_dir=tmp_path / "t1")
    run_ensemble(small_cfg(threads=2), out_dir=tmp_path / "t2")
    assert (tmp_path / "t1/stats.csv").read_bytes() == (tmp_path / "t2/stats.csv").read_bytes()


def test_failed_replica_is_logged_not_fatal(tmp_path, monkeypatch, capsys):
    real = harness.replica_stats

    def flaky(**kwargs):
        if kwargs["replica"] == 1:
            raise RuntimeError("synthetic failure")
        return real(**kwargs)

    monkeypatch.setattr(harness, "replica_stats", flaky)
    recs = run_ensemble(small_cfg(replicas=3), out_dir=tmp_path)
    assert len(recs) == 2 * 2   # one replica lost per (lam, N) pair... per N
    assert "synthetic failure" in capsys.readouterr().err
    manifest = (tmp_path / "manifest.json").read_text()
    assert "synthetic failure" in manifest


def test_convergence_report_identical_and_disjoint():
    import copy
    recs = run_ensemble(small_cfg(replicas=30))
    assert all(0.0 <= row["ks"] <= 1.0 for row in convergence_report(recs))

    # identical per-N record sets -> KS 0; disjoint supports -> KS 1
    a = [copy.copy(r) for r in recs if r.N == 10]
    b = [copy.copy(r) for r in a]
    for r in b:
        r.N = 14
    assert all(row["ks"] == 0.0 for row in convergence_report(a + b))
    c = [copy.copy(r) for r in b]
    for r in c:
        r.maxdiam += 100.0
        r.outermost += 1000
        r.carpetfrac += 10.0
    assert all(row["ks"] == 1.0 for row in convergence_report(a + c))


def test_convergence_requires_replicas_and_scales():
    with pytest.raises(InsufficientReplicasError):
        convergence_report(run_ensemble(small_cfg(replicas=5)))
    recs = run_ensemble(small_cfg(Ns=(10,), replicas=30))
    with pytest.raises(InsufficientReplicasError):
        convergence_report(recs)


def test_validate_rejects_bad_configs():
    with pytest.raises(ValueError):
        run_ensemble(small_cfg(replicas=0))
    with pytest.raises(ValueError):
        run_ensemble(small_cfg(Ns=(14, 10)))


def test_kappa_lambda_reference_values_exact():
    assert kappa_lambda(4.0) == 0.5
    assert kappa_lambda(3.0) == 0.25
    assert lambda_kappa(0.5) == 4.0
    assert lambda_kappa(0.25) == pytest.approx(3.0, abs=1e-14)


def test_kappa_lambda_round_trip_and_ranges():
    grid = np.linspace(8.0 / 3.0 + 1e-9, 4.0, 100)
    for k in grid:
        assert abs(k - lambda_kappa(kappa_lambda(k))) < 1e-12
    for bad in (8.0 / 3.0, 4.0001, 0.0):
        with pytest.raises(ValueError):
            kappa_lambda(bad)
    for bad in (0.0, 0.51, -1.0):
        with pytest.raises(ValueError):
            lambda_kappa(bad)


def test_carpet_fraction_decreases_with_intensity_quick():
    cfg = ExperimentConfig(ls.unit_square(), lams=(0.25, 1.0), Ns=(16,),
                           t0=0.01, replicas=10, seed=3)
    recs = run_ensemble(cfg)
    lo = np.mean([r.carpetfrac for r in recs if r.lam == 0.25])
    hi = np.mean([r.carpetfrac for r in recs if r.lam == 1.0])
    assert lo > hi
