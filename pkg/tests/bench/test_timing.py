import pytest

from vcstack.bench.timing import (
    BenchResult,
    BenchSettings,
    ProofTiming,
    bench_report,
    run_bench,
    write_metrics,
)


def result_with(timings):
    return BenchResult(
        settings=BenchSettings(n=16, k=4),
        t_group_seconds=0.001,
        update_seconds=0.5,
        published_nodes=3,
        update_info_bytes=180,
        timings=timings,
    )


def test_ratio_ignores_proofs_without_partial_digests():
    result = result_with(
        [
            ProofTiming(index=0, seconds=0.02, exps=10, digests=10),
            ProofTiming(index=1, seconds=0.5, exps=0, digests=0),
        ]
    )
    assert result.ratio == pytest.approx(2.0)
    assert result.passed
    assert result.modelled_seconds == pytest.approx(0.01)


def test_model_counts_partial_digests_not_exponentiations():
    # zero deltas and empty basis nodes are digests without an exponentiation
    result = result_with([ProofTiming(index=0, seconds=0.04, exps=5, digests=20)])
    assert result.modelled_seconds == pytest.approx(0.02)
    assert result.ratio == pytest.approx(2.0)
    assert result.passed

    report = bench_report(result)
    assert report.rows[0].display["model (s)"] == "0.0200"


def test_ratio_above_bound_fails():
    result = result_with([ProofTiming(index=0, seconds=0.05, exps=10, digests=10)])
    assert result.ratio == pytest.approx(5.0)
    assert not result.passed

    report = bench_report(result)
    assert report.passed is False
    assert report.rows[0].display["partial digests"] == "10"


def test_ratio_below_floor_is_reported_not_failed():
    result = result_with([ProofTiming(index=0, seconds=0.001, exps=10, digests=10)])
    assert result.ratio == pytest.approx(0.1)
    assert result.passed
    assert result.below_model

    report = bench_report(result)
    assert report.passed is True
    assert any("faster than modelled" in note for note in report.notes)


def test_no_partial_digest_passes():
    result = result_with([ProofTiming(index=0, seconds=0.05, exps=0, digests=0)])
    assert result.ratio is None
    assert result.passed
    assert not result.below_model


def test_metrics_file(tmp_path):
    result = result_with([ProofTiming(index=7, seconds=0.02, exps=10, digests=10)])
    path = tmp_path / "bench.prom"
    write_metrics(result, str(path))

    text = path.read_text()
    assert "vcstack_group_exponentiation_seconds" in text
    line = 'vcstack_proof_update_partial_digests{provider="vcstack",index="7"} 10.0'
    assert line in text
    assert "vcstack_model_ratio" in text


def test_setup_keeps_no_trapdoor_by_default(monkeypatch):
    seen = {}

    class Stop(Exception):
        pass

    def setup(n, seed, insecure_debug=False, **kwargs):
        seen["insecure_debug"] = insecure_debug
        raise Stop()

    monkeypatch.setattr("vcstack.bench.timing.AmtVC.setup", setup)
    assert BenchSettings().insecure_debug is False
    with pytest.raises(Stop):
        run_bench(BenchSettings(n=16, k=4, users=2, exp_samples=1))
    assert seen["insecure_debug"] is False


def test_small_bench_run():
    result = run_bench(
        BenchSettings(n=16, k=4, users=2, exp_samples=2, insecure_debug=True)
    )
    assert len(result.timings) == 2
    assert result.t_group_seconds > 0
    assert result.published_nodes > 0
    assert all(t.exps <= t.digests for t in result.timings)
