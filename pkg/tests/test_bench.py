import math
import re

import numpy as np
import pytest

from planarfft import ConfigError
from planarfft import dist as dist_mod
from planarfft import engine as engine_mod
from planarfft.bench import (
    CSV_HEADER,
    BenchConfig,
    ScalingRecord,
    checksum,
    emit_csv,
    read_csv,
    run_strong_scaling,
    verify_mode,
)
from planarfft.cli import main
from planarfft.kernel import Direction, fft_tables
from planarfft.timing import FakeTimer

pytestmark = pytest.mark.filterwarnings("ignore:.*CPUs are available:RuntimeWarning")

ROW_RE = re.compile(r"^[a-z_]+,[1-9][0-9]*,[1-9][0-9]*(,[-+0-9.eE]+|,nan){5}$")


def small(**kw):
    base = dict(rows=16, cols=16, strategies=["seq"], workers=[1], reps=3)
    base.update(kw)
    return BenchConfig(**base)


@pytest.fixture
def flipped_twiddles(monkeypatch):
    """Build the engines with inverse-direction tables: a wrong-sign twiddle canary."""

    def inverse_tables(n, base_case=8, direction=Direction.FORWARD):
        return fft_tables(n, base_case, Direction.INVERSE)

    monkeypatch.setattr(engine_mod, "fft_tables", inverse_tables)
    monkeypatch.setattr(dist_mod, "fft_tables", inverse_tables)


# -- timing statistics -------------------------------------------------------

def test_median_min_max_from_injected_durations():
    recs = run_strong_scaling(small(), timer=FakeTimer.from_durations([9, 1, 5]))
    assert len(recs) == 1
    r = recs[0]
    assert (r.median_s, r.min_s, r.max_s) == (5, 1, 9)
    assert (r.strategy, r.ranks, r.threads) == ("seq", 1, 1)


def test_warm_up_is_not_timed():
    timer = FakeTimer.from_durations([2, 2])
    run_strong_scaling(small(reps=2), timer=timer)
    assert timer.reads == 4


def test_fractions_from_engine_timer():
    # r2c 1, transpose 1, c2c 1, transpose back 1 for every run
    # 4096 columns exceed the cache budget, so ESTIMATE picks the transpose pass
    engine_timer = FakeTimer(step=1.0)
    r = run_strong_scaling(small(rows=2, cols=4096, reps=2), engine_timer=engine_timer)[0]
    assert r.fft_frac == 0.5 and r.transpose_frac == 0.5


def test_real_fractions_in_unit_interval():
    for r in run_strong_scaling(small(strategies=["seq", "opt", "dist"], workers=[1, 2], ranks=[1, 2], reps=2)):
        assert 0 <= r.fft_frac <= 1 and 0 <= r.transpose_frac <= 1
        assert r.fft_frac + r.transpose_frac == pytest.approx(1.0)
        assert r.min_s <= r.median_s <= r.max_s


def test_repeated_point_same_checksum():
    a = run_strong_scaling(small(reps=1))[0]
    b = run_strong_scaling(small(reps=1))[0]
    assert a.checksum == b.checksum and len(a.checksum) == 16


def test_all_strategies_agree_on_checksum():
    cfg = small(strategies=["seq", "naive", "opt", "sync", "for_loop", "dist"], workers=[1, 3], ranks=[1, 2],
                threads=[1, 2], reps=1)
    recs = run_strong_scaling(cfg)
    assert [(r.strategy, r.ranks, r.threads) for r in recs] == cfg.points()
    assert len({r.checksum for r in recs}) == 1


def test_failed_point_recorded_as_nan(tmp_path):
    # 16x4 has 3 spectrum rows, which cannot be split over 4 ranks
    out = tmp_path / "b.csv"
    recs = run_strong_scaling(BenchConfig(rows=16, cols=4, strategies=["seq", "dist"], ranks=[1, 4], reps=1,
                                          out=str(out)))
    assert [r.failed for r in recs] == [False, False, True]
    assert all(math.isnan(getattr(recs[2], f)) for f in ("median_s", "min_s", "max_s", "fft_frac"))
    lines = out.read_text().splitlines()
    assert lines[3] == "dist,4,1,nan,nan,nan,nan,nan"


def test_oversubscription_warns():
    with pytest.warns(RuntimeWarning, match="CPUs"):
        run_strong_scaling(small(strategies=["for_loop"], workers=[1024], reps=1, rows=2, cols=2))


def test_measure_mode_writes_wisdom(tmp_path):
    wisdom = tmp_path / "w.txt"
    cfg = small(plan="measure", wisdom=str(wisdom), reps=1, measure_reps=1)
    run_strong_scaling(cfg)
    text = wisdom.read_text().splitlines()
    assert text[0] == "planarfft-wisdom v1" and text[1].startswith("v1|16|16|1|seq|")


# -- CSV ---------------------------------------------------------------------

def test_csv_header_only(tmp_path):
    path = tmp_path / "e.csv"
    emit_csv([], path)
    assert path.read_text() == ",".join(CSV_HEADER) + "\n"


def test_csv_one_record_two_lines(tmp_path):
    path = tmp_path / "one.csv"
    emit_csv([ScalingRecord("for_loop", 1, 8, 0.25, 0.125, 1 / 3, 0.6, 0.4)], path)
    lines = path.read_text().split("\n")
    assert lines[-1] == "" and len(lines) == 3
    assert lines[1] == "for_loop,1,8,0.25,0.125,0.333333333,0.6,0.4"
    assert ROW_RE.match(lines[1])


def test_csv_round_trip(tmp_path):
    recs = [ScalingRecord("seq", 1, 1, 1.5, 1.25, 2.0, 0.5, 0.5),
            ScalingRecord("dist", 4, 2, 3e-05, 1e-05, 7e-05, 0.75, 0.25)]
    path = tmp_path / "rt.csv"
    emit_csv(recs, path)
    assert read_csv(path) == recs


def test_csv_unwritable_path_names_path(tmp_path):
    bad = tmp_path / "missing" / "x.csv"
    with pytest.raises(OSError, match="missing"):
        emit_csv([], bad)


def test_checksum_stable():
    from planarfft.layout import ComplexGrid
    g = ComplexGrid.from_array(np.arange(4.0).reshape(2, 2))
    assert checksum(g) == checksum(g.copy())
    assert checksum(g) != checksum(ComplexGrid.zeros(2, 2))


# -- config ------------------------------------------------------------------

@pytest.mark.parametrize("kw,field", [(dict(rows=12), "rows"), (dict(cols=1), "cols"), (dict(strategies=["warp"]), "strategy"),
                                      (dict(strategies=[]), "strategy"), (dict(workers=[0]), "workers"),
                                      (dict(workers=[4, 2]), "workers"), (dict(ranks=[]), "ranks"),
                                      (dict(reps=0), "reps"), (dict(plan="guess"), "plan")])
def test_config_errors(kw, field):
    with pytest.raises(ConfigError) as info:
        small(**kw).validate()
    assert info.value.field == field


def test_points_order():
    cfg = small(strategies=["dist", "seq", "opt"], workers=[1, 4], ranks=[1, 2], threads=[1, 2])
    assert cfg.points() == [("dist", 1, 1), ("dist", 1, 2), ("dist", 2, 1), ("dist", 2, 2), ("seq", 1, 1),
                            ("opt", 1, 1), ("opt", 1, 4)]


# -- verify ------------------------------------------------------------------

def test_verify_healthy_build():
    report = verify_mode(small(strategies=["seq", "naive", "opt", "sync", "for_loop", "dist"], workers=[1, 4],
                               ranks=[1, 4], threads=[2]))
    assert report.passed
    assert report.max_abs_error <= 1e-9
    assert len(report.errors) == 6
    assert report.summary().splitlines()[-1].startswith("PASS")


def test_verify_catches_flipped_twiddles(flipped_twiddles):
    report = verify_mode(small(strategies=["seq", "for_loop", "dist"], workers=[2], ranks=[2]))
    assert not report.passed
    assert all(e > 1e-3 for e in report.errors.values())


def test_verify_uses_injected_engine():
    calls = []

    def engine(grid, strategy, ranks, threads):
        calls.append((strategy, ranks, threads))
        from planarfft.layout import ComplexGrid
        return ComplexGrid.zeros(grid.rows, grid.cols // 2 + 1)

    report = verify_mode(small(strategies=["opt", "dist"], workers=[1, 8], ranks=[2, 64], threads=[3]), engine)
    assert calls == [("opt", 1, 8), ("dist", 16, 3)]
    assert not report.passed


# -- CLI ---------------------------------------------------------------------

def test_cli_verify_ok(capsys):
    assert main(["verify", "--rows", "16", "--cols", "16", "--strategy", "seq,opt", "--workers", "2"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_cli_bench_refuses_broken_build(tmp_path, flipped_twiddles, capsys):
    out = tmp_path / "b.csv"
    code = main(["bench", "--rows", "8", "--cols", "8", "--strategy", "seq", "--reps", "1", "--out", str(out)])
    assert code == 1
    assert not out.exists()
    assert "refusing" in capsys.readouterr().err


def test_cli_bench_force_overrides(tmp_path, flipped_twiddles):
    out = tmp_path / "b.csv"
    code = main(["bench", "--rows", "8", "--cols", "8", "--strategy", "seq", "--reps", "1", "--out", str(out),
                 "--force"])
    assert code == 0
    assert out.read_text().splitlines()[0] == ",".join(CSV_HEADER)


def test_cli_bench_writes_csv(tmp_path):
    out = tmp_path / "b.csv"
    code = main(["bench", "--rows", "16", "--cols", "16", "--strategy", "for_loop,dist", "--workers", "1,2",
                 "--ranks", "1,2", "--reps", "2", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 5
    assert all(ROW_RE.match(line) for line in lines[1:])


@pytest.mark.parametrize("argv", [["plan", "--rows", "3"], ["bench", "--strategy", "warp"],
                                  ["verify", "--workers", "4,2"], ["bench", "--reps", "0"]])
def test_cli_config_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "configuration error" in capsys.readouterr().err


def test_cli_unparseable_list_exits_2():
    with pytest.raises(SystemExit) as info:
        main(["bench", "--workers", "1,x"])
    assert info.value.code == 2


def test_cli_plan(capsys):
    assert main(["plan", "--rows", "4", "--cols", "4", "--workers", "1"]) == 0
    assert "strided" in capsys.readouterr().out


def test_cli_plan_measure_wisdom(tmp_path, capsys):
    w = tmp_path / "w.txt"
    args = ["plan", "--rows", "16", "--cols", "16", "--workers", "2", "--plan", "measure", "--measure-reps", "1",
            "--wisdom", str(w)]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert w.exists()
    assert main(args) == 0
    assert capsys.readouterr().out.splitlines()[0] == first.splitlines()[0]

