from pathlib import Path

import pytest

from linext.experiment import (
    ROW_COLUMNS,
    SUMMARY_COLUMNS,
    ExperimentConfig,
    SummaryRow,
    ordering_fraction,
    poset_seed,
    read_summary,
    recursion_gain_fraction,
    rows_csv,
    run_experiment,
    summarize_rows,
    write_experiment,
)

DATA = Path(__file__).parent / "data"


def golden_config(out):
    return ExperimentConfig(
        n_values=(10,), posets_per_n=4, samples_per_poset=16,
        specs=("uniform",), recursive=(False,), master_seed=2024, output=str(out),
    )


def test_golden_rows(tmp_path):
    out = tmp_path / "golden_experiment.csv"
    rows, summary = write_experiment(golden_config(out))
    assert len(rows) == 4
    assert out.read_text() == (DATA / "golden_experiment.csv").read_text()
    assert (tmp_path / "golden_experiment_summary.csv").read_text() == (
        DATA / "golden_experiment_summary.csv"
    ).read_text()


def test_schema():
    text = (DATA / "golden_experiment.csv").read_text().splitlines()
    assert text[0].split(",") == ROW_COLUMNS
    assert ROW_COLUMNS == [
        "n", "spec", "recursive", "poset_index", "seed", "samples",
        "mean_log_estimate", "relative_variance",
    ]
    assert SUMMARY_COLUMNS[-1] == "mean_relative_variance"


def test_row_order_and_coordinates():
    cfg = ExperimentConfig(
        n_values=(6, 8), posets_per_n=2, samples_per_poset=4,
        specs=("asq", "uniform"), master_seed=1, output="unused.csv",
    )
    rows = run_experiment(cfg)
    keys = [(r.n, r.spec, r.recursive, r.poset_index) for r in rows]
    assert len(keys) == 2 * 2 * 2 * 2
    assert keys[:4] == [(6, "asq", False, 0), (6, "asq", False, 1), (6, "asq", True, 0), (6, "asq", True, 1)]
    assert all(r.seed == poset_seed(1, r.n, r.poset_index) for r in rows)


def test_workers_do_not_change_rows():
    cfg = ExperimentConfig(
        n_values=(8, 12), posets_per_n=3, samples_per_poset=8, master_seed=5, output="unused.csv",
    )
    assert rows_csv(run_experiment(cfg)) == rows_csv(run_experiment(cfg, workers=2))


def test_poset_seeds_distinct():
    seeds = {poset_seed(0, n, i) for n in (10, 15) for i in range(50)}
    assert len(seeds) == 100


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(edge_prob=1.5)
    with pytest.raises(ValueError):
        ExperimentConfig(posets_per_n=0)
    with pytest.raises(ValueError):
        ExperimentConfig(specs=("bogus",))
    paper = ExperimentConfig.paper()
    assert paper.n_values[0] == 10 and paper.n_values[-1] == 150
    assert paper.posets_for(150) == 150 * 150 == paper.samples_for(150)


def test_failed_run_leaves_no_files(tmp_path, monkeypatch):
    import linext.experiment as exp

    out = tmp_path / "rows.csv"

    def boom(columns, rows):
        if columns is exp.SUMMARY_COLUMNS:
            raise RuntimeError("disk full")
        return orig(columns, rows)

    orig = exp._render
    monkeypatch.setattr(exp, "_render", boom)
    with pytest.raises(RuntimeError):
        write_experiment(golden_config(out))
    assert list(tmp_path.iterdir()) == []


def test_summary_round_trip(tmp_path):
    out = tmp_path / "x.csv"
    _, summary = write_experiment(golden_config(out))
    assert read_summary(tmp_path / "x_summary.csv") == summary


def test_fractions():
    summary = [
        SummaryRow(10, "uniform", False, 1, 3.0),
        SummaryRow(10, "descendants", False, 1, 2.0),
        SummaryRow(10, "asq", False, 1, 1.0),
        SummaryRow(20, "uniform", False, 1, 3.0),
        SummaryRow(20, "descendants", False, 1, 0.5),
        SummaryRow(20, "asq", False, 1, 1.0),
    ]
    assert ordering_fraction(summary) == 0.5
    summary += [
        SummaryRow(n, s, True, 1, 0.9) for n in (10, 20) for s in ("uniform", "descendants", "asq")
    ]
    # recursion only loses for descendants at n=20
    assert recursion_gain_fraction(summary) == pytest.approx(5 / 6)


def test_summarize_rows_means():
    cfg = ExperimentConfig(n_values=(7,), posets_per_n=3, samples_per_poset=8,
                           specs=("descendants",), recursive=(False,), output="unused.csv")
    rows = run_experiment(cfg)
    (s,) = summarize_rows(rows)
    assert s.posets == 3
    assert s.mean_relative_variance == pytest.approx(sum(r.relative_variance for r in rows) / 3)


def test_plots_render(tmp_path):
    from linext.plotting import render_report

    cfg = ExperimentConfig(n_values=(6, 9), posets_per_n=2, samples_per_poset=8, output=str(tmp_path / "e.csv"))
    _, summary = write_experiment(cfg)
    paths = render_report(summary, tmp_path, stem="e")
    assert [p.name for p in paths] == ["e_rv_by_spec.png", "e_rv_recursion.png"]
    assert all(p.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n" for p in paths)
