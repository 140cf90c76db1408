# tests/test_cli.py
import pandas as pd
import pytest
from click.testing import CliRunner

from campaign import AGGREGATE_COLUMNS, RUN_COLUMNS, records_frame, write_runs_csv
from cli import CampaignSpec, cli
from xplain import ATTRIBUTION_COLUMNS


@pytest.fixture
def runner():
    return CliRunner()


def run_reduced(runner, out, *extra):
    args = ["run", "--topology", "star", "--fids", "1", "--budget", "5", "--grid", "reduced",
            "--workers", "1", "--out", str(out), *extra]
    return runner.invoke(cli, args)


def test_campaign_spec_validation(tmp_path):
    spec = CampaignSpec(topology="vn", fids="1, 3", output_dir=tmp_path / "x")
    assert spec.fids == [1, 3] and spec.topology.value == "VonNeumann"
    assert (tmp_path / "x").is_dir()
    with pytest.raises(ValueError):
        CampaignSpec(topology="star", fids="1,7", output_dir=tmp_path)


def test_run_reduced_grid(runner, tmp_path):
    result = run_reduced(runner, tmp_path)
    assert result.exit_code == 0, result.output
    runs = pd.read_csv(tmp_path / "runs.csv")
    assert list(runs.columns) == RUN_COLUMNS
    assert len(runs) == 25
    assert "25 records" in result.output


def test_rerun_is_identical(runner, tmp_path):
    run_reduced(runner, tmp_path / "a")
    run_reduced(runner, tmp_path / "b")
    assert (tmp_path / "a" / "runs.csv").read_bytes() == (tmp_path / "b" / "runs.csv").read_bytes()


def test_run_usage_errors(runner, tmp_path):
    assert runner.invoke(cli, ["run", "--topology", "torus", "--out", str(tmp_path)]).exit_code == 2
    assert runner.invoke(cli, ["run", "--topology", "star", "--fids", "7", "--out", str(tmp_path)]).exit_code == 2
    assert runner.invoke(cli, ["run", "--out", str(tmp_path)]).exit_code == 2
    assert runner.invoke(cli, ["run", "--topology", "star"]).exit_code == 2
    assert run_reduced(runner, tmp_path, "--sample", "5").exit_code == 2


def test_run_out_pointing_at_a_file_is_a_usage_error(runner, tmp_path):
    target = tmp_path / "occupied"
    target.write_text("not a directory")
    result = run_reduced(runner, target)
    assert result.exit_code == 2
    assert "cannot be created" in result.output


def test_config_file_with_flag_override(runner, tmp_path):
    config = tmp_path / "campaign.env"
    config.write_text(
        f"topology=ring\nfids=1\nbudget=5\ninstances=1\nruns=2\ngrid=reduced\nworkers=1\nout={tmp_path / 'out'}\n"
    )
    result = runner.invoke(cli, ["run", "--config", str(config), "--topology", "star"])
    assert result.exit_code == 0, result.output
    runs = pd.read_csv(tmp_path / "out" / "runs.csv")
    assert set(runs["topology"]) == {"Star"}
    assert len(runs) == 2


def test_config_file_unknown_key(runner, tmp_path):
    config = tmp_path / "campaign.env"
    config.write_text("topology=star\nswarm_size=40\n")
    assert runner.invoke(cli, ["run", "--config", str(config)]).exit_code == 2


def test_run_also_fills_database(runner, tmp_path):
    url = f"sqlite:///{tmp_path / 'runs.db'}"
    assert run_reduced(runner, tmp_path, "--db", url).exit_code == 0
    from db_models import load_runs

    assert len(load_runs(url, topology="Star", fid=1)) == 25


def test_stats(runner, tmp_path, micro_records):
    runs = write_runs_csv(micro_records, tmp_path / "runs.csv")
    out = tmp_path / "aggregate.csv"
    result = runner.invoke(cli, ["stats", "--runs", str(runs), "--out", str(out)])
    assert result.exit_code == 0, result.output
    table = pd.read_csv(out)
    assert list(table.columns) == AGGREGATE_COLUMNS
    assert table["fid"].tolist() == [1, 3]


def test_stats_rejects_bad_inputs(runner, tmp_path, micro_records):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    header = tmp_path / "header.csv"
    header.write_text(",".join(RUN_COLUMNS) + "\n")
    gap = tmp_path / "gap.csv"
    records_frame(micro_records).iloc[1:].to_csv(gap, index=False)
    out = str(tmp_path / "aggregate.csv")
    for path in (empty, header):
        assert runner.invoke(cli, ["stats", "--runs", str(path), "--out", out]).exit_code == 1
    result = runner.invoke(cli, ["stats", "--runs", str(gap), "--out", out])
    assert result.exit_code == 1
    assert "missing cells" in result.output


def test_explain_both_modes(runner, tmp_path, micro_records):
    runs = write_runs_csv(micro_records, tmp_path / "runs.csv")
    result = runner.invoke(cli, ["explain", "--runs", str(runs), "--fid", "1", "--mode", "both",
                                 "--trees", "5", "--permutations", "16", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    attributions = pd.read_csv(tmp_path / "attr_f1.csv")
    assert list(attributions.columns) == ATTRIBUTION_COLUMNS
    assert len(attributions) == 2 * 7
    assert attributions["shap_exact"].notna().all() and attributions["shap_surrogate"].notna().all()
    report = pd.read_csv(tmp_path / "surrogate_f1.csv")
    assert report.loc[0, "trees"] == 5
    assert report.loc[0, "permutations"] == 16


def test_explain_several_functions(runner, tmp_path, micro_records):
    runs = write_runs_csv(micro_records, tmp_path / "runs.csv")
    result = runner.invoke(cli, ["explain", "--runs", str(runs), "--fid", "1,3", "--fid", "all",
                                 "--mode", "exact", "--trees", "2", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    for name in ("attr_f1.csv", "attr_f3.csv", "attr_all.csv", "importance_by_class.csv"):
        assert (tmp_path / name).exists()
    assert pd.read_csv(tmp_path / "attr_f3.csv")["shap_surrogate"].isna().all()
    classes = pd.read_csv(tmp_path / "importance_by_class.csv")["modal_class"]
    assert set(classes) == {"Unimodal", "Multimodal"}


def test_explain_missing_config_fails(runner, tmp_path, micro_records):
    df = records_frame(micro_records)
    gap = tmp_path / "runs.csv"
    df[~((df["fid"] == 1) & (df["config_index"] == 1))].to_csv(gap, index=False)
    result = runner.invoke(cli, ["explain", "--runs", str(gap), "--fid", "1", "--out", str(tmp_path)])
    assert result.exit_code == 1
    assert "grid incomplete" in result.output


def test_explain_unreadable_runs_is_not_a_grid_error(runner, tmp_path):
    result = runner.invoke(cli, ["explain", "--runs", str(tmp_path / "absent.csv"), "--fid", "1",
                                 "--out", str(tmp_path)])
    assert result.exit_code == 1
    assert "does not exist" in result.output
    assert "grid incomplete" not in result.output


def test_explain_bad_fid_argument(runner, tmp_path, micro_records):
    runs = write_runs_csv(micro_records, tmp_path / "runs.csv")
    result = runner.invoke(cli, ["explain", "--runs", str(runs), "--fid", "one", "--out", str(tmp_path)])
    assert result.exit_code == 2


def test_plot(runner, tmp_path, micro_records):
    runs = write_runs_csv(micro_records, tmp_path / "runs.csv")
    runner.invoke(cli, ["explain", "--runs", str(runs), "--fid", "1", "--mode", "exact", "--trees", "2",
                        "--out", str(tmp_path)])
    first, second = tmp_path / "a.svg", tmp_path / "b.svg"
    for svg in (first, second):
        result = runner.invoke(cli, ["plot", "--attributions", str(tmp_path / "attr_f1.csv"), "--out", str(svg)])
        assert result.exit_code == 0, result.output
    text = first.read_text()
    assert text.count('<g class="band"') == 7
    assert "Star f1" in text
    assert first.read_bytes() == second.read_bytes()


def test_plot_empty_and_malformed(runner, tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text(",".join(ATTRIBUTION_COLUMNS) + "\n")
    result = runner.invoke(cli, ["plot", "--attributions", str(empty), "--out", str(tmp_path / "e.svg")])
    assert result.exit_code == 0, result.output
    assert "no data" in (tmp_path / "e.svg").read_text()

    malformed = tmp_path / "bad.csv"
    malformed.write_text("feature,value\nc1,oops\n")
    result = runner.invoke(cli, ["plot", "--attributions", str(malformed), "--out", str(tmp_path / "m.svg")])
    assert result.exit_code == 1

    garbage = tmp_path / "garbage.csv"
    garbage.write_text(",".join(ATTRIBUTION_COLUMNS) + "\n1,Star,0,c1,abc,0.1,\n")
    result = runner.invoke(cli, ["plot", "--attributions", str(garbage), "--out", str(tmp_path / "g.svg")])
    assert result.exit_code == 1


def test_compare(runner, tmp_path, micro_records):
    runs = write_runs_csv(micro_records, tmp_path / "runs.csv")
    runner.invoke(cli, ["stats", "--runs", str(runs), "--out", str(tmp_path / "aggregate.csv")])
    runner.invoke(cli, ["explain", "--runs", str(runs), "--fid", "1", "--mode", "exact", "--trees", "2",
                        "--out", str(tmp_path)])
    out = tmp_path / "compare.csv"
    result = runner.invoke(cli, ["compare", "--aggregate", str(tmp_path / "aggregate.csv"),
                                 "--reports", str(tmp_path / "surrogate_f1.csv"), "--out", str(out)])
    assert result.exit_code == 0, result.output
    table = pd.read_csv(out)
    assert table["best_all_mean"].all()
    assert table.loc[table["fid"] == 1, "r2_train"].notna().all()
    assert table.loc[table["fid"] == 3, "r2_train"].isna().all()
