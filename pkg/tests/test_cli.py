import json

import pytest

from imgnn.cli import main, validate_config, ConfigError
from imgnn.graph import generate_ba, path_graph, write_edge_file


@pytest.fixture
def p3_file(tmp_path):
    path = tmp_path / "p3.edges"
    path.write_text("0 1\n1 2\n")
    return path


@pytest.fixture
def ba_file(tmp_path):
    path = tmp_path / "ba.edges"
    write_edge_file(generate_ba(60, 2, 0), path)
    return path


def test_stats(p3_file, capsys):
    assert main(["stats", "--input", str(p3_file)]) == 0
    header, row = capsys.readouterr().out.strip().splitlines()
    assert header.split("\t")[:3] == ["n", "m", "mean_degree"]
    assert row.split("\t")[:2] == ["3", "2"]


def test_oracle_p3(p3_file, capsys):
    assert main(["oracle", "--input", str(p3_file), "--mu", "1.0", "--runs", "20"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "r=1" and out[1] == "sets=3"
    assert [line.split()[0] for line in out[2:]] == ["0", "1", "2"]


def test_evaluate_one_row(ba_file, tmp_path, capsys):
    run = tmp_path / "run"
    code = main(["evaluate", "--network", str(ba_file), "--method", "degree", "--mu-ratio", "1.5",
                 "--runs", "100", "--out", str(run)])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2 and lines[0].startswith("network_id,method,mu,mu_ratio,k_star")
    assert lines[1].startswith("ba,degree,")
    assert (run / "records.csv").exists() and (run / "config.json").exists() and (run / "run.log").exists()


def test_rank_and_baseline(ba_file, capsys):
    assert main(["rank", "--input", str(ba_file), "--method", "kshell"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "node_id,score,rank" and len(lines) == 61
    assert main(["baseline", "--input", str(ba_file), "--method", "voterank", "--k", "5"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "# method=voterank" and len(out) == 7
    assert main(["baseline", "--input", str(ba_file), "--method", "degree_rinf", "--k", "3"]) == 0


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["stats", "--bogus"])
    assert e.value.code == 2


def test_config_errors_exit_1(tmp_path, p3_file, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"eval": {"target_fraction": 2}}))
    assert main(["stats", "--input", str(p3_file), "--config", str(bad)]) == 1
    assert "eval/target_fraction" in capsys.readouterr().err
    bad.write_text("{not json")
    assert main(["stats", "--input", str(p3_file), "--config", str(bad)]) == 1
    with pytest.raises(ConfigError, match="train/epochs"):
        validate_config({"train": {"epochs": 0}})
    with pytest.raises(ConfigError, match="<root>"):
        validate_config({"unknown": 1})


def test_runtime_errors_exit_1(tmp_path, capsys):
    assert main(["stats", "--input", str(tmp_path / "missing.edges")]) == 1
    broken = tmp_path / "broken.edges"
    broken.write_text("0 1\n2\n")
    assert main(["stats", "--input", str(broken)]) == 1
    assert "line 2" in capsys.readouterr().err


def test_pipeline(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "version": 1,
        "seed": 2,
        "runs": 100,
        "corpus": {"groups": [{"generator": "ba", "param": 2, "count": 3, "nodes": 8}], "mu_t_ratio": 1.5},
        "train": {"epochs": 2},
    }))
    data = tmp_path / "data"
    assert main(["gen-data", "--config", str(cfg), "--out", str(data)]) == 0
    manifest = json.loads((data / "corpus" / "manifest.json").read_text())
    assert len(manifest["networks"]) == 3
    model_dir = tmp_path / "model"
    assert main(["train", "--config", str(cfg), "--corpus", str(data / "corpus"), "--out", str(model_dir)]) == 0
    assert (model_dir / "model.json").exists()
    assert (model_dir / "train_log.csv").read_text().splitlines()[0] == "epoch,mean_loss"
    net = tmp_path / "net.edges"
    write_edge_file(generate_ba(30, 2, 5), net)
    capsys.readouterr()
    assert main(["score", "--input", str(net), "--model", str(model_dir / "model.json")]) == 0
    scores = capsys.readouterr().out.splitlines()
    assert len(scores) == 31
    assert all(0 < float(line.split(",")[1]) < 1 for line in scores[1:])

    sweep_cfg = tmp_path / "sweep.json"
    sweep_cfg.write_text(json.dumps({
        "version": 1, "seed": 1, "runs": 50,
        "methods": ["degree", "imgnn", "enrenew"],
        "model": str(model_dir / "model.json"),
        "eval": {"mu_ratios": [1.0, 2.0]},
        "networks": [{"id": "ba30", "path": str(net)}, {"id": "er", "generator": "er", "n": 30, "param": 0.2, "seed": 1}],
    }))
    sweep = tmp_path / "sweep"
    assert main(["sweep", "--config", str(sweep_cfg), "--out", str(sweep)]) == 0
    rows = (sweep / "records.csv").read_text().splitlines()
    assert len(rows) == 1 + 2 * 3 * 2
    assert json.loads((sweep / "manifest.json").read_text())["records"] == 12
    assert (sweep / "plot_data.csv").exists()
    # resuming adds nothing
    assert main(["sweep", "--config", str(sweep_cfg), "--out", str(sweep)]) == 0
    assert len((sweep / "records.csv").read_text().splitlines()) == 13


def test_label_timing_sweep_cli(tmp_path, capsys):
    cfg = tmp_path / "t.json"
    cfg.write_text(json.dumps({
        "kind": "label_timing", "seed": 0, "runs": 50,
        "corpus": {"groups": [{"generator": "er", "param": 0.4, "count": 2, "nodes": 7}], "ratios": [1.0, 2.0]},
    }))
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "t")]) == 0
    lines = (tmp_path / "t" / "timing.csv").read_text().splitlines()
    assert lines[0] == "ratio,seconds,networks,nonzero_labels,mean_r" and len(lines) == 3
