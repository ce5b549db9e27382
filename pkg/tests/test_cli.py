from __future__ import annotations

import json

import numpy as np
import pytest

from rfsenergy import (
    PointPatternSet,
    ScoringConfig,
    evaluate_category,
    load_model,
    read_manifest,
    read_ppf,
    rfs_energy,
    write_ppf,
)
from rfsenergy.cli import run


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    """Synthetic corpus generated through the CLI itself."""
    root = tmp_path_factory.mktemp("cli_corpus")
    cfg = {
        "dim": 6,
        "rho0": 25.0,
        "anomaly_shift_delta": 5.0,
        "anomaly_fraction": 0.3,
        "seed": 404,
        "n_train": 25,
        "n_test_normal": 12,
        "n_test_anomalous": 12,
        "category": "cli-demo",
    }
    cfg_path = root / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out = root / "data"
    assert run(["synth", "--config", str(cfg_path), "--out", str(out)]) == 0
    return root, out


def test_synth_writes_manifest_and_files(corpus):
    _, out = corpus
    manifest = read_manifest(out / "manifest.json")
    assert manifest.category == "cli-demo"
    assert len(manifest.items) == 49
    read_ppf(manifest.items[0].path)


def test_fit_eval_score_round_trip(corpus, capsys):
    root, out = corpus
    model_path = root / "model.json"
    assert run(["fit", "--manifest", str(out / "manifest.json"),
                "--out", str(model_path)]) == 0
    capsys.readouterr()

    manifest = read_manifest(out / "manifest.json")
    model = load_model(model_path)

    # score: printed value round-trips to the exact library result
    target = manifest.test_items()[0]
    assert run(["score", "--model", str(model_path), "--input", target.path,
                "--method", "energy", "--topk", "80"]) == 0
    printed = capsys.readouterr().out.strip()
    lib_value = rfs_energy(read_ppf(target.path), model, 80.0)
    assert float(printed) == lib_value

    # eval: report auc matches the library call bitwise
    report_path = root / "report.json"
    roc_path = root / "roc.csv"
    plot_path = root / "roc.png"
    assert run(["eval", "--model", str(model_path), "--manifest",
                str(out / "manifest.json"), "--method", "energy", "--topk", "100",
                "--report", str(report_path), "--roc", str(roc_path),
                "--plot", str(plot_path)]) == 0
    capsys.readouterr()
    doc = json.loads(report_path.read_text())
    lib_report = evaluate_category(
        model, manifest.test_items(), ScoringConfig("energy", 100.0),
        category=manifest.category,
    )
    assert doc["auc"] == lib_report.auc
    assert doc["category"] == "cli-demo"
    assert roc_path.read_text().splitlines()[0] == "threshold,fpr,tpr"
    assert plot_path.stat().st_size > 0


def test_fewshot_cli(corpus, capsys):
    root, out = corpus
    few_path = root / "few.csv"
    plot_path = root / "few.png"
    code = run(["fewshot", "--manifest", str(out / "manifest.json"),
                "--shots", "1,5", "--repeats", "3", "--seed", "99",
                "--out", str(few_path), "--plot", str(plot_path)])
    assert code == 0
    capsys.readouterr()
    lines = few_path.read_text().splitlines()
    assert lines[0] == "shots,repeat,auc"
    assert len(lines) == 1 + 2 * 3
    assert plot_path.stat().st_size > 0

    # same seed: identical table
    few2 = root / "few2.csv"
    assert run(["fewshot", "--manifest", str(out / "manifest.json"),
                "--shots", "1,5", "--repeats", "3", "--seed", "99",
                "--out", str(few2)]) == 0
    capsys.readouterr()
    assert few2.read_text() == few_path.read_text()


def test_fewshot_requires_seed(corpus, capsys):
    root, out = corpus
    code = run(["fewshot", "--manifest", str(out / "manifest.json"),
                "--shots", "1", "--out", str(root / "x.csv")])
    assert code == 2
    assert "--seed" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(capsys):
    assert run(["score", "--nope"]) == 2
    capsys.readouterr()


def test_unknown_command_is_usage_error(capsys):
    assert run(["frobnicate"]) == 2
    capsys.readouterr()


def test_domain_error_exit_code(tmp_path, capsys):
    missing = tmp_path / "missing.json"
    assert run(["fit", "--manifest", str(missing), "--out", str(tmp_path / "m.json")]) == 1
    err = capsys.readouterr().err
    assert "error:" in err


def test_score_empty_set_warns_and_prints_zero(tmp_path, capsys, corpus):
    root, out = corpus
    model_path = root / "model.json"
    empty = tmp_path / "empty.ppf"
    write_ppf(PointPatternSet(np.empty((0, 6), dtype=np.float32)), empty)
    with pytest.warns(Warning, match="empty"):
        code = run(["score", "--model", str(model_path), "--input", str(empty),
                    "--method", "energy"])
    assert code == 0
    assert float(capsys.readouterr().out.strip()) == 0.0


def test_synth_seed_override_changes_data(tmp_path, corpus):
    root, _ = corpus
    cfg_path = root / "cfg.json"
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert run(["synth", "--config", str(cfg_path), "--out", str(a), "--seed", "1"]) == 0
    assert run(["synth", "--config", str(cfg_path), "--out", str(b), "--seed", "2"]) == 0
    da = (a / "train_0000.ppf").read_bytes()
    db = (b / "train_0000.ppf").read_bytes()
    assert da != db


def test_eval_jobs_flag_is_result_invariant(corpus, tmp_path):
    root, out = corpus
    model_path = root / "model.json"
    r1 = tmp_path / "r1.json"
    r4 = tmp_path / "r4.json"
    assert run(["eval", "--model", str(model_path), "--manifest",
                str(out / "manifest.json"), "--report", str(r1), "--jobs", "1"]) == 0
    assert run(["eval", "--model", str(model_path), "--manifest",
                str(out / "manifest.json"), "--report", str(r4), "--jobs", "4"]) == 0
    assert r1.read_text() == r4.read_text()


def test_no_subcommand_mutates_inputs(corpus, tmp_path):
    import hashlib

    root, out = corpus
    model_path = root / "model.json"

    def tree_digest(directory):
        h = hashlib.sha256()
        for p in sorted(directory.rglob("*")):
            if p.is_file():
                h.update(p.name.encode())
                h.update(p.read_bytes())
        return h.hexdigest()

    before = tree_digest(out)
    assert run(["eval", "--model", str(model_path),
                "--manifest", str(out / "manifest.json"),
                "--report", str(tmp_path / "r.json")]) == 0
    assert run(["fewshot", "--manifest", str(out / "manifest.json"),
                "--shots", "1", "--repeats", "2", "--seed", "5",
                "--out", str(tmp_path / "f.csv")]) == 0
    assert tree_digest(out) == before


def test_negative_seed_is_domain_error(corpus, tmp_path, capsys):
    root, out = corpus
    code = run(["fewshot", "--manifest", str(out / "manifest.json"),
                "--shots", "1", "--repeats", "1", "--seed", "-3",
                "--out", str(tmp_path / "f.csv")])
    assert code == 1
    assert "seed" in capsys.readouterr().err
