import json
import os

import pytest
from gitrepo import GitRepoBuilder
from synthcorpus import generate_rule_corpus

from updatebench.cli import main
from updatebench.corpusio import read_candidates, read_jsonl, write_triplets
from updatebench.metrics import evaluate_run
from updatebench.pipeline import ARTIFACTS, load_config


def run_cli(*args):
    return main([str(a) for a in args])


def write_config(path, **kv):
    path.write_text("".join(f"{k} = {v}\n" for k, v in kv.items()))
    return path


FAST_MODEL = dict(
    num_merges=120,
    d_model=32,
    num_heads=2,
    encoder_layers=1,
    decoder_layers=1,
    ffn_dim=64,
    max_seq_len=80,
    dropout=0.0,
    dtype="float32",
    learning_rate="3e-3",
    batch_size=16,
    epochs=6,
    beam_widths="1,5",
)


def test_mine_subcommand(tmp_path, capsys):
    repo = GitRepoBuilder(tmp_path / "repo")
    repo.write("A.java", "class A { int f() { return 1; } }\n")
    repo.commit("initial", "2019-01-01T10:00:00+00:00")
    repo.write("A.java", "class A { int f() { return 2; } }\n")
    repo.commit("fix return", "2019-02-01T10:00:00+00:00")
    repos = tmp_path / "repos.txt"
    repos.write_text(str(tmp_path / "repo") + "\n")
    out = tmp_path / "out"
    cfg = write_config(tmp_path / "cfg.txt", repo_list=repos, out_dir=out)
    assert run_cli("mine", "--config", cfg) == 0
    rows = read_jsonl(out / "corpus.jsonl")
    assert len(rows) == 1 and rows[0]["message"] == "fix return"
    assert "example_id" in rows[0]


def test_missing_artifact_exit_code_2(tmp_path, capsys):
    cfg = write_config(tmp_path / "cfg.txt", out_dir=tmp_path / "out")
    assert run_cli("split", "--config", cfg) == 2
    err = capsys.readouterr().err
    assert "corpus.jsonl" in err


def test_stage_failure_exit_code_1(tmp_path, capsys):
    out = tmp_path / "out"
    out.mkdir()
    # a corpus whose triplets all predate the boundary cannot split timewise
    corpus = generate_rule_corpus(6, seed=0, year_lo=2015, year_hi=2016)
    write_triplets(out / "corpus.jsonl", corpus, with_ids=True)
    cfg = write_config(tmp_path / "cfg.txt", out_dir=out)
    assert run_cli("split", "--config", cfg) == 1
    assert "split" in capsys.readouterr().err


def test_env_override_beats_config_file(tmp_path, monkeypatch):
    cfg = write_config(tmp_path / "cfg.txt", seed=3)
    assert load_config(cfg).seed == 3
    monkeypatch.setenv("UPDATEBENCH_SEED", "9")
    assert load_config(cfg).seed == 9
    # explicit overrides (CLI flags) win over the environment
    assert load_config(cfg, {"seed": 12}).seed == 12


def test_config_rejects_unknown_key(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("no_such_key = 1\n")
    from updatebench.errors import ConfigError

    with pytest.raises(ConfigError):
        load_config(bad)


@pytest.fixture(scope="module")
def pipeline_run(tmp_path_factory):
    """Full CLI pipeline over a small rule corpus; shared by the checks."""
    tmp = tmp_path_factory.mktemp("pipe")
    out = tmp / "out"
    out.mkdir()
    corpus = generate_rule_corpus(240, seed=5)
    write_triplets(out / "corpus.jsonl", corpus, with_ids=True)
    cfg_path = write_config(
        tmp / "cfg.txt", out_dir=out, mode="abs+bpe", split="timewise",
        boundary="2020-01-01", seed=1, **FAST_MODEL,
    )
    for stage in ("split", "tokenize", "train", "recommend", "evaluate", "classify", "report"):
        assert run_cli(stage, "--config", cfg_path) == 0, stage
    return tmp, out, cfg_path


def test_pipeline_artifacts_exist(pipeline_run):
    _, out, _ = pipeline_run
    for key in ("split_manifest", "train", "valid", "test", "train_tok", "merges",
                "checkpoint", "candidates", "report", "types", "report_text"):
        assert (out / ARTIFACTS[key]).exists(), key


def test_cli_report_matches_library_recomputation(pipeline_run):
    _, out, _ = pipeline_run
    cli_report = json.loads((out / "report.json").read_text())
    lib_report = evaluate_run(out / "candidates.jsonl", out / "test.jsonl", ks=[1, 5])
    assert cli_report == json.loads(json.dumps(lib_report.to_dict()))


def test_report_text_marks_missing_time_comparison(pipeline_run):
    _, out, _ = pipeline_run
    text = (out / "report.txt").read_text()
    assert "n/a (missing run: time-ignore)" in text
    assert "Accuracy by beam size" in text
    assert "keyword heuristic" in text


def test_report_renders_time_comparison_when_both_runs_exist(pipeline_run, tmp_path):
    _, out, cfg_path = pipeline_run
    other = tmp_path / "timeignore"
    other.mkdir()
    (other / "report.json").write_text((out / "report.json").read_text())
    assert run_cli("report", "--config", cfg_path, "--timeignore-dir", other) == 0
    text = (out / "report.txt").read_text()
    assert "TW PP%" in text and "TI PP%" in text
    assert "n/a" not in text.split("Time-wise vs time-ignore")[1]
    # restore the single-run rendering for sibling tests
    assert run_cli("report", "--config", cfg_path) == 0


def test_rerun_is_byte_identical(pipeline_run):
    _, out, cfg_path = pipeline_run
    before = {
        name: (out / name).read_bytes()
        for name in ("train.tok.jsonl", "model.ckpt", "candidates.jsonl", "report.json")
    }
    for stage in ("tokenize", "train", "recommend", "evaluate"):
        assert run_cli(stage, "--config", cfg_path) == 0
    for name, blob in before.items():
        assert (out / name).read_bytes() == blob, name


def test_classify_output_is_total(pipeline_run):
    _, out, _ = pipeline_run
    types = read_jsonl(out / "types.jsonl")
    refs = read_jsonl(out / "test.jsonl")
    assert len(types) == len(refs)
    assert all(t["update_type"] for t in types)


@pytest.mark.parametrize("mode", ["abs", "raw"])
def test_overfit_single_example_reaches_full_pp(tmp_path, mode):
    out = tmp_path / "out"
    out.mkdir()
    example = generate_rule_corpus(1, seed=7)
    for part in ("train", "valid", "test"):
        write_triplets(out / f"{part}.jsonl", example, with_ids=True)
    (out / "split_manifest.json").write_text(json.dumps({
        "policy": "TimeWise", "boundary": None, "seed": 0,
        "files": {p: f"{p}.jsonl" for p in ("train", "valid", "test")},
    }))
    cfg = write_config(
        tmp_path / "cfg.txt", out_dir=out, mode=mode, split="timewise", seed=2,
        d_model=32, num_heads=2, encoder_layers=1, decoder_layers=1, ffn_dim=64,
        max_seq_len=64, dropout=0.0, dtype="float32",
        learning_rate="5e-3", batch_size=1, epochs=60, beam_widths="1",
    )
    for stage in ("tokenize", "train", "recommend", "evaluate"):
        assert run_cli(stage, "--config", cfg) == 0, stage
    report = json.loads((out / "report.json").read_text())
    assert report["per_k"]["1"]["pp_rate"] == 1.0


def test_candidates_respect_beam_order(pipeline_run):
    _, out, _ = pipeline_run
    cands = read_candidates(out / "candidates.jsonl")
    assert cands
    for ranked in cands.values():
        assert 1 <= len(ranked) <= 5
