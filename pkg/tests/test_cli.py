import numpy as np
import pytest

from lexalign import cli
from lexalign.embed_store import load_cache, load_text_embeddings

from fixture_utils import (make_complementary_fixture, make_fixture,
                           write_fixture_files)


@pytest.fixture(scope="module")
def fixture_files(tmp_path_factory):
    out = tmp_path_factory.mktemp("fixture")
    fix = make_fixture(seed=0, n_words=400, n_train=200, n_test=80)
    paths = write_fixture_files(fix, out)
    return fix, paths, out


def run_cli(*argv):
    return cli.main([str(a) for a in argv])


def test_ingest_round_trip(fixture_files, tmp_path):
    fix, paths, _ = fixture_files
    cache = tmp_path / "src.lxrw"
    assert run_cli("ingest", "--vec", paths["src_static"], "--out", cache) == 0
    space = load_cache(str(cache))
    assert len(space.vocab) == 400
    assert space.normalized


def test_ingest_max_truncates(fixture_files, tmp_path):
    _, paths, _ = fixture_files
    cache = tmp_path / "src.lxrw"
    run_cli("ingest", "--vec", paths["src_static"], "--max", 50,
            "--out", cache)
    assert len(load_cache(str(cache)).vocab) == 50


def test_ingest_idempotent_bytes(fixture_files, tmp_path):
    _, paths, _ = fixture_files
    a, b = tmp_path / "a.lxrw", tmp_path / "b.lxrw"
    run_cli("ingest", "--vec", paths["src_static"], "--out", a)
    run_cli("ingest", "--vec", paths["src_static"], "--out", b)
    assert a.read_bytes() == b.read_bytes()


def test_missing_input_exit_2(tmp_path, capsys):
    code = run_cli("ingest", "--vec", tmp_path / "nope.vec",
                   "--out", tmp_path / "out.lxrw")
    assert code == 2
    assert "nope.vec" in capsys.readouterr().err


def test_malformed_vec_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.vec"
    bad.write_text("2 3\nw1 0.1 0.2 0.3\nw2 0.1\n")
    assert run_cli("ingest", "--vec", bad, "--out", tmp_path / "o.lxrw") == 1
    assert "error" in capsys.readouterr().err


def test_induce_then_eval_bli(fixture_files, tmp_path):
    fix, paths, _ = fixture_files
    out_src = tmp_path / "src_mapped.lxrw"
    out_tgt = tmp_path / "tgt_mapped.lxrw"
    out_map = tmp_path / "w.lxrw"
    assert run_cli("induce", "--src", paths["src_static"],
                   "--tgt", paths["tgt_static"],
                   "--lexicon", paths["train_lexicon"],
                   "--out-src", out_src, "--out-tgt", out_tgt,
                   "--out-map", out_map) == 0
    report = tmp_path / "bli.tsv"
    assert run_cli("eval-bli", "--src", out_src, "--tgt", out_tgt,
                   "--test", paths["test_lexicon"], "--out", report) == 0
    lines = dict(line.split("\t") for line in
                 report.read_text().splitlines())
    assert float(lines["p_at_1"]) > 0.9


def test_mine_train_map_interpolate_chain(fixture_files, tmp_path):
    fix, paths, _ = fixture_files
    negs = tmp_path / "negs.tsv"
    assert run_cli("mine", "--src", paths["src_encoder"],
                   "--tgt", paths["tgt_encoder"],
                   "--lexicon", paths["train_lexicon"],
                   "--negatives", 5, "--out", negs) == 0
    assert len(negs.read_text().splitlines()) == 200

    adapter = tmp_path / "adapter.lxrw"
    loss_log = tmp_path / "loss.csv"
    assert run_cli("train", "--src", paths["src_encoder"],
                   "--tgt", paths["tgt_encoder"],
                   "--lexicon", paths["train_lexicon"],
                   "--negatives-file", negs, "--negatives", 5,
                   "--epochs", 2, "--seed", 0,
                   "--loss-log", loss_log, "--out", adapter) == 0
    log_lines = loss_log.read_text().splitlines()
    assert log_lines[0] == "epoch,mean_loss"
    assert len(log_lines) == 3

    wmap = tmp_path / "s2e.lxrw"
    assert run_cli("map", "--static-src", paths["src_static"],
                   "--static-tgt", paths["tgt_static"],
                   "--enc-src", paths["src_encoder"],
                   "--enc-tgt", paths["tgt_encoder"],
                   "--lexicon", paths["train_lexicon"], "--out", wmap) == 0

    interp = tmp_path / "interp.lxrw"
    # the interpolate subcommand expects normalized inputs; reuse the
    # induced artifacts from ingest
    src_cache = tmp_path / "src_norm.lxrw"
    enc_cache = tmp_path / "enc_norm.lxrw"
    run_cli("ingest", "--vec", paths["src_static"], "--out", src_cache)
    run_cli("ingest", "--vec", paths["src_encoder"], "--out", enc_cache)
    assert run_cli("interpolate", "--static", src_cache,
                   "--encoder", enc_cache, "--map", wmap,
                   "--lam", 0.4, "--out", interp) == 0
    out = load_cache(str(interp))
    assert out.matrix.shape == (400, 64)


def test_eval_xlsim(fixture_files, tmp_path):
    fix, paths, _ = fixture_files
    gold = tmp_path / "gold.tsv"
    rng = np.random.default_rng(0)
    with open(gold, "w") as fh:
        for s, t in fix.test.pairs[:40]:
            fh.write(f"{s}\t{t}\t{rng.uniform(0, 5):.2f}\n")
    report = tmp_path / "xlsim.tsv"
    assert run_cli("eval-xlsim", "--src", paths["src_encoder"],
                   "--tgt", paths["tgt_encoder"], "--gold", gold,
                   "--out", report) == 0
    assert any(line.startswith("spearman\t")
               for line in report.read_text().splitlines())


def test_sweep_rows_sorted_by_lambda(fixture_files, tmp_path):
    fix, paths, _ = fixture_files
    wmap = tmp_path / "s2e.lxrw"
    run_cli("map", "--static-src", paths["src_static"],
            "--static-tgt", paths["tgt_static"],
            "--enc-src", paths["src_encoder"],
            "--enc-tgt", paths["tgt_encoder"],
            "--lexicon", paths["train_lexicon"], "--out", wmap)
    out = tmp_path / "sweep.csv"
    assert run_cli("sweep", "--static-src", paths["src_static"],
                   "--static-tgt", paths["tgt_static"],
                   "--enc-src", paths["src_encoder"],
                   "--enc-tgt", paths["tgt_encoder"],
                   "--map", wmap, "--test", paths["test_lexicon"],
                   "--lambdas", "1.0,0.5,0.0", "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "lambda,p_at_1"
    lams = [float(line.split(",")[0]) for line in lines[1:]]
    assert lams == [0.0, 0.5, 1.0]


def test_sweep_rejects_bad_lambda(fixture_files, tmp_path):
    _, paths, _ = fixture_files
    code = run_cli("sweep", "--static-src", paths["src_static"],
                   "--static-tgt", paths["tgt_static"],
                   "--enc-src", paths["src_encoder"],
                   "--enc-tgt", paths["tgt_encoder"],
                   "--map", paths["src_static"],  # never reached
                   "--test", paths["test_lexicon"],
                   "--lambdas", "0.5,1.5", "--out", tmp_path / "s.csv")
    assert code == 2


def test_sweep_interior_lambda_beats_endpoints(tmp_path):
    # two views broken in independent ways: the mixture must beat both
    fix = make_complementary_fixture(seed=0)
    paths = write_fixture_files(fix, tmp_path)
    srcm, tgtm = tmp_path / "sm.lxrw", tmp_path / "tm.lxrw"
    run_cli("induce", "--src", paths["src_static"],
            "--tgt", paths["tgt_static"],
            "--lexicon", paths["train_lexicon"],
            "--out-src", srcm, "--out-tgt", tgtm)
    enc_s, enc_t = tmp_path / "es.lxrw", tmp_path / "et.lxrw"
    run_cli("ingest", "--vec", paths["src_encoder"], "--out", enc_s)
    run_cli("ingest", "--vec", paths["tgt_encoder"], "--out", enc_t)
    wmap = tmp_path / "s2e.lxrw"
    run_cli("map", "--static-src", srcm, "--static-tgt", tgtm,
            "--enc-src", enc_s, "--enc-tgt", enc_t,
            "--lexicon", paths["train_lexicon"], "--out", wmap)
    out = tmp_path / "sweep.csv"
    assert run_cli("sweep", "--static-src", srcm, "--static-tgt", tgtm,
                   "--enc-src", enc_s, "--enc-tgt", enc_t,
                   "--map", wmap, "--test", paths["test_lexicon"],
                   "--lambdas", "0.0,0.3,0.4,0.5,1.0",
                   "--out", out) == 0
    rows = dict(line.split(",") for line in
                out.read_text().splitlines()[1:])
    interior = max(float(rows[l]) for l in ("0.3", "0.4", "0.5"))
    assert interior > max(float(rows["0.0"]), float(rows["1.0"]))


# ---------------------------------------------------------------------------
# declarative runs


def write_run_config(path, paths, out_dir, extra_hp="", stages=""):
    path.write_text(
        "[paths]\n"
        f"src_static = {paths['src_static']}\n"
        f"tgt_static = {paths['tgt_static']}\n"
        f"src_encoder = {paths['src_encoder']}\n"
        f"tgt_encoder = {paths['tgt_encoder']}\n"
        f"train_lexicon = {paths['train_lexicon']}\n"
        f"test_lexicon = {paths['test_lexicon']}\n"
        f"out_dir = {out_dir}\n"
        "[hyperparameters]\n"
        "epochs = 1\n"
        "lambdas = 0.0,0.3,1.0\n"
        f"{extra_hp}"
        f"{stages}")


def test_run_produces_artifacts_and_manifest(fixture_files, tmp_path):
    _, paths, _ = fixture_files
    out_dir = tmp_path / "run"
    config = tmp_path / "run.ini"
    write_run_config(config, paths, out_dir)
    assert run_cli("run", "--config", config) == 0
    for name in ("static_src_mapped.lxrw", "static_tgt_mapped.lxrw",
                 "negatives.tsv", "adapter.lxrw", "loss_log.csv",
                 "static_to_encoder.lxrw", "bli_lambda_0.tsv",
                 "bli_lambda_0.3.tsv", "bli_lambda_1.tsv", "manifest.txt"):
        assert (out_dir / name).exists(), name
    manifest = (out_dir / "manifest.txt").read_text()
    assert "seed\t0" in manifest
    assert manifest.count("artifact\t") == 9


def test_run_lambda_fanout_one_report_each(fixture_files, tmp_path):
    _, paths, _ = fixture_files
    out_dir = tmp_path / "run"
    config = tmp_path / "run.ini"
    write_run_config(config, paths, out_dir,
                     extra_hp="", stages="")
    config.write_text(config.read_text().replace(
        "lambdas = 0.0,0.3,1.0", "lambdas = 0.0,0.3,0.5,1.0"))
    assert run_cli("run", "--config", config) == 0
    reports = sorted(p.name for p in out_dir.glob("bli_lambda_*.tsv"))
    assert reports == ["bli_lambda_0.3.tsv", "bli_lambda_0.5.tsv",
                       "bli_lambda_0.tsv", "bli_lambda_1.tsv"]


def test_run_eval_only_no_training_artifacts(fixture_files, tmp_path):
    _, paths, _ = fixture_files
    out_dir = tmp_path / "run"
    config = tmp_path / "run.ini"
    write_run_config(config, paths, out_dir, stages=(
        "[stages]\ninduce_clwe = false\nmine = false\ntrain = false\n"
        "interpolate = false\n"))
    assert run_cli("run", "--config", config) == 0
    assert (out_dir / "bli_encoder.tsv").exists()
    assert not (out_dir / "adapter.lxrw").exists()
    assert not (out_dir / "negatives.tsv").exists()


def test_run_stage_dependency_checked_before_work(fixture_files, tmp_path,
                                                  capsys):
    _, paths, _ = fixture_files
    out_dir = tmp_path / "run"
    config = tmp_path / "run.ini"
    write_run_config(config, paths, out_dir,
                     stages="[stages]\nmine = false\n")
    assert run_cli("run", "--config", config) == 2
    assert "requires stage 'mine'" in capsys.readouterr().err
    assert not out_dir.exists()


def test_run_missing_path_exit_2(fixture_files, tmp_path):
    _, paths, _ = fixture_files
    config = tmp_path / "run.ini"
    bad = dict(paths)
    bad["test_lexicon"] = str(tmp_path / "absent.tsv")
    write_run_config(config, bad, tmp_path / "run")
    assert run_cli("run", "--config", config) == 2


def test_run_missing_config_exit_2(tmp_path):
    assert run_cli("run", "--config", tmp_path / "absent.ini") == 2


def test_run_byte_identical_repeat(fixture_files, tmp_path):
    _, paths, _ = fixture_files
    outputs = []
    for name in ("r1", "r2"):
        out_dir = tmp_path / name
        config = tmp_path / f"{name}.ini"
        write_run_config(config, paths, out_dir)
        assert run_cli("run", "--config", config) == 0
        outputs.append({p.name: p.read_bytes()
                        for p in out_dir.iterdir() if p.name != "manifest.txt"})
    assert outputs[0] == outputs[1]


def test_run_byte_identical_across_threads(fixture_files, tmp_path):
    _, paths, _ = fixture_files
    outputs = []
    for name, threads in (("t1", 1), ("t4", 4)):
        out_dir = tmp_path / name
        config = tmp_path / f"{name}.ini"
        write_run_config(config, paths, out_dir)
        assert run_cli("run", "--config", config, "--threads", threads) == 0
        outputs.append({p.name: p.read_bytes()
                        for p in out_dir.iterdir() if p.name != "manifest.txt"})
    assert outputs[0] == outputs[1]
