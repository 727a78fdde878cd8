import pandas as pd
import pytest
import yaml
from retsynth.cli import cli_dispatch
from retsynth.cli.dispatch import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE

TINY_RUN = """\
# small enough for the test suite
classifier.epochs = 1
classifier.base_ch = 8
classifier.batch_size = 4
classifier.augment_prob = 0.0
wgan.base_ch = 8
wgan.latent_dim = 8
wgan.batch_size = 4
wgan.n_critic = 1
verify.top_n = 2
"""


def run(*argv):
    return cli_dispatch([str(arg) for arg in argv])


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """synth-data -> split -> train-classifier / train-wgan -> generate, once per module"""
    root = tmp_path_factory.mktemp("pipeline")
    config = root / "tiny.ini"
    config.write_text(TINY_RUN, encoding="utf-8")
    steps = [
        ("synth-data", "--kind", "drusen", "ga", "healthy", "--modality", "FA", "--n", 6, "--img-size", 32),
        ("split", "--manifest", root / "corpus"),
        ("train-classifier", "--manifest", root / "split"),
        ("train-wgan", "--images", root / "split", "--label", "drusen", "--split", "train", "--steps", 2),
        ("generate", "--ckpt", root / "train-wgan" / "wgan.bin", "--n", 3),
    ]
    outputs = {"synth-data": "corpus", "split": "split"}
    for step in steps:
        out = root / outputs.get(step[0], step[0])
        assert run(*step, "--seed", 7, "--config", config, "--out", out) == EXIT_OK, step[0]
    return root


def provenance(out_dir):
    return yaml.safe_load((out_dir / "provenance.yaml").read_text(encoding="utf-8"))


def test_synth_data_writes_images_manifest_and_records(pipeline):
    corpus = pipeline / "corpus"
    manifest = pd.read_csv(corpus / "manifest.csv")
    assert len(manifest) == 18
    assert manifest.groupby("label").size().to_dict() == {"drusen": 6, "ga": 6, "healthy": 6}
    assert all((corpus / path).exists() for path in manifest["path"])
    assert (corpus / "synth-data.log").stat().st_size > 0
    assert yaml.safe_load((corpus / "config.yaml").read_text(encoding="utf-8"))["classifier"]["epochs"] == 1

    record = provenance(corpus)
    assert record["command"] == "synth-data" and record["status"] == "ok" and record["seed"] == 7
    assert "manifest.csv" in record["artifacts"]
    assert "provenance.yaml" not in record["artifacts"]


def test_split_is_stratified(pipeline):
    counts = pd.read_csv(pipeline / "split" / "split_counts.csv")
    assert set(counts["split"]) == {"train", "val", "test"}
    manifest = pd.read_csv(pipeline / "split" / "manifest.csv")
    assert manifest.groupby("split").size().to_dict() == {"test": 3, "train": 12, "val": 3}


def test_training_writes_checkpoints_and_loss_tables(pipeline):
    assert (pipeline / "train-classifier" / "classifier.bin").exists()
    history = pd.read_csv(pipeline / "train-classifier" / "train_classifier.csv")
    assert len(history) == 1
    assert (pipeline / "train-wgan" / "wgan.bin").exists()
    losses = pd.read_csv(pipeline / "train-wgan" / "train_wgan.csv")
    assert list(losses.columns) == ["step", "critic_estimate", "g_loss"]


def test_generate_writes_a_wgan_manifest(pipeline):
    manifest = pd.read_csv(pipeline / "generate" / "manifest.csv")
    assert len(manifest) == 3
    assert set(manifest["provenance"]) == {"wgan"}
    assert set(manifest["modality"]) == {"FA"}
    assert all((pipeline / "generate" / path).exists() for path in manifest["path"])


def test_verify_cam_merge_and_report(pipeline):
    classifier = pipeline / "train-classifier" / "classifier.bin"
    generated = pipeline / "generate"

    out = pipeline / "verify"
    argv = ["--classifier", classifier, "--images", generated, "--true-class", "drusen", "--provenance", "wgan"]
    assert run("verify", *argv, "--out", out) == EXIT_OK
    table = pd.read_csv(out / "verification.csv")
    assert table.loc[0, "class_group"] == "Drusen-FA" and table.loc[0, "count"] == 3
    assert 0.0 <= table.loc[0, "value"] <= 1.0
    assert len(pd.read_csv(out / "relation.csv")) == 3
    assert pd.read_csv(out / "top1_histogram.csv")["top1_count"].sum() == 3

    cam_out = pipeline / "cam"
    assert run("cam", "--classifier", classifier, "--images", generated, "--max-images", 2, "--out", cam_out) == 0
    assert len(pd.read_csv(cam_out / "cam.csv")) == 2
    assert len(list((cam_out / "cam").glob("*_overlay.ppm"))) == 2

    merged = pipeline / "merged"
    assert run("merge", "--manifest", pipeline / "split", "--generated", generated, "--out", merged) == EXIT_OK
    counts = pd.read_csv(merged / "manifest.csv").groupby("split").size().to_dict()
    assert counts["train"] == 15

    report = pipeline / "report"
    assert run("report", "--inputs", out, pipeline / "train-wgan", cam_out, "--out", report) == EXIT_OK
    html = (report / "report.html").read_text(encoding="utf-8")
    assert "Drusen-FA" in html


def test_verify_top_n_comes_from_the_config(pipeline):
    out = pipeline / "verify_top2"
    config = pipeline / "tiny.ini"
    classifier = pipeline / "train-classifier" / "classifier.bin"
    argv = ["--classifier", classifier, "--images", pipeline / "generate", "--true-class", "drusen"]
    assert run("verify", *argv, "--config", config, "--out", out) == EXIT_OK
    assert len(pd.read_csv(out / "relation.csv")) == 2


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["paint"],
        ["synth-data", "--colour", "red"],
        ["generate", "--n", "3"],
        ["split", "--ratios", "0.5", "0.5"],
    ],
)
def test_usage_errors_exit_1(argv, capsys):
    assert cli_dispatch(argv) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_help_exits_0(capsys):
    assert cli_dispatch(["-h"]) == EXIT_OK
    assert "synth-data" in capsys.readouterr().out
    assert cli_dispatch(["synth-data", "--help"]) == EXIT_OK
    assert "--quadrant" in capsys.readouterr().out


def test_runtime_errors_exit_2_and_are_recorded(tmp_path, capsys):
    config = tmp_path / "bad.ini"
    config.write_text("wgan.n_critc = 3\n", encoding="utf-8")
    out = tmp_path / "out"
    assert run("synth-data", "--config", config, "--out", out) == EXIT_RUNTIME
    assert "n_critc" in capsys.readouterr().err
    assert provenance(out)["status"] == "failed"
    assert "n_critc" in (out / "synth-data.log").read_text(encoding="utf-8")


def test_bad_option_values_exit_2(tmp_path):
    out = tmp_path / "out"
    assert run("synth-data", "--kind", "cataract", "--n", 2, "--img-size", 32, "--out", out) == EXIT_RUNTIME
    assert run("generate", "--ckpt", tmp_path / "absent.bin", "--n", 2, "--out", out) == EXIT_RUNTIME


def test_train_ae_then_stylize(pipeline):
    corpus = pipeline / "corpus"
    stack_out = pipeline / "train-ae"
    assert run("train-ae", "--images", corpus, "--steps", 2, "--out", stack_out) == EXIT_OK
    assert sorted(pd.read_csv(stack_out / "autoencoder_psnr.csv")["level"]) == [1, 2, 3, 4]
    assert list(pd.read_csv(stack_out / "train_ae.csv").columns) == ["step", "level_1", "level_2", "level_3", "level_4"]

    images = sorted(corpus.glob("*.pgm"))
    out = pipeline / "stylize"
    argv = ["--stack", stack_out / "stylizer.bin", "--content", images[0], images[1], "--style", images[-1]]
    assert run("stylize", *argv, "--label", "healthy", "--out", out) == EXIT_OK
    pairs = pd.read_csv(out / "stylized.csv")
    assert len(pairs) == 2 and set(pairs["levels"]) == {"4-3-2-1"}
    manifest = pd.read_csv(out / "manifest.csv")
    assert set(manifest["provenance"]) == {"styletransfer"} and set(manifest["label"]) == {"healthy"}
    assert all((out / path).exists() for path in manifest["path"])


def test_sweep_command(pipeline):
    config = pipeline / "sweep.ini"
    config.write_text(TINY_RUN + "sweep.steps = 1\nsweep.base_ch = 8\nsweep.n_generate = 2\n", encoding="utf-8")
    out = pipeline / "sweep"
    classifier = pipeline / "train-classifier" / "classifier.bin"
    argv = ["--classifier", classifier, "--images", pipeline / "split", "--label", "drusen", "--true-class", "drusen"]
    assert run("sweep", *argv, "--sizes", 2, 4, "--config", config, "--out", out) == EXIT_OK
    curve = pd.read_csv(out / "sweep.csv")
    assert curve["size"].tolist() == [2, 4]
    assert curve["value"].between(0.0, 1.0).all()


def test_unexpected_errors_exit_2_with_a_log(tmp_path, monkeypatch, capsys):
    def broken(self, options, config):
        raise ZeroDivisionError("division by zero")

    monkeypatch.setattr("retsynth.cli.commands.synth_data.Command.handle", broken)
    out = tmp_path / "out"
    assert run("synth-data", "--out", out) == EXIT_RUNTIME
    assert "ZeroDivisionError" in capsys.readouterr().err
    assert provenance(out)["status"] == "failed"
    assert "Traceback" in (out / "synth-data.log").read_text(encoding="utf-8")
