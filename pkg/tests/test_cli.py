from importlib import resources

import pytest

from callboost.augment import check_utterance, read_corpus
from callboost.cli import main
from callboost.harness.synth import SynthConfig, synth_testset


def test_expand(capsys):
    assert main(["expand", "DLH5K", "--shortened"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "DLH5K\tfull\tlufthansa five kilo"
    assert "DLH5K\tshortened\tfive kilo" in out


def test_expand_bad_code(capsys):
    assert main(["expand", "D1"]) == 1
    assert "error" in capsys.readouterr().err


def test_bias_and_rescore(tmp_path, capsys):
    data = synth_testset(SynthConfig(n_utterances=5, seed=3))
    paths = data.write(tmp_path)
    uid = next(iter(data.references))
    symbols = tmp_path / "bias_words.txt"
    out = tmp_path / "bias.fst"
    assert main(["bias", "--surveillance", str(paths["surveillance"]), "--utterance", uid,
                 "--symbols", str(symbols), "-o", str(out), "--lexicon", str(paths["lexicon"])]) == 0
    assert out.read_text().strip()
    hyp = tmp_path / "hyp.tsv"
    assert main(["rescore", "--lattices", str(paths["lattices"]), "--surveillance", str(paths["surveillance"]),
                 "-o", str(hyp), "--lexicon", str(paths["lexicon"])]) == 0
    assert len(hyp.read_text().splitlines()) == 5


def test_bias_unknown_utterance(tmp_path, capsys):
    surv = tmp_path / "s.tsv"
    surv.write_text("a\t0\tSWR1\n")
    assert main(["bias", "--surveillance", str(surv), "--utterance", "b", "--symbols",
                 str(tmp_path / "w.txt")]) == 2


def test_rerank_and_eval(tmp_path, capsys):
    (tmp_path / "cand.tsv").write_text("u1\tthree nine two papa\nu2\tNO_CALLSIGN\n")
    (tmp_path / "s.tsv").write_text("u1\t0\tAUA392P,SWR392\nu2\t1\tSWR1\n")
    (tmp_path / "refs.tsv").write_text("u1\tAUA392P\tthree nine two papa\nu2\tNONE\thello\n")
    pred = tmp_path / "pred.tsv"
    assert main(["rerank", "--candidates", str(tmp_path / "cand.tsv"), "--surveillance", str(tmp_path / "s.tsv"),
                 "-o", str(pred)]) == 0
    assert pred.read_text() == "u1\tAUA392P\t0.25\nu2\tNO_MATCH\t\n"
    assert main(["eval", "--predictions", str(pred), "--references", str(tmp_path / "refs.tsv")]) == 0
    assert "callsign accuracy\t100.00" in capsys.readouterr().out


def test_augment(tmp_path):
    corpus = resources.files("callboost").joinpath("data/sample_corpus.tsv")
    out = tmp_path / "aug.tsv"
    assert main(["augment", "--corpus", str(corpus), "--target", "40", "--callsigns", "DLH5KX,SWR12",
                 "-o", str(out)]) == 0
    got = read_corpus(out)
    assert len(got) == 40 and all(check_utterance(u) == [] for u in got)


def test_synth_and_pipeline(tmp_path, capsys):
    assert main(["synth", "--out", str(tmp_path), "-n", "25", "--seed", "1"]) == 0
    capsys.readouterr()
    conf = str(tmp_path / "run.conf")
    assert main(["pipeline", "--config", conf, "--nlp-boosting", "--report", str(tmp_path / "r.txt")]) == 0
    out = capsys.readouterr().out
    assert "accuracy" in out and (tmp_path / "r.txt").exists()
    assert main(["pipeline", "--config", conf, "--ablation"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 9


def test_pipeline_bad_setting(tmp_path, capsys):
    assert main(["pipeline", "--set", "discount=-3", "--oracle"]) == 2
    assert main(["pipeline", "--lattice-rescoring", "--set", "hypotheses=h.tsv"]) == 2


def test_missing_file(tmp_path):
    assert main(["eval", "--predictions", str(tmp_path / "nope"), "--references", str(tmp_path / "nope")]) == 2


def test_help_lists_commands(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    out = capsys.readouterr().out
    for cmd in ("expand", "bias", "rescore", "rerank", "augment", "synth", "eval", "pipeline"):
        assert cmd in out
