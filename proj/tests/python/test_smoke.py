import math
import os
from pathlib import Path

import pytest

import seqqa

FIXTURES = Path(os.environ.get("SEQQA_FIXTURES", Path(__file__).resolve().parents[1] / "fixtures"))


def test_tokenize_and_detokenize():
    assert seqqa.tokenize("Hi. I'm Sam!") == ["hi", ".", "i'm", "sam", "!"]
    assert seqqa.detokenize(["i'm", "sam", "!"]) == "I'm sam!"
    assert seqqa.merge_terms(["new", "york", "city"], ["new york", "new york city"]) == ["new_york_city"]


def test_cornell_fixture():
    pairs, warnings = seqqa.parse_cornell_files(FIXTURES / "movie_lines.txt", FIXTURES / "movie_conversations.txt")
    assert len(pairs) == 5
    assert len(warnings) == 2
    assert pairs[0] == (["hi", "."], ["hello", "."])


def test_vocabulary():
    pairs = [(["hi", "hi", "there"], ["hi"]), (["hi", "rare"], ["hi", "there"])]
    vocab = seqqa.build_vocab(pairs, min_count=2, max_size=100)
    assert vocab.tokens == ["<pad>", "<go>", "<eos>", "<unk>", "hi", "there"]
    assert vocab.id("zebra") == 3
    assert len(vocab) == 6
    with pytest.raises(seqqa.SeqqaError):
        seqqa.Vocabulary(["x"])


def test_overfit_detector():
    assert seqqa.detect_overfit([3.0, 2.5, 2.0, 2.1, 2.2, 2.3], 2) == (5, 3)
    assert seqqa.detect_overfit([3.0, 2.0, 1.0], 2) is None


def test_gradcheck():
    report = seqqa.gradcheck()
    assert report["passed"]
    assert report["max_rel_error"] <= 1e-4
    assert "seq2seq_batch_loss" in report["cases"]


def test_train_save_load_answer(tmp_path):
    pairs = seqqa.make_copy_task(60, 6, 4, 1)
    vocab = seqqa.build_vocab(pairs)
    result = seqqa.train(pairs, vocab, epochs=3, batch_size=20, embed=8, hidden=8, eval_fraction=0.0,
                         checkpoint_dir=tmp_path / "ckpt", loss_log=tmp_path / "loss.csv")
    assert [row[0] for row in result["log"]] == [1, 2, 3]
    assert all(math.isfinite(row[1]) and row[2] is None for row in result["log"])
    assert (tmp_path / "loss.csv").exists()

    model = seqqa.Model.load(result["best_checkpoint"])
    assert model.hyper == {"vocab_size": len(vocab), "embed_size": 8, "hidden_size": 8, "num_layers": 2}
    assert model.vocab == vocab
    reply = model.answer("w1 w2")
    assert isinstance(reply["answer"], str)
    assert reply == model.answer("w1 w2")
    assert model.answer("zebra")["unk_in_question"]
    with pytest.raises(seqqa.SeqqaError):
        model.answer("   ")
