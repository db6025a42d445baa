import random
import warnings

import pytest

from llmdep.conll import Sentence, Token, Treebank
from llmdep.crosslingual import (consistency_summary, pairs_from_tsv, pairs_to_tsv,
                                 select_pairs)
from llmdep.treedist import DepTree, dted

from .oracles import brute_force_ted
from .synthetic import make_corpus


def bank_from_heads(head_lists, prefix):
    sentences = []
    for i, heads in enumerate(head_lists, start=1):
        tokens = [Token(j, f"{prefix}{i}_{j}", head=h, deprel="dep")
                  for j, h in enumerate(heads, start=1)]
        sentences.append(Sentence(tokens, source_id=f"{prefix}{i}"))
    return Treebank(sentences)


def oracle_dted(heads_a, heads_b):
    pa, pb = [-1, *heads_a], [-1, *heads_b]
    la, lb = ["R"] + ["x"] * len(heads_a), ["R"] + ["x"] * len(heads_b)
    return 1 - brute_force_ted(la, pa, lb, pb) / max(len(pa), len(pb))


def test_self_pairing_scores_one():
    bank = make_corpus(random.Random(2), 12)
    sel = select_pairs(bank, bank, k=5)
    assert len(sel.pairs) == 5
    assert all(p.score == 1.0 for p in sel.pairs)


def test_fewer_pairs_than_k_warns():
    a = make_corpus(random.Random(3), 30, prefix="a")
    b = make_corpus(random.Random(4), 30, prefix="b")
    with pytest.warns(UserWarning):
        sel = select_pairs(a, b, k=50, length_window=100)
    assert len(sel.pairs) == 30 and sel.warning
    assert len({p.id_a for p in sel.pairs}) == 30 and len({p.id_b for p in sel.pairs}) == 30


def test_unique_identical_pair_ranks_first():
    # a1 and b1 are the same star; every other sentence is a chain of another length
    heads_a = [[0, 1, 1, 1, 1]] + [[0, 1, 2, 3]] * 9
    heads_b = [[0, 1, 1, 1, 1]] + [[0, 1, 2, 3, 4, 5, 6]] * 9
    a, b = bank_from_heads(heads_a, "a"), bank_from_heads(heads_b, "b")
    # exhaustive oracle over every pair
    scores = {(f"a{i}", f"b{j}"): oracle_dted(ha, hb)
              for i, ha in enumerate(heads_a, start=1) for j, hb in enumerate(heads_b, start=1)}
    best = max(scores.values())
    assert [k for k, v in scores.items() if v == best] == [("a1", "b1")]
    sel = select_pairs(a, b, k=3, length_window=100)
    assert (sel.pairs[0].id_a, sel.pairs[0].id_b) == ("a1", "b1")
    for p in sel.pairs:
        assert p.score == pytest.approx(max(0.0, scores[p.id_a, p.id_b]), abs=1e-12)


def test_length_window_prunes():
    a = bank_from_heads([[0, 1]], "a")
    b = bank_from_heads([[0, 1, 1, 1, 1, 1]], "b")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert select_pairs(a, b, k=1, length_window=3).pairs == []
        assert len(select_pairs(a, b, k=1, length_window=4).pairs) == 1


def test_selection_invariant_to_input_order():
    rng = random.Random(17)
    a = make_corpus(rng, 15, prefix="a", max_len=7)
    b = make_corpus(rng, 15, prefix="b", max_len=7)
    first = select_pairs(a, b, k=10)
    a.sentences.reverse()
    rng.shuffle(b.sentences)
    again = select_pairs(a, b, k=10)
    assert first.pairs == again.pairs


def test_allow_repeats():
    a = bank_from_heads([[0, 1, 1]], "a")
    b = bank_from_heads([[0, 1, 1], [0, 1, 2]], "b")
    sel = select_pairs(a, b, k=2, allow_repeats=True)
    assert [p.id_a for p in sel.pairs] == ["a1", "a1"]


def test_invalid_bank_rejected():
    bad = bank_from_heads([[2, 1]], "a")
    with pytest.raises(ValueError):
        select_pairs(bad, bad, k=1)


def test_consistency_with_gold_predictions_has_ratio_one():
    rng = random.Random(6)
    a = make_corpus(rng, 10, prefix="a", max_len=6)
    b = make_corpus(rng, 10, prefix="b", max_len=6)
    sel = select_pairs(a, b, k=6)
    summary = consistency_summary(a, b, sel)
    assert summary.mean_score == pytest.approx(summary.mean_gold)
    assert summary.ratio == pytest.approx(1.0)
    assert 0.0 <= summary.mean_score <= 1.0


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_chain_vs_star_predictions(n):
    chain = [0] + list(range(1, n))
    star = [0] + [1] * (n - 1)
    gold_a = bank_from_heads([chain], "a")
    gold_b = bank_from_heads([chain], "b")
    sel = select_pairs(gold_a, gold_b, k=1)
    pred_a = bank_from_heads([chain], "a")
    pred_b = bank_from_heads([star], "b")
    summary = consistency_summary(pred_a, pred_b, sel)
    assert summary.mean_score == pytest.approx(max(0.0, oracle_dted(chain, star)), abs=1e-12)


def test_missing_predictions_are_skipped():
    a = bank_from_heads([[0, 1], [0, 1, 1]], "a")
    b = bank_from_heads([[0, 1], [0, 1, 1]], "b")
    sel = select_pairs(a, b, k=2)
    partial = Treebank(a.sentences[:1])
    summary = consistency_summary(partial, b, sel)
    assert summary.skipped == 1 and len(summary.per_pair) == 1
    with pytest.raises(ValueError):
        consistency_summary(Treebank(), b, sel)


def test_tsv_round_trip():
    rng = random.Random(1)
    a = make_corpus(rng, 8, prefix="a", max_len=6)
    b = make_corpus(rng, 8, prefix="b", max_len=6)
    sel = select_pairs(a, b, k=5)
    text = pairs_to_tsv(sel)
    assert text.splitlines()[0].split("\t")[:3] == ["id_a", "id_b", "score"]
    back = pairs_from_tsv(text)
    assert back.pairs == sel.pairs


def test_chain_star_tree_helper():
    chain = DepTree.from_parents([0, 1, 2])
    star = DepTree.from_parents([0, 1, 1])
    assert dted(chain, star).score == pytest.approx(oracle_dted([0, 1, 2], [0, 1, 1]))
