"""Acceptance suite: one test per primary criterion, each printing a PASS or
FAIL line (shown even under output capture).  Runs offline.

    pytest tests/test_acceptance.py -v
"""

import json
import random
import time

import pytest

from llmdep.conll import Mode, Sentence, Token, Treebank, read_conll, write_conll
from llmdep.evaluation import ConfusionEntry, RootCategory, label_confusion, root_analysis, score
from llmdep.sanitize import sanitize
from llmdep.treedist import DepTree, LabelMode, build_tree, dted, edit_distance, sentence_dted

from .fixtures.make_toy import HERE as TOY, run_pipeline
from .oracles import brute_force_ted
from .synthetic import INJECTABLE, SENSITIVE, inject, make_corpus, make_sentence, random_heads


@pytest.fixture
def report(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'}  {criterion}: {detail}")
        assert ok, detail
    return emit


def random_tree(rng, max_nodes, alphabet="abc"):
    n = rng.randint(1, max_nodes)
    parents = [-1] + [rng.randrange(k) for k in range(1, n)]
    return DepTree(tuple(rng.choice(alphabet) for _ in range(n)), tuple(parents))


def retoken(t, **kw):
    return Token(**{**vars(t), **kw})


def changed(bank, change):
    return Treebank([Sentence([change(si, t) for t in s.tokens], list(s.comments), s.source_id)
                     for si, s in enumerate(bank)])


def test_ted_oracle_equivalence(report):
    rng = random.Random(1001)
    pairs = [(random_tree(rng, 6), random_tree(rng, 6)) for _ in range(200)]
    start = time.perf_counter()
    mismatches = [(a, b) for a, b in pairs
                  if edit_distance(a, b) != brute_force_ted(a.labels, a.parents, b.labels, b.parents)]
    elapsed = time.perf_counter() - start
    report("TED oracle equivalence", not mismatches and elapsed < 60,
           f"{len(pairs) - len(mismatches)}/200 exact matches in {elapsed:.1f}s")


def test_ted_metric_properties(report):
    rng = random.Random(1002)
    violations = 0
    for _ in range(100):
        a, b, c = (random_tree(rng, 8) for _ in range(3))
        ab, ba = edit_distance(a, b), edit_distance(b, a)
        bc, ac = edit_distance(b, c), edit_distance(a, c)
        violations += ab != ba
        violations += any(edit_distance(t, t) != 0 for t in (a, b, c))
        violations += ac > ab + bc
    report("TED metric properties", violations == 0,
           f"{violations} violations of symmetry, identity or triangle inequality on 100 triples")


def test_dted_formula_and_bounds(report):
    rng = random.Random(1003)
    pairs = [(random_tree(rng, 8), random_tree(rng, 8)) for _ in range(500)]
    for _ in range(300):
        ha, hb = random_heads(rng, rng.randint(1, 10)), random_heads(rng, rng.randint(1, 10))
        pairs.append((DepTree.from_parents(ha), DepTree.from_parents(hb)))
    bad, clamped = 0, 0
    for a, b in pairs:
        got = dted(a, b)
        formula = 1 - edit_distance(a, b) / max(len(a), len(b))
        if formula < 0:
            # the unit-cost distance can exceed the larger tree size
            clamped += 1
            bad += got.score != 0.0
        else:
            bad += abs(got.score - formula) > 1e-12
        bad += not 0.0 <= got.score <= 1.0

    # identical shapes, no shared words: structural mode sees no difference
    en = Sentence([Token(1, "He", head=2, deprel="nsubj"), Token(2, "eats", head=0, deprel="root"),
                   Token(3, "apples", head=2, deprel="obj")])
    zh = Sentence([Token(1, "他", head=2, deprel="nsubj"), Token(2, "吃", head=0, deprel="root"),
                   Token(3, "苹果", head=2, deprel="obj")])
    disjoint = sentence_dted(en, zh, LabelMode.STRUCTURAL).score

    # five nodes each (root plus four words), one relation differs
    a = Sentence([Token(i, f"w{i}", head=h, deprel=r) for i, (h, r) in
                  enumerate(zip([2, 0, 2, 2], ["nsubj", "root", "obj", "punct"]), start=1)])
    b = Sentence([retoken(t, deprel="iobj") if t.id == 3 else t for t in a.tokens])
    ta, tb = build_tree(a, LabelMode.DEPREL), build_tree(b, LabelMode.DEPREL)
    oracle = brute_force_ted(ta.labels, ta.parents, tb.labels, tb.parents)
    five = dted(ta, tb)

    ok = bad == 0 and disjoint == 1.0 and oracle == 1 and len(ta) == 5 and five.score == 0.8
    report("DTED formula and bounds", ok,
           f"{len(pairs)} pairs, {bad} off-formula or out of [0,1] "
           f"({clamped} had a negative raw score and were clamped to 0); "
           f"disjoint vocabulary = {disjoint}; 5-node pair edit_dist {oracle} -> {five.score}")


def test_conll_round_trip(report):
    text = (TOY / "roundtrip.conllu").read_text(encoding="utf-8")
    bank, violations = read_conll(text)
    real = [v for v in violations if v.kind.name != "SKIPPED_NODE"]
    written = write_conll(bank)
    again, _ = read_conll(written)
    ok = (len(bank) == 100 and not real and written == text
          and again.sentences == bank.sentences and write_conll(again) == written)
    report("CoNLL round-trip", ok,
           f"{len(bank)} sentences, {len(real)} violations, byte-exact={written == text}")


def test_sanitizer_recall(report):
    rng = random.Random(1005)
    plan = [None] * 50 + [c for c in INJECTABLE for _ in range(50)]
    rng.shuffle(plan)
    gold = make_corpus(rng, len(plan), sensitive_every=1)
    text = "".join(inject(rng, s, c) for s, c in zip(gold, plan))
    pred, _ = read_conll(text, Mode.LENIENT)
    kept, result = sanitize(pred, gold, SENSITIVE)
    got = [c.name for _, c in result.per_sentence]
    expected = [c or "ALIGNED" for c in plan]
    injected = [g for g, c in zip(got, plan) if c]
    flagged = sum(g != "ALIGNED" for g in injected)
    clean_ids = {s.source_id for s, c in zip(gold, plan) if c is None}
    retained = clean_ids & {s.source_id for s in kept}
    ok = got == expected and flagged == 300 and retained == clean_ids
    report("Sanitizer recall", ok,
           f"{flagged}/300 injected flagged, "
           f"{sum(g == e for g, e in zip(got, expected))}/{len(plan)} match the injector log, "
           f"{len(retained)}/50 clean retained")


def ten_token_gold():
    heads = [2, 0, 2, 5, 3, 2, 8, 6, 8, 2]
    rels = ["nsubj", "root", "obj", "det", "nmod", "conj", "amod", "obl", "case", "punct"]
    return Treebank([Sentence([Token(i, f"w{i}", head=h, deprel=r)
                               for i, (h, r) in enumerate(zip(heads, rels), start=1)])])


def test_scoring_identities(report):
    rng = random.Random(1006)
    gold = Treebank([make_sentence(rng, f"p{i}", rng.randint(3, 12), punct=True)
                     for i in range(50)])
    identity = [score(gold, gold, exclude) for exclude in (True, False)]
    identity_ok = all(r.uas == r.las == 100.0 for r in identity)

    worse = 0
    for _ in range(1000):
        def perturb(_, t):
            head = rng.randint(0, 12) if rng.random() < 0.3 else t.head
            rel = rng.choice(["obj", "nsubj", t.deprel, t.deprel])
            return retoken(t, head=head, deprel=rel)
        r = score(changed(gold, perturb), gold, rng.random() < 0.5)
        worse += r.las > r.uas

    ten = ten_token_gold()

    def hand(_, t):
        if t.id in (1, 4):
            return retoken(t, head=3)
        return retoken(t, deprel="iobj") if t.id == 3 else t
    r = score(changed(ten, hand), ten, exclude_punct=False)
    example = f"UAS {r.uas:.2f} / LAS {r.las:.2f}"
    ok = identity_ok and worse == 0 and example == "UAS 80.00 / LAS 70.00"
    report("Scoring identities", ok,
           f"gold vs gold 100/100 for both punctuation settings: {identity_ok}; "
           f"LAS > UAS in {worse}/1000 perturbations; 10-token example {example}")


def root_gold(rng, sid):
    """Sentence with a VERB root, a NOUN elsewhere and a final full stop."""
    s = make_sentence(rng, sid, rng.randint(4, 10), punct=True)
    root = s.heads.index(0) + 1
    noun = rng.choice([t.id for t in s.tokens[:-1] if t.id != root])
    other = [t.id for t in s.tokens[:-1] if t.id not in (root, noun)]
    upos = {root: "VERB", noun: "NOUN", **{i: "ADJ" for i in other}}
    tokens = [retoken(t, upos=upos[t.id]) if t.id in upos else t for t in s.tokens]
    return Sentence(tokens, s.comments, s.source_id)


def move_root(sentence, new_root):
    old = sentence.heads.index(0) + 1
    def fix(t):
        if t.id == new_root:
            return retoken(t, head=0)
        return retoken(t, head=new_root) if t.id == old else t
    return Sentence([fix(t) for t in sentence.tokens], sentence.comments, sentence.source_id)


def inject_root(rng, sentence, category):
    root = sentence.heads.index(0) + 1
    by_upos = {t.upos: t.id for t in sentence.tokens}
    if category is RootCategory.CORRECT:
        return sentence
    if category is RootCategory.PUNCT_ROOT:
        return move_root(sentence, len(sentence))
    if category is RootCategory.NOUN_ROOT_FOR_VERB:
        return move_root(sentence, by_upos["NOUN"])
    if category is RootCategory.OTHER_MISMATCH:
        return move_root(sentence, by_upos["ADJ"])
    if category is RootCategory.NO_ROOT:
        target = rng.choice([t.id for t in sentence.tokens if t.id != root])
        return Sentence([retoken(t, head=target) if t.id == root else t for t in sentence.tokens],
                        sentence.comments, sentence.source_id)
    extra = rng.choice([t.id for t in sentence.tokens if t.head != 0])
    return Sentence([retoken(t, head=0) if t.id == extra else t for t in sentence.tokens],
                    sentence.comments, sentence.source_id)


def test_confusion_recovery(report):
    rng = random.Random(1007)
    gold = make_corpus(rng, 60)
    gold = changed(gold, lambda _, t: retoken(t, deprel="dobj") if t.deprel == "obj" else t)
    swaps = sum(t.deprel == "dobj" for s in gold for t in s.tokens)
    pred = changed(gold, lambda _, t: retoken(t, deprel="obj") if t.deprel == "dobj" else t)
    confusion = label_confusion(pred, gold)
    confusion_ok = confusion == [ConfusionEntry("dobj", "obj", swaps)]

    cats = [c for c in RootCategory for _ in range(15)]
    rng.shuffle(cats)
    root_bank = Treebank([root_gold(rng, f"r{i}") for i in range(len(cats))])
    injected = Treebank([inject_root(rng, s, c) for s, c in zip(root_bank, cats)])
    roots = root_analysis(injected, root_bank)
    roots_ok = [c for _, c in roots.per_sentence] == cats
    report("Confusion recovery", confusion_ok and roots_ok,
           f"dobj->obj x{swaps} recovered: {confusion_ok}; "
           f"root categories recovered for {sum(c == e for (_, c), e in zip(roots.per_sentence, cats))}"
           f"/{len(cats)} sentences across {len(RootCategory)} categories")


def test_harness_determinism(report, tmp_path):
    results = {}
    for name in ("echo", "noisy"):
        out = tmp_path / name
        code = run_pipeline(TOY, TOY / f"cache_{name}", out)
        golden = TOY / "golden" / name
        names = sorted(p.name for p in golden.iterdir())
        same = code == 0 and sorted(p.name for p in out.iterdir()) == names and all(
            (out / n).read_bytes() == (golden / n).read_bytes() for n in names)
        results[name] = (same, json.loads((out / "summary.json").read_text())["consistency"])
    echo, noisy = results["echo"][1], results["noisy"][1]
    ok = results["echo"][0] and results["noisy"][0] and echo["ratio"] == 1.0
    report("Harness determinism", ok,
           f"golden match echo={results['echo'][0]} noisy={results['noisy'][0]}; "
           f"echo mean {echo['mean_score']} / gold {echo['mean_gold']} ratio {echo['ratio']}; "
           f"noisy mean {noisy['mean_score']} / gold {noisy['mean_gold']} ratio {noisy['ratio']}")
