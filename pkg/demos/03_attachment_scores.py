"""UAS, LAS, label confusion and root errors."""
import random
from pathlib import Path

from llmdep import (Sentence, Token, Treebank, format_table, label_confusion, read_conll_file,
                    root_analysis, score)

TOY = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "toy"

gold, _ = read_conll_file(TOY / "en.conllu")

# Gold against itself is perfect, with or without punctuation.
print(score(gold, gold).to_dict())
print(score(gold, gold, exclude_punct=False).to_dict())

# Fake a parser that calls every "obj" a "dobj" and occasionally picks the
# wrong head for a leaf word.
rng = random.Random(0)


def noisy(sentence):
    heads = sentence.heads
    tokens = []
    for t in sentence.tokens:
        kw = vars(t).copy()
        if t.deprel == "obj":
            kw["deprel"] = "dobj"
        if t.head != 0 and t.id not in heads and rng.random() < 0.3:
            kw["head"] = rng.choice([u.id for u in sentence.tokens if u.id != t.id])
        tokens.append(Token(**kw))
    return Sentence(tokens, sentence.comments, sentence.source_id)


pred = Treebank([noisy(s) for s in gold])
report = score(pred, gold)
print(f"UAS {report.uas:.2f}  LAS {report.las:.2f}  over {report.token_total} tokens")

# Label confusion only looks at tokens whose head is right, so the swap
# shows up without being mixed with attachment errors.
for entry in label_confusion(pred, gold, top_k=5):
    print(entry)

# Root analysis: was the root word right, and if not, what went wrong?
print(root_analysis(pred, gold).to_dict()["per_category"])

print()
print(format_table(report, label_confusion(pred, gold), root_analysis(pred, gold)))
