"""Sorting model output into defect classes before scoring.

A predicted parse can only be scored if its words line up one-to-one with
the gold words.  sanitize() labels every prediction and keeps the aligned
ones.
"""
from llmdep import DefectClass, Sentence, Token, Treebank, align_forms, sanitize


def sent(words, sid):
    tokens = [Token(i, w, head=0 if i == 1 else 1) for i, w in enumerate(words, start=1)]
    return Sentence(tokens, source_id=sid)


gold = Treebank([
    sent(["New", "York", "is", "big"], "g1"),
    sent(["They", "met", "in", "Fallujah", "."], "g2"),
    sent(["I", "like", "tea"], "g3"),
    sent(["Rain", "fell", "all", "day"], "g4"),
])

predicted = Treebank([
    sent(["NewYork", "is", "big"], "g1"),              # two words merged
    sent(["They", "met", "in", "."], "g2"),            # sensitive word dropped
    sent(["I", "like", "tea", "I", "like", "tea"], "g3"),  # answered twice
    sent(["Rain", "fell", "all", "day"], "g4"),
])

kept, report = sanitize(predicted, gold, sensitive_lexicon={"Fallujah"})
for sid, cls in report.per_sentence:
    print(f"{sid}  {cls.name}")
print("retained", report.retained, "dropped", report.dropped)
print(report.to_json())

# The same check for one pair of sentences:
print(align_forms(sent(["tea", "like", "I"], "x"), gold.sentences[2]))

# Classes to keep anyway can be listed explicitly.
kept, report = sanitize(predicted, gold, keep=[DefectClass.SEGMENTATION_DISRUPTION])
print("keeping merged words too:", [s.source_id for s in kept])
