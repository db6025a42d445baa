"""Comparing dependency trees with tree edit distance.

The DTED score is 1 - edit_distance / size of the larger tree, where the
size counts the artificial root node as well.
"""
from llmdep import DepTree, LabelMode, Sentence, Token, build_tree, dted, edit_distance, sentence_dted


def sent(words, heads, rels):
    return Sentence([Token(i, w, head=h, deprel=r)
                     for i, (w, h, r) in enumerate(zip(words, heads, rels), start=1)])


en = sent(["He", "eats", "apples"], [2, 0, 2], ["nsubj", "root", "obj"])
zh = sent(["他", "吃", "苹果"], [2, 0, 2], ["nsubj", "root", "obj"])

# Structural mode ignores words and labels entirely, so an English and a
# Chinese sentence with the same shape score 1.
print(sentence_dted(en, zh, LabelMode.STRUCTURAL))

# Comparing relation labels instead:
zh_iobj = sent(["他", "吃", "苹果"], [2, 0, 2], ["nsubj", "root", "iobj"])
print(sentence_dted(en, zh_iobj, LabelMode.DEPREL))

# Trees can be built straight from parent arrays (node 0 is the root).
chain = DepTree.from_parents([0, 1, 2, 3])
star = DepTree.from_parents([0, 1, 1, 1])
print("chain vs star:", edit_distance(chain, star), round(dted(chain, star).score, 4))

# Very different shapes can cost more edits than the larger tree has
# nodes; the score then stops at 0.
long_chain = DepTree.from_parents([0, 1, 2, 3, 4, 5])
wide_star = DepTree.from_parents([0, 1, 1, 1, 1, 1])
d = dted(long_chain, wide_star)
print(d.edit_dist, d.size_a, round(d.raw, 4), d.score)

t = build_tree(en, LabelMode.FORM)
print(t.labels, t.parents)
