"""Reading, validating and writing CoNLL treebanks.

Run from the repository root:  python3 demos/01_read_and_validate.py
"""
from pathlib import Path

from llmdep import Mode, read_conll, validate, write_conll

TOY = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "toy"

# A treebank is a list of sentences; each sentence a list of tokens.
text = (TOY / "en.conllu").read_text(encoding="utf-8")
bank, violations = read_conll(text)
print(len(bank), "sentences,", len(violations), "violations")

first = bank.sentences[0]
print(first.source_id, first.forms)
print("heads:", first.heads)

# Writing gives back the same bytes.
print("round trip exact:", write_conll(bank) == text)

# Model output is rarely this tidy.  Here token 2 points at itself and the
# last row lost two columns.
messy = """# sent_id = bad-1
1\tThe\t_\tDET\t_\t_\t2\tdet\t_\t_
2\tcat\t_\tNOUN\t_\t_\t2\tnsubj\t_\t_
3\tsleeps\t_\tVERB\t_\t_\t0\troot\t_\t_
4\t.\t_\tPUNCT\t_\t_\t3\tpunct

"""

# STRICT drops any sentence with a violation...
strict, found = read_conll(messy, Mode.STRICT)
print("strict keeps", len(strict), "sentence(s)")
for v in found:
    print("  ", v.kind.name, "-", v.detail)

# ...while LENIENT keeps it and attaches the violations to the sentence.
lenient, _ = read_conll(messy, Mode.LENIENT)
print("lenient keeps", len(lenient), "sentence(s):", lenient.sentences[0].forms)

# validate() can be called on any sentence built in code.
print([v.kind.name for v in validate(lenient.sentences[0])])
