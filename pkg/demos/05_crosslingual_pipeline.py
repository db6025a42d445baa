"""Cross-lingual consistency on the bundled toy treebanks, fully offline.

The steps are the ones the ``pipeline`` subcommand chains together:
pick similar sentence pairs from the gold trees, ask the model for both
sides, drop unusable answers, then compare the predicted trees pair by
pair.  Answers come from a frozen cache so nothing touches the network.
"""
import tempfile
from pathlib import Path

from llmdep import (LlmConfig, PromptTemplate, ResponseCache, complete, consistency_summary,
                    load_lexicon, read_conll_file, render_prompt, response_to_sentence,
                    sanitize, select_pairs)
from llmdep.cli import main
from llmdep.conll import Treebank

TOY = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "toy"

en, _ = read_conll_file(TOY / "en.conllu")
zh, _ = read_conll_file(TOY / "zh.conllu")

selection = select_pairs(en, zh, k=8)
for p in selection.pairs[:4]:
    print(p.id_a, p.id_b, round(p.score, 3))

template = PromptTemplate.from_file(TOY / "template.json")
config = LlmConfig.from_file(TOY / "config.json", offline=True)
cache = ResponseCache(TOY / "cache_noisy")

first = en.by_key()[selection.pairs[0].id_a]
prompt = render_prompt(template, first)
print(prompt)
raw = complete(config, prompt, cache, template=template)
print(raw)


def predict(gold):
    out = []
    for key, sentence in zip(gold.keys(), gold):
        answer = complete(config, render_prompt(template, sentence), cache, template=template)
        out.append(response_to_sentence(answer, key))
    return Treebank(out)


lexicon = load_lexicon(TOY / "lexicon.txt")
sub_en = en.subset(p.id_a for p in selection.pairs)
sub_zh = zh.subset(p.id_b for p in selection.pairs)
kept_en, rep_en = sanitize(predict(sub_en), sub_en, lexicon)
kept_zh, rep_zh = sanitize(predict(sub_zh), sub_zh, lexicon)
print(rep_en.to_dict()["per_class"], rep_zh.to_dict()["per_class"])

summary = consistency_summary(kept_en, kept_zh, selection)
print(summary.to_dict()["mean_score"], summary.to_dict()["mean_gold"], summary.ratio)

# The same run through the command line entry point, with every output
# and a run.json manifest written to one directory.
with tempfile.TemporaryDirectory() as out:
    main(["pipeline", str(TOY / "en.conllu"), str(TOY / "zh.conllu"),
          "--template", str(TOY / "template.json"), "--config", str(TOY / "config.json"),
          "--cache", str(TOY / "cache_noisy"), "--lexicon", str(TOY / "lexicon.txt"),
          "--offline", "--k", "8", "--out", out])
    print(sorted(p.name for p in Path(out).iterdir()))
