"""Filter predicted parses whose words cannot be aligned with the gold tokens.

Every predicted sentence receives exactly one :class:`DefectClass`.  The
classes overlap in principle (a duplicated output can also be scrambled), so
:func:`align_forms` applies them in a fixed precedence order.
"""

from __future__ import annotations

import enum
import json
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .conll import FORMAT_KINDS, Sentence, Treebank


class DefectClass(enum.Enum):
    FORMAT_DISRUPTION = "format_disruption"
    MULTIPLE_OUTPUTS = "multiple_outputs"
    WORD_OMISSION = "word_omission"
    WORD_FILTERING = "word_filtering"
    SEGMENTATION_DISRUPTION = "segmentation_disruption"
    WORD_SCRAMBLING = "word_scrambling"
    ALIGNED = "aligned"


def _nfc(forms: Iterable[str]) -> list[str]:
    return [unicodedata.normalize("NFC", f) for f in forms]


def _count_copies(seq: list[str], block: list[str]) -> int:
    """Non-overlapping occurrences of ``block`` in ``seq``, scanning left to right."""
    if not block:
        return 0
    count, i, width = 0, 0, len(block)
    while i + width <= len(seq):
        if seq[i:i + width] == block:
            count += 1
            i += width
        else:
            i += 1
    return count


def _is_subsequence(short: list[str], long: list[str]) -> bool:
    it = iter(long)
    return all(any(x == y for y in it) for x in short)


def align_forms(predicted: Sentence, gold: Sentence,
                sensitive_lexicon: Iterable[str] = ()) -> DefectClass:
    """Classify how ``predicted`` fails (or succeeds) to align with ``gold``."""
    if any(v.kind in FORMAT_KINDS for v in predicted.violations):
        return DefectClass.FORMAT_DISRUPTION
    pred = _nfc(predicted.forms)
    ref = _nfc(gold.forms)
    if _count_copies(pred, ref) >= 2:
        return DefectClass.MULTIPLE_OUTPUTS
    if pred == ref:
        return DefectClass.ALIGNED
    if "".join(pred) == "".join(ref):
        return DefectClass.SEGMENTATION_DISRUPTION
    if len(pred) < len(ref) and _is_subsequence(pred, ref):
        missing = Counter(ref) - Counter(pred)
        lexicon = set(_nfc(sensitive_lexicon))
        if lexicon and all(form in lexicon for form in missing):
            return DefectClass.WORD_FILTERING
        return DefectClass.WORD_OMISSION
    if Counter(pred) == Counter(ref):
        return DefectClass.WORD_SCRAMBLING
    return DefectClass.FORMAT_DISRUPTION


@dataclass
class SanitizeReport:
    per_sentence: list[tuple[str, DefectClass]] = field(default_factory=list)
    retained: int = 0
    dropped: int = 0
    per_class_counts: dict[DefectClass, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        order = list(DefectClass)
        per_class = {c.name: self.per_class_counts[c]
                     for c in order if self.per_class_counts.get(c)}
        return {
            "retained": self.retained,
            "dropped": self.dropped,
            "per_class": per_class,
            "sentences": [{"source_id": sid, "class": c.name} for sid, c in self.per_sentence],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"


def sanitize(predicted: Treebank, gold: Treebank,
             sensitive_lexicon: Iterable[str] = (),
             keep: Iterable[DefectClass] = ()) -> tuple[Treebank, SanitizeReport]:
    """Keep the predictions that align with gold, in gold order.

    Predictions and gold sentences are matched by ``source_id`` (positional
    key when absent).  A gold sentence without a prediction is reported as a
    WORD_OMISSION against an empty prediction.  Several predictions sharing
    one id are all MULTIPLE_OUTPUTS, and a prediction whose id is not in gold
    is a FORMAT_DISRUPTION.  Classes in ``keep`` are retained alongside
    ALIGNED.
    """
    gold_keys = gold.keys()
    dupes = [k for k, n in Counter(gold_keys).items() if n > 1]
    if dupes:
        raise ValueError(f"duplicate source_id in gold treebank: {sorted(dupes)}")
    lexicon = list(sensitive_lexicon)
    keep_set = set(keep) | {DefectClass.ALIGNED}

    by_key: dict[str, list[Sentence]] = {}
    for key, sentence in zip(predicted.keys(), predicted.sentences):
        by_key.setdefault(key, []).append(sentence)

    report = SanitizeReport()
    kept: list[Sentence] = []

    def record(key: str, cls: DefectClass, sentence: Sentence | None) -> None:
        report.per_sentence.append((key, cls))
        report.per_class_counts[cls] = report.per_class_counts.get(cls, 0) + 1
        if cls in keep_set and sentence is not None:
            report.retained += 1
            kept.append(sentence)
        else:
            report.dropped += 1

    for key, gold_sentence in zip(gold_keys, gold.sentences):
        candidates = by_key.pop(key, [])
        if not candidates:
            record(key, DefectClass.WORD_OMISSION, None)
        elif len(candidates) > 1:
            for sentence in candidates:
                record(key, DefectClass.MULTIPLE_OUTPUTS, sentence)
        else:
            record(key, align_forms(candidates[0], gold_sentence, lexicon), candidates[0])
    for key, leftovers in by_key.items():
        for sentence in leftovers:
            record(key, DefectClass.FORMAT_DISRUPTION, sentence)

    return Treebank(kept, predicted.language_tag, predicted.name), report


def load_lexicon(path: str | Path) -> set[str]:
    """Newline-separated UTF-8 word list; blank lines are ignored."""
    text = Path(path).read_text(encoding="utf-8")
    return {line.strip() for line in text.splitlines() if line.strip()}
