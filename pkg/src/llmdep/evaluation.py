"""Attachment scores, label confusion and root error statistics."""

from __future__ import annotations

import enum
import unicodedata
from collections import Counter
from dataclasses import dataclass, field

from .conll import EMPTY, Sentence, Token, Treebank, normalize_deprel

NOMINAL_UPOS = frozenset({"NOUN", "PROPN", "PRON"})
VERBAL_UPOS = frozenset({"VERB", "AUX"})


class AlignmentError(ValueError):
    """Predicted and gold treebanks do not pair up token for token."""


def is_punct(gold_token: Token) -> bool:
    if gold_token.upos not in ("", EMPTY):
        return gold_token.upos == "PUNCT"
    return normalize_deprel(gold_token.deprel) == "punct"


def _nfc(forms: list[str]) -> list[str]:
    return [unicodedata.normalize("NFC", f) for f in forms]


def check_aligned(predicted: Treebank, gold: Treebank) -> None:
    if len(predicted) != len(gold):
        raise AlignmentError(
            f"{len(predicted)} predicted sentences vs {len(gold)} gold sentences")
    for index, (p, g) in enumerate(zip(predicted, gold)):
        if _nfc(p.forms) != _nfc(g.forms):
            raise AlignmentError(
                f"sentence {index} ({g.source_id!r}): predicted forms differ from gold "
                f"({len(p)} vs {len(g)} tokens); run sanitize first")


def _token_pairs(predicted: Treebank, gold: Treebank, exclude_punct: bool):
    for p_sent, g_sent in zip(predicted, gold):
        for p_tok, g_tok in zip(p_sent.tokens, g_sent.tokens):
            if exclude_punct and is_punct(g_tok):
                continue
            yield p_tok, g_tok


@dataclass(frozen=True)
class EvalReport:
    token_total: int
    uas_correct: int
    las_correct: int
    punctuation_excluded: bool

    @property
    def uas(self) -> float:
        return 100.0 * self.uas_correct / self.token_total

    @property
    def las(self) -> float:
        return 100.0 * self.las_correct / self.token_total

    def to_dict(self) -> dict:
        return {
            "token_total": self.token_total,
            "uas_correct": self.uas_correct,
            "las_correct": self.las_correct,
            "uas": round(self.uas, 4),
            "las": round(self.las, 4),
            "punctuation_excluded": self.punctuation_excluded,
        }


def score(predicted: Treebank, gold: Treebank, exclude_punct: bool = True) -> EvalReport:
    """UAS/LAS of ``predicted`` against ``gold``.

    Both treebanks must already be aligned sentence for sentence with equal
    forms; punctuation is identified from the gold side.
    """
    check_aligned(predicted, gold)
    total = uas = las = 0
    for p_tok, g_tok in _token_pairs(predicted, gold, exclude_punct):
        total += 1
        if p_tok.head == g_tok.head:
            uas += 1
            if normalize_deprel(p_tok.deprel) == normalize_deprel(g_tok.deprel):
                las += 1
    if total == 0:
        raise ValueError("no scorable tokens")
    return EvalReport(total, uas, las, exclude_punct)


@dataclass(frozen=True)
class ConfusionEntry:
    gold_label: str
    predicted_label: str
    count: int


def label_confusion(predicted: Treebank, gold: Treebank, top_k: int | None = 10, *,
                    correct_heads_only: bool = True,
                    exclude_punct: bool = False) -> list[ConfusionEntry]:
    """Most frequent (gold label, predicted label) disagreements.

    By default only tokens whose head was predicted correctly are counted,
    which isolates labeling disagreement from attachment errors.
    """
    check_aligned(predicted, gold)
    counts: Counter[tuple[str, str]] = Counter()
    for p_tok, g_tok in _token_pairs(predicted, gold, exclude_punct):
        if correct_heads_only and p_tok.head != g_tok.head:
            continue
        g_lab, p_lab = normalize_deprel(g_tok.deprel), normalize_deprel(p_tok.deprel)
        if g_lab != p_lab:
            counts[g_lab, p_lab] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    if top_k is not None:
        ranked = ranked[:top_k]
    return [ConfusionEntry(g, p, n) for (g, p), n in ranked]


class RootCategory(enum.Enum):
    CORRECT = "correct"
    PUNCT_ROOT = "punct_root"
    NOUN_ROOT_FOR_VERB = "noun_root_for_verb"
    OTHER_MISMATCH = "other_mismatch"
    NO_ROOT = "no_root"
    MULTI_ROOT = "multi_root"


@dataclass
class RootReport:
    per_category: dict[RootCategory, int] = field(
        default_factory=lambda: {c: 0 for c in RootCategory})
    per_sentence: list[tuple[str, RootCategory]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "per_category": {c.name: n for c, n in self.per_category.items()},
            "sentences": [{"source_id": sid, "category": c.name} for sid, c in self.per_sentence],
        }


def classify_root(predicted: Sentence, gold: Sentence) -> RootCategory:
    roots = [i for i, t in enumerate(predicted.tokens) if t.head == 0]
    if not roots:
        return RootCategory.NO_ROOT
    if len(roots) > 1:
        return RootCategory.MULTI_ROOT
    pred_root = roots[0]
    gold_roots = [i for i, t in enumerate(gold.tokens) if t.head == 0]
    if gold_roots == [pred_root]:
        return RootCategory.CORRECT
    token = gold.tokens[pred_root]
    if is_punct(token):
        return RootCategory.PUNCT_ROOT
    if (len(gold_roots) == 1 and token.upos in NOMINAL_UPOS
            and gold.tokens[gold_roots[0]].upos in VERBAL_UPOS):
        return RootCategory.NOUN_ROOT_FOR_VERB
    return RootCategory.OTHER_MISMATCH


def root_analysis(predicted: Treebank, gold: Treebank) -> RootReport:
    check_aligned(predicted, gold)
    report = RootReport()
    for key, p_sent, g_sent in zip(gold.keys(), predicted, gold):
        category = classify_root(p_sent, g_sent)
        report.per_category[category] += 1
        report.per_sentence.append((key, category))
    return report


def format_table(report: EvalReport, confusion: list[ConfusionEntry] | None = None,
                 roots: RootReport | None = None) -> str:
    lines = [
        f"UAS {report.uas:.2f} / LAS {report.las:.2f}",
        f"tokens {report.token_total}, heads correct {report.uas_correct}, "
        f"labeled correct {report.las_correct}",
    ]
    if confusion:
        lines.append("")
        lines.append(f"{'gold':<16}{'predicted':<16}count")
        lines.extend(f"{e.gold_label:<16}{e.predicted_label:<16}{e.count}" for e in confusion)
    if roots is not None:
        lines.append("")
        lines.extend(f"{c.name:<20}{n}" for c, n in roots.per_category.items())
    return "\n".join(lines) + "\n"
