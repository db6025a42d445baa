"""Pick structurally similar sentence pairs from two treebanks and measure how
similar a parser's outputs stay on those pairs."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .conll import Treebank, validate
from .treedist import DepTree, DtedScore, LabelMode, build_tree, dted

GREEDY_POLICY = "greedy-one-to-one"
REPEAT_POLICY = "greedy-with-repeats"


@dataclass(frozen=True)
class ScoredPair:
    id_a: str
    id_b: str
    dted: DtedScore

    @property
    def score(self) -> float:
        return self.dted.score


@dataclass
class PairSelection:
    pairs: list[ScoredPair]
    k: int
    mode: LabelMode
    policy: str = GREEDY_POLICY
    warning: str | None = None

    def mean_score(self) -> float:
        return math.fsum(p.score for p in self.pairs) / len(self.pairs) if self.pairs else 0.0


def _trees(bank: Treebank, mode: LabelMode, side: str) -> list[tuple[str, DepTree]]:
    out = []
    for key, sentence in zip(bank.keys(), bank.sentences):
        if validate(sentence):
            raise ValueError(f"bank {side}: sentence {key!r} is not a valid tree")
        out.append((key, build_tree(sentence, mode)))
    return out


def select_pairs(bank_a: Treebank, bank_b: Treebank, k: int = 50,
                 mode: LabelMode = LabelMode.STRUCTURAL, length_window: int = 3,
                 allow_repeats: bool = False) -> PairSelection:
    """Greedy top-``k`` most similar pairs by DTED.

    Only pairs whose sentence lengths differ by at most ``length_window`` are
    scored.  Candidates are taken in order of (score desc, id_a, id_b) and,
    unless ``allow_repeats``, a sentence is used at most once on each side.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    trees_a = _trees(bank_a, mode, "a")
    trees_b = _trees(bank_b, mode, "b")
    candidates = []
    for id_a, ta in trees_a:
        for id_b, tb in trees_b:
            if abs(len(ta) - len(tb)) <= length_window:
                candidates.append(ScoredPair(id_a, id_b, dted(ta, tb)))
    candidates.sort(key=lambda p: (-p.score, p.id_a, p.id_b))

    chosen: list[ScoredPair] = []
    used_a: set[str] = set()
    used_b: set[str] = set()
    for pair in candidates:
        if len(chosen) == k:
            break
        if not allow_repeats and (pair.id_a in used_a or pair.id_b in used_b):
            continue
        chosen.append(pair)
        used_a.add(pair.id_a)
        used_b.add(pair.id_b)

    selection = PairSelection(chosen, k, mode, REPEAT_POLICY if allow_repeats else GREEDY_POLICY)
    if len(chosen) < k:
        selection.warning = f"only {len(chosen)} of {k} requested pairs available"
        warnings.warn(selection.warning, stacklevel=2)
    return selection


@dataclass
class ConsistencySummary:
    mean_score: float
    mean_gold: float
    ratio: float | None
    per_pair: list[tuple[str, str, DtedScore]] = field(default_factory=list)
    skipped: int = 0

    def to_dict(self) -> dict:
        return {
            "mean_score": round(self.mean_score, 6),
            "mean_gold": round(self.mean_gold, 6),
            "ratio": None if self.ratio is None else round(self.ratio, 6),
            "pairs_scored": len(self.per_pair),
            "skipped": self.skipped,
            "per_pair": [{"id_a": a, "id_b": b, **s.to_dict()} for a, b, s in self.per_pair],
        }


def consistency_summary(pred_a: Treebank, pred_b: Treebank, selection: PairSelection,
                        mode: LabelMode = LabelMode.STRUCTURAL) -> ConsistencySummary:
    """Mean DTED of the predicted trees over the gold-selected pairs.

    Pairs with a missing or non-tree prediction on either side are skipped.
    The gold mean (and so the ratio) is taken over the same surviving pairs.
    """
    lookup_a, lookup_b = pred_a.by_key(), pred_b.by_key()
    per_pair = []
    gold_scores = []
    skipped = 0
    for pair in selection.pairs:
        sa, sb = lookup_a.get(pair.id_a), lookup_b.get(pair.id_b)
        if sa is None or sb is None or validate(sa) or validate(sb):
            skipped += 1
            continue
        per_pair.append((pair.id_a, pair.id_b, dted(build_tree(sa, mode), build_tree(sb, mode))))
        gold_scores.append(pair.score)
    if not per_pair:
        raise ValueError("no selected pair has predictions on both sides")
    mean = math.fsum(s.score for _, _, s in per_pair) / len(per_pair)
    mean_gold = math.fsum(gold_scores) / len(gold_scores)
    ratio = mean / mean_gold if mean_gold > 0 else None
    return ConsistencySummary(mean, mean_gold, ratio, per_pair, skipped)


PAIR_COLUMNS = ["id_a", "id_b", "score", "edit_dist", "size_a", "size_b"]


def pairs_to_tsv(selection: PairSelection) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter="\t", lineterminator="\n")
    writer.writerow(PAIR_COLUMNS)
    for p in selection.pairs:
        d = p.dted
        writer.writerow([p.id_a, p.id_b, f"{d.score:.6f}", d.edit_dist, d.size_a, d.size_b])
    return buf.getvalue()


def pairs_from_tsv(text: str, mode: LabelMode = LabelMode.STRUCTURAL) -> PairSelection:
    rows = list(csv.DictReader(io.StringIO(text), delimiter="\t"))
    pairs = []
    for row in rows:
        ed, sa, sb = int(row["edit_dist"]), int(row["size_a"]), int(row["size_b"])
        # recomputed from the integer columns so no precision is lost to formatting
        score = max(0.0, 1.0 - ed / max(sa, sb)) if max(sa, sb) else 1.0
        pairs.append(ScoredPair(row["id_a"], row["id_b"], DtedScore(ed, sa, sb, score)))
    return PairSelection(pairs, len(pairs), mode)


def read_pairs(path: str | Path, mode: LabelMode = LabelMode.STRUCTURAL) -> PairSelection:
    return pairs_from_tsv(Path(path).read_text(encoding="utf-8"), mode)
