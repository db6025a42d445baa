"""Ordered tree edit distance and the DTED similarity between dependency trees.

Trees are word-ordered: a node's children are sorted by token index.  The
distance uses unit costs for insertion, deletion and relabeling and is
computed with the Zhang-Shasha keyroot dynamic program.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from .conll import Sentence, normalize_deprel, validate

ROOT_LABEL = "<ROOT>"
STRUCTURAL_LABEL = "*"


class LabelMode(enum.Enum):
    STRUCTURAL = "structural"
    DEPREL = "deprel"
    FORM = "form"


@dataclass(frozen=True)
class DepTree:
    """Rooted ordered tree; node 0 is the synthetic root.

    ``parents[k]`` is the parent of node ``k`` (``-1`` for the root) and
    ``labels[k]`` its label.  Node order is token order.
    """

    labels: tuple[str, ...]
    parents: tuple[int, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.parents) or not self.labels:
            raise ValueError("labels and parents must be non-empty and of equal length")
        if self.parents[0] != -1:
            raise ValueError("node 0 must be the root")
        n = len(self.parents)
        for node in range(1, n):
            seen = 0
            cur = node
            while cur != 0:
                cur = self.parents[cur]
                seen += 1
                if not 0 <= cur < n or seen > n:
                    raise ValueError(f"node {node} does not reach the root")

    def __len__(self) -> int:
        return len(self.labels)

    @classmethod
    def from_parents(cls, parents: Sequence[int], labels: Sequence[str] | None = None) -> "DepTree":
        """Build from a parent array of the non-root nodes (1-based, 0 = root)."""
        if labels is None:
            labels = [STRUCTURAL_LABEL] * len(parents)
        return cls((ROOT_LABEL, *labels), (-1, *parents))

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in self.parents]
        for node, parent in enumerate(self.parents):
            if parent >= 0:
                kids[parent].append(node)
        return tuple(tuple(k) for k in kids)

    def postorder(self) -> list[int]:
        order: list[int] = []
        stack = [(0, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            stack.append((node, True))
            for child in reversed(self.children[node]):
                stack.append((child, False))
        return order

    def depth(self) -> int:
        best = 0
        for node in range(len(self)):
            d, cur = 0, node
            while cur != 0:
                cur = self.parents[cur]
                d += 1
            best = max(best, d)
        return best


def build_tree(sentence: Sentence, mode: LabelMode = LabelMode.STRUCTURAL) -> DepTree:
    """Dependency tree of a valid sentence, labeled according to ``mode``."""
    problems = validate(sentence)
    if problems:
        kinds = ", ".join(sorted({v.kind.name for v in problems}))
        raise ValueError(f"sentence {sentence.source_id!r} is not a tree: {kinds}")
    if mode is LabelMode.STRUCTURAL:
        labels = [STRUCTURAL_LABEL] * len(sentence.tokens)
    elif mode is LabelMode.DEPREL:
        labels = [normalize_deprel(t.deprel) for t in sentence.tokens]
    else:
        labels = [t.form for t in sentence.tokens]
    return DepTree.from_parents([t.head for t in sentence.tokens], labels)


def _annotate(tree: DepTree):
    """Postorder labels, leftmost-leaf indices and keyroots (all 1-based)."""
    order = tree.postorder()
    rank = {node: i for i, node in enumerate(order, start=1)}
    labels = [None] + [tree.labels[node] for node in order]
    leftmost = [0] * (len(order) + 1)
    for node in order:
        cur = node
        while tree.children[cur]:
            cur = tree.children[cur][0]
        leftmost[rank[node]] = rank[cur]
    highest: dict[int, int] = {}
    for i in range(1, len(order) + 1):
        highest[leftmost[i]] = i
    keyroots = sorted(highest.values())
    return labels, leftmost, keyroots


def edit_distance(a: DepTree, b: DepTree) -> int:
    """Minimum number of unit-cost node edits turning ``a`` into ``b``."""
    la, lla, kra = _annotate(a)
    lb, llb, krb = _annotate(b)
    na, nb = len(a), len(b)
    td = [[0] * (nb + 1) for _ in range(na + 1)]

    for i in kra:
        li = lla[i]
        for j in krb:
            lj = llb[j]
            rows, cols = i - li + 2, j - lj + 2
            fd = [[0] * cols for _ in range(rows)]
            for x in range(1, rows):
                fd[x][0] = fd[x - 1][0] + 1
            for y in range(1, cols):
                fd[0][y] = fd[0][y - 1] + 1
            for x in range(1, rows):
                i1 = li + x - 1
                for y in range(1, cols):
                    j1 = lj + y - 1
                    delete = fd[x - 1][y] + 1
                    insert = fd[x][y - 1] + 1
                    if lla[i1] == li and llb[j1] == lj:
                        relabel = fd[x - 1][y - 1] + (la[i1] != lb[j1])
                        fd[x][y] = td[i1][j1] = min(delete, insert, relabel)
                    else:
                        # forest match: the subtree pair at (i1, j1) is already solved
                        match = fd[lla[i1] - li][llb[j1] - lj] + td[i1][j1]
                        fd[x][y] = min(delete, insert, match)
    return td[na][nb]


@dataclass(frozen=True)
class DtedScore:
    edit_dist: int
    size_a: int
    size_b: int
    score: float

    @property
    def raw(self) -> float:
        """Unclamped ``1 - edit_dist / max(size_a, size_b)``; negative for very unlike trees."""
        return 1.0 - self.edit_dist / max(self.size_a, self.size_b)

    def to_dict(self) -> dict:
        return {"edit_dist": self.edit_dist, "size_a": self.size_a,
                "size_b": self.size_b, "score": self.score}


def dted(a: DepTree, b: DepTree, *, count_root: bool = True) -> DtedScore:
    """DTED similarity ``1 - EditDist / max(|a|, |b|)``, clamped to [0, 1].

    Tree sizes include the synthetic root unless ``count_root`` is False.
    The clamp only applies when the edit distance exceeds the larger tree,
    e.g. a long chain against a flat star.
    """
    dist = edit_distance(a, b)
    offset = 0 if count_root else 1
    size_a, size_b = len(a) - offset, len(b) - offset
    denom = max(size_a, size_b)
    if denom == 0:
        return DtedScore(dist, size_a, size_b, 1.0)
    return DtedScore(dist, size_a, size_b, max(0.0, 1.0 - dist / denom))


def sentence_dted(a: Sentence, b: Sentence, mode: LabelMode = LabelMode.STRUCTURAL) -> DtedScore:
    return dted(build_tree(a, mode), build_tree(b, mode))
