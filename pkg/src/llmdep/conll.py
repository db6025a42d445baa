"""Reading, writing and validating CoNLL-U / CoNLL-X dependency annotations.

Both dialects are normalized to a 10-field :class:`Token`.  Problems never
raise during reading; they are reported as :class:`Violation` records and,
in ``Mode.STRICT``, cause the offending sentence to be omitted.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

EMPTY = "_"

CONLLU_COLUMNS = 10
CONLLX_COLUMNS = 8

_RANGE_ID = re.compile(r"^\d+-\d+$")
_EMPTY_NODE_ID = re.compile(r"^\d+\.\d+$")
_SENT_ID = re.compile(r"^#\s*sent_id\s*=\s*(.*?)\s*$")


class Mode(enum.Enum):
    STRICT = "strict"
    LENIENT = "lenient"


class Dialect(enum.Enum):
    CONLLU = "conllu"
    CONLLX = "conllx"


class ViolationKind(enum.Enum):
    HEAD_OUT_OF_RANGE = "head_out_of_range"
    SELF_HEAD = "self_head"
    NO_ROOT = "no_root"
    MULTI_ROOT = "multi_root"
    CYCLE = "cycle"
    ID_GAP = "id_gap"
    COLUMN_COUNT = "column_count"
    NON_INTEGER_FIELD = "non_integer_field"
    # multiword ranges and empty nodes; informational, never drops a sentence
    SKIPPED_NODE = "skipped_node"


# kinds that make a row unusable as a CoNLL table row
FORMAT_KINDS = frozenset({ViolationKind.COLUMN_COUNT, ViolationKind.NON_INTEGER_FIELD})
INFORMATIONAL_KINDS = frozenset({ViolationKind.SKIPPED_NODE})


@dataclass(frozen=True)
class Violation:
    sentence_index: int
    kind: ViolationKind
    detail: str = ""

    def to_dict(self) -> dict:
        return {"sentence_index": self.sentence_index, "kind": self.kind.name, "detail": self.detail}


@dataclass(frozen=True)
class Token:
    id: int
    form: str
    lemma: str = EMPTY
    upos: str = EMPTY
    xpos: str = EMPTY
    feats: str = EMPTY
    head: int | None = 0
    deprel: str = EMPTY
    deps: str = EMPTY
    misc: str = EMPTY

    def columns(self) -> list[str]:
        head = EMPTY if self.head is None else str(self.head)
        return [str(self.id), self.form, self.lemma, self.upos, self.xpos,
                self.feats, head, self.deprel, self.deps, self.misc]


@dataclass
class Sentence:
    tokens: list[Token] = field(default_factory=list)
    comments: list[str] = field(default_factory=list)
    source_id: str | None = None
    dialect: Dialect = Dialect.CONLLU
    # violations recorded while reading (kept only in LENIENT mode)
    violations: list[Violation] = field(default_factory=list, compare=False)
    # raw multiword/empty-node rows, keyed by the token position they precede
    skipped: list[tuple[int, str]] = field(default_factory=list, compare=False)

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    @property
    def heads(self) -> list[int | None]:
        return [t.head for t in self.tokens]


@dataclass
class Treebank:
    sentences: list[Sentence] = field(default_factory=list)
    language_tag: str = ""
    name: str = ""

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)

    def keys(self) -> list[str]:
        """Identifier of every sentence, falling back to its 1-based position."""
        return [sentence_key(s, i) for i, s in enumerate(self.sentences)]

    def by_key(self) -> dict[str, Sentence]:
        return dict(zip(self.keys(), self.sentences))

    def subset(self, keys: Iterable[str]) -> "Treebank":
        """Sentences whose key is in ``keys``, in this treebank's order."""
        wanted = set(keys)
        kept = [s for k, s in zip(self.keys(), self.sentences) if k in wanted]
        return Treebank(kept, self.language_tag, self.name)


def sentence_key(sentence: Sentence, index: int) -> str:
    return sentence.source_id if sentence.source_id is not None else str(index + 1)


def normalize_deprel(label: str) -> str:
    """Case-fold the main relation; a ``:subtype`` suffix is kept verbatim."""
    label = label.strip()
    main, sep, sub = label.partition(":")
    return main.lower() + sep + sub


def _split_blocks(text: str) -> list[list[str]]:
    blocks: list[list[str]] = []
    current: list[str] = []
    for line in text.splitlines():
        if line.strip() == "":
            if current:
                blocks.append(current)
                current = []
        else:
            current.append(line.rstrip("\r"))
    if current:
        blocks.append(current)
    return blocks


def _parse_int(value: str) -> int | None:
    value = value.strip()
    if re.fullmatch(r"[+-]?\d+", value):
        return int(value)
    return None


def _parse_block(lines: list[str], index: int) -> tuple[Sentence, list[Violation]]:
    sentence = Sentence()
    found: list[Violation] = []
    widths: set[int] = set()

    def flag(kind: ViolationKind, detail: str) -> None:
        found.append(Violation(index, kind, detail))

    for line in lines:
        if line.startswith("#"):
            sentence.comments.append(line)
            match = _SENT_ID.match(line)
            if match:
                sentence.source_id = match.group(1)
            continue
        fields = line.split("\t")
        position = len(sentence.tokens) + 1
        if fields and (_RANGE_ID.match(fields[0]) or _EMPTY_NODE_ID.match(fields[0])):
            sentence.skipped.append((len(sentence.tokens), line))
            flag(ViolationKind.SKIPPED_NODE, f"row {fields[0]!r} is not a word-level token")
            continue
        if len(fields) not in (CONLLU_COLUMNS, CONLLX_COLUMNS):
            flag(ViolationKind.COLUMN_COUNT,
                 f"token {position}: {len(fields)} columns, expected 10 or 8")
        widths.add(len(fields))
        fields = (fields + [EMPTY] * CONLLU_COLUMNS)[:CONLLU_COLUMNS]
        token_id = _parse_int(fields[0])
        head = _parse_int(fields[6])
        if token_id is None:
            flag(ViolationKind.NON_INTEGER_FIELD, f"token {position}: id {fields[0]!r}")
            token_id = position
        if head is None:
            flag(ViolationKind.NON_INTEGER_FIELD, f"token {position}: head {fields[6]!r}")
        form = fields[1] if fields[1] != "" else EMPTY
        sentence.tokens.append(Token(token_id, form, *fields[2:6], head, *fields[7:10]))

    if widths == {CONLLX_COLUMNS}:
        sentence.dialect = Dialect.CONLLX
    if not sentence.tokens:
        flag(ViolationKind.COLUMN_COUNT, "block has no token rows")
    else:
        found.extend(validate(sentence, index))
    return sentence, found


def read_conll(text: str, mode: Mode = Mode.STRICT, *, language_tag: str = "",
               name: str = "") -> tuple[Treebank, list[Violation]]:
    """Parse CoNLL text into a treebank plus every violation encountered.

    In STRICT mode a sentence with any non-informational violation is left
    out of the treebank. In LENIENT mode it is kept, with its violations
    attached to ``Sentence.violations``, so that downstream filtering can
    classify it.
    """
    bank = Treebank(language_tag=language_tag, name=name)
    violations: list[Violation] = []
    for index, lines in enumerate(_split_blocks(text)):
        sentence, found = _parse_block(lines, index)
        violations.extend(found)
        fatal = [v for v in found if v.kind not in INFORMATIONAL_KINDS]
        if mode is Mode.STRICT and fatal:
            continue
        sentence.violations = found
        bank.sentences.append(sentence)
    return bank, violations


def read_conll_file(path: str | Path, mode: Mode = Mode.STRICT,
                    **kwargs) -> tuple[Treebank, list[Violation]]:
    path = Path(path)
    kwargs.setdefault("name", path.stem)
    return read_conll(path.read_text(encoding="utf-8"), mode, **kwargs)


def write_conll(treebank: Treebank) -> str:
    """Serialize to 10-column rows, one blank line after each sentence."""
    out: list[str] = []
    for sentence in treebank.sentences:
        out.extend(sentence.comments)
        if sentence.source_id is not None and not any(_SENT_ID.match(c) for c in sentence.comments):
            out.insert(len(out) - len(sentence.comments), f"# sent_id = {sentence.source_id}")
        skipped = sorted(sentence.skipped, key=lambda item: item[0])
        for position, token in enumerate(sentence.tokens):
            while skipped and skipped[0][0] == position:
                out.append(skipped.pop(0)[1])
            if not token.form or any(c in token.form for c in "\t\n\r"):
                raise ValueError(f"token {token.id}: form {token.form!r} is empty or "
                                 "contains a tab or newline")
            out.append("\t".join(token.columns()))
        out.extend(line for _, line in skipped)
        out.append("")
    return "\n".join(out) + ("\n" if out else "")


def write_conll_file(treebank: Treebank, path: str | Path) -> None:
    Path(path).write_text(write_conll(treebank), encoding="utf-8")


def _cycle_members(heads: list[int | None]) -> set[int]:
    """1-based ids whose head chain loops without reaching 0."""
    n = len(heads)
    state = [0] * (n + 1)  # 0 unseen, 1 on current path, 2 done
    in_cycle: set[int] = set()
    for start in range(1, n + 1):
        path: list[int] = []
        node = start
        while 1 <= node <= n and state[node] == 0:
            state[node] = 1
            path.append(node)
            nxt = heads[node - 1]
            node = nxt if nxt is not None else -1
        if 1 <= node <= n and state[node] == 1:
            in_cycle.update(path[path.index(node):])
        for p in path:
            state[p] = 2
    return in_cycle


def validate(sentence: Sentence, sentence_index: int = 0) -> list[Violation]:
    """Every tree-shape violation of ``sentence``; [] means a single rooted tree."""
    found: list[Violation] = []
    tokens = sentence.tokens
    n = len(tokens)

    def flag(kind: ViolationKind, detail: str) -> None:
        found.append(Violation(sentence_index, kind, detail))

    ids = [t.id for t in tokens]
    if ids != list(range(1, n + 1)):
        flag(ViolationKind.ID_GAP, f"ids {ids} are not 1..{n}")

    heads: list[int | None] = []
    for position, token in enumerate(tokens, start=1):
        head = token.head
        if head is None:
            heads.append(None)
            continue
        if head == position:
            flag(ViolationKind.SELF_HEAD, f"token {position} heads itself")
        elif not 0 <= head <= n:
            flag(ViolationKind.HEAD_OUT_OF_RANGE, f"token {position}: head {head} not in [0, {n}]")
            heads.append(None)
            continue
        heads.append(head)

    roots = [i for i, h in enumerate(heads, start=1) if h == 0]
    if n and not roots:
        flag(ViolationKind.NO_ROOT, "no token has head 0")
    elif len(roots) > 1:
        flag(ViolationKind.MULTI_ROOT, f"tokens {roots} all have head 0")

    # self-heads are reported on their own; they are not counted again as cycles
    chain = [None if h == i else h for i, h in enumerate(heads, start=1)]
    looped = _cycle_members(chain)
    if looped:
        flag(ViolationKind.CYCLE, f"tokens {sorted(looped)} form a cycle")
    return found


def is_tree(sentence: Sentence) -> bool:
    return not validate(sentence)
