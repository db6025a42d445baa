"""Prompt an LLM for CoNLL parses through a cached chat-completions client.

Responses are cached on disk, one JSON file per request digest, so a run can
be replayed offline.  The HTTP layer is a plain callable (see
:func:`urllib_transport`) and can be swapped out in tests.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import tempfile
import threading
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

from .conll import Mode, Sentence, Violation, ViolationKind, read_conll

log = logging.getLogger(__name__)

PLACEHOLDER = "{sentence}"

# (url, headers, body, timeout) -> (status code, response text)
Transport = Callable[[str, dict, bytes, float], tuple[int, str]]


class LlmError(RuntimeError):
    pass


class CacheMiss(LlmError):
    """Offline mode was asked for a response that is not cached."""


class HttpClientError(LlmError):
    """The endpoint rejected the request (4xx); retrying would not help."""

    def __init__(self, status: int, body: str):
        super().__init__(f"HTTP {status}: {body[:200]}")
        self.status = status
        self.body = body


class TransportError(LlmError):
    """All attempts failed; ``attempts`` holds one message per try."""

    def __init__(self, attempts: list[str]):
        super().__init__(f"request failed after {len(attempts)} attempts: {attempts[-1]}")
        self.attempts = attempts


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    instruction_text: str
    dialect: str = "conllu"
    version: str = "1"
    system_text: str | None = None

    @classmethod
    def from_file(cls, path: str | Path) -> "PromptTemplate":
        return cls(**json.loads(Path(path).read_text(encoding="utf-8")))

    @property
    def cache_tag(self) -> str:
        return f"{self.template_id}@{self.version}"


def render_prompt(template: PromptTemplate, sentence: Sentence) -> str:
    """Fill the template with the gold tokens joined by single spaces.

    The words are never re-tokenized or concatenated, so the model sees the
    corpus segmentation as is.
    """
    if PLACEHOLDER not in template.instruction_text:
        raise ValueError(f"template {template.template_id!r} has no {PLACEHOLDER} placeholder")
    if not sentence.tokens:
        raise ValueError("cannot render a prompt for an empty sentence")
    return template.instruction_text.replace(PLACEHOLDER, " ".join(sentence.forms))


@dataclass(frozen=True)
class LlmConfig:
    endpoint_url: str = "https://api.openai.com/v1/chat/completions"
    model_name: str = "gpt-3.5-turbo"
    temperature: float = 0.0
    max_retries: int = 3
    timeout: float = 60.0
    api_key_env: str = "OPENAI_API_KEY"
    offline: bool = False
    backoff: float = 1.0
    parallelism: int = 4

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "LlmConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        data.update(overrides)
        return cls(**data)


@dataclass
class CacheEntry:
    key: str
    raw_response: str
    timestamp: str
    request_metadata: dict = field(default_factory=dict)


def cache_key(model_name: str, template_tag: str, prompt: str) -> str:
    blob = json.dumps([model_name, template_tag, prompt], ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class ResponseCache:
    """Directory of ``<digest>.json`` files; in-memory when ``root`` is None."""

    def __init__(self, root: str | Path | None = None):
        self.root = Path(root) if root is not None else None
        self._memory: dict[str, CacheEntry] = {}
        self._lock = threading.Lock()
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)

    def get(self, key: str) -> CacheEntry | None:
        with self._lock:
            if key in self._memory:
                return self._memory[key]
            if self.root is None:
                return None
            path = self.root / f"{key}.json"
            if not path.exists():
                return None
            entry = CacheEntry(**json.loads(path.read_text(encoding="utf-8")))
            self._memory[key] = entry
            return entry

    def put(self, entry: CacheEntry) -> None:
        with self._lock:
            if self.root is not None:
                payload = json.dumps(asdict(entry), ensure_ascii=False, indent=2) + "\n"
                fd, tmp = tempfile.mkstemp(dir=self.root, suffix=".tmp")
                with os.fdopen(fd, "w", encoding="utf-8") as fh:
                    fh.write(payload)
                os.replace(tmp, self.root / f"{entry.key}.json")
            self._memory[entry.key] = entry

    def __contains__(self, key: str) -> bool:
        return self.get(key) is not None


def urllib_transport(url: str, headers: dict, body: bytes, timeout: float) -> tuple[int, str]:
    request = urllib.request.Request(url, data=body, headers=headers, method="POST")
    try:
        with urllib.request.urlopen(request, timeout=timeout) as response:
            return response.status, response.read().decode("utf-8")
    except urllib.error.HTTPError as exc:
        return exc.code, exc.read().decode("utf-8", "replace")


def build_messages(prompt: str, system: str | None = None) -> list[dict]:
    messages = [{"role": "system", "content": system}] if system else []
    messages.append({"role": "user", "content": prompt})
    return messages


def complete(config: LlmConfig, prompt: str, cache: ResponseCache, *,
             template: PromptTemplate | None = None,
             transport: Transport = urllib_transport,
             sleep: Callable[[float], None] = time.sleep) -> str:
    """Cache-first completion of a single prompt.

    Server errors and network failures are retried ``config.max_retries``
    times with exponential backoff; 4xx responses are not retried.  The
    cache is written only after a successful response.
    """
    tag = template.cache_tag if template else ""
    system = template.system_text if template else None
    key = cache_key(config.model_name, tag, prompt if system is None else f"{system}\n\n{prompt}")
    hit = cache.get(key)
    if hit is not None:
        return hit.raw_response
    if config.offline:
        raise CacheMiss(f"no cached response for key {key}")

    api_key = os.environ.get(config.api_key_env)
    if not api_key:
        raise LlmError(f"environment variable {config.api_key_env} is not set")
    payload = {
        "model": config.model_name,
        "messages": build_messages(prompt, system),
        "temperature": config.temperature,
    }
    body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
    headers = {"Content-Type": "application/json", "Authorization": f"Bearer {api_key}"}

    attempts: list[str] = []
    for attempt in range(config.max_retries + 1):
        if attempt:
            sleep(config.backoff * 2 ** (attempt - 1))
        try:
            status, text = transport(config.endpoint_url, headers, body, config.timeout)
        except OSError as exc:
            attempts.append(f"attempt {attempt + 1}: {exc!r}")
            log.warning("LLM request failed: %s", attempts[-1])
            continue
        if 400 <= status < 500:
            raise HttpClientError(status, text)
        if status >= 500:
            attempts.append(f"attempt {attempt + 1}: HTTP {status}")
            log.warning("LLM request failed: %s", attempts[-1])
            continue
        try:
            content = json.loads(text)["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            attempts.append(f"attempt {attempt + 1}: malformed response ({exc!r})")
            continue
        cache.put(CacheEntry(
            key, content, datetime.now(timezone.utc).isoformat(timespec="seconds"),
            {"model": config.model_name, "template": tag, "temperature": config.temperature},
        ))
        return content
    raise TransportError(attempts)


def complete_many(config: LlmConfig, prompts: Sequence[str], cache: ResponseCache, *,
                  template: PromptTemplate | None = None,
                  transport: Transport = urllib_transport) -> list[str | LlmError]:
    """Complete prompts concurrently; results follow input order.

    A failed prompt yields its exception in place of the response so one
    failure does not discard the rest of the batch.
    """
    def one(prompt: str) -> str | LlmError:
        try:
            return complete(config, prompt, cache, template=template, transport=transport)
        except LlmError as exc:
            return exc

    with ThreadPoolExecutor(max_workers=max(1, config.parallelism)) as pool:
        return list(pool.map(one, prompts))


_FENCE = re.compile(r"^\s*(```|~~~)")
_MULTISPACE = re.compile(r" {2,}")
MIN_FIELDS = 7
ROW_SHARE = 0.8


def _row_fields(line: str) -> list[str] | None:
    stripped = line.strip()
    if not stripped:
        return None
    fields = stripped.split("\t") if "\t" in stripped else _MULTISPACE.split(stripped)
    fields = [f.strip() for f in fields]
    if len(fields) < MIN_FIELDS or not re.fullmatch(r"\d+", fields[0]):
        return None
    return fields


def _finish(run: list[tuple[str, list[str] | None]], blocks: list[str]) -> None:
    while run and run[-1][1] is None:
        run.pop()
    if not run:
        return
    rows = sum(1 for _, f in run if f is not None)
    if rows / len(run) >= ROW_SHARE:
        blocks.append("\n".join("\t".join(f) if f else line for line, f in run))
    else:
        # too noisy as a whole; keep its clean stretches
        stretch: list[tuple[str, list[str] | None]] = []
        for item in run + [("", None)]:
            if item[1] is not None:
                stretch.append(item)
            elif stretch:
                _finish(stretch, blocks)
                stretch = []


def extract_conll(raw: str) -> list[str]:
    """Pull CoNLL tables out of a chatty model response.

    A table is a run of lines of which at least 80% look like token rows
    (7+ fields separated by tabs or by runs of spaces, integer first field).
    Runs end at blank lines and code fences, and a row numbered 1 starts a
    new table.  Rows are returned tab-separated.
    """
    blocks: list[str] = []
    run: list[tuple[str, list[str] | None]] = []
    for line in raw.splitlines():
        if _FENCE.match(line) or not line.strip():
            _finish(run, blocks)
            run = []
            continue
        fields = _row_fields(line)
        if fields is not None and fields[0] == "1" and any(f for _, f in run):
            _finish(run, blocks)
            run = []
        if fields is None and not any(f for _, f in run):
            continue  # prose before a table
        if fields is None and line.lstrip().startswith("#"):
            continue
        run.append((line, fields))
    _finish(run, blocks)
    return blocks


def response_to_sentence(raw: str, source_id: str | None = None) -> Sentence:
    """Read every extracted table of one response as a single predicted sentence.

    Several tables are concatenated, so duplicated outputs surface as a
    repeated word sequence.  A response without any table becomes an empty
    sentence carrying a COLUMN_COUNT violation.
    """
    blocks = extract_conll(raw)
    if not blocks:
        return Sentence(source_id=source_id,
                        violations=[Violation(0, ViolationKind.COLUMN_COUNT,
                                              "no CoNLL table in response")])
    bank, _ = read_conll("\n".join(blocks) + "\n", Mode.LENIENT)
    sentence = bank.sentences[0]
    sentence.source_id = source_id
    return sentence


def prediction_block(raw: str, source_id: str) -> str:
    """CoNLL text for one response: a ``sent_id`` comment plus the raw extracted rows.

    Rows are written as extracted (not re-serialized) so format problems
    survive into the predictions file and are seen again on reading.
    """
    lines = [f"# sent_id = {source_id}"]
    lines.extend(extract_conll(raw))
    return "\n".join(lines) + "\n\n"
