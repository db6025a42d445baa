"""Command-line entry point: ``llmdep <command> ... --out DIR``.

Every command writes its outputs plus a ``run.json`` manifest into ``--out``
and nowhere else.  Exit codes: 0 success, 1 input or contract error,
2 transport error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import tempfile
import warnings
from pathlib import Path

from . import __version__
from .conll import Mode, Treebank, read_conll, read_conll_file, write_conll
from .crosslingual import consistency_summary, pairs_to_tsv, select_pairs
from .evaluation import AlignmentError, format_table, label_confusion, root_analysis, score
from .harness import (CacheMiss, HttpClientError, LlmConfig, LlmError, PromptTemplate,
                      ResponseCache, TransportError, complete_many, prediction_block,
                      render_prompt, urllib_transport)
from .sanitize import DefectClass, load_lexicon, sanitize
from .treedist import LabelMode, sentence_dted

log = logging.getLogger("llmdep")

PUNCT_PROFILES = {"ptb": True, "ctb": True, "ud": False}


class InputError(Exception):
    pass


def _digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _dump(data) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


class Run:
    """Collects the outputs of one command and writes its manifest."""

    def __init__(self, command: str, out: str):
        self.command = command
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.inputs: dict[str, str] = {}
        self.configs: dict[str, str] = {}
        self.outputs: list[str] = []

    def input(self, path: str | None, kind: str = "inputs") -> str | None:
        if path is None:
            return None
        if not Path(path).is_file():
            raise InputError(f"no such file: {path}")
        target = self.configs if kind == "config" else self.inputs
        target[Path(path).name] = _digest(path)
        return path

    def write(self, name: str, text: str) -> None:
        _atomic_write(self.out / name, text)
        self.outputs.append(name)

    def finish(self) -> None:
        manifest = {
            "command": self.command,
            "tool_version": __version__,
            "inputs": self.inputs,
            "configs": self.configs,
            "outputs": self.outputs,
        }
        _atomic_write(self.out / "run.json", _dump(manifest))


def _read(path: str, mode: Mode = Mode.STRICT) -> Treebank:
    bank, violations = read_conll_file(path, mode)
    dropped = {v.sentence_index for v in violations if v.kind.name != "SKIPPED_NODE"}
    if mode is Mode.STRICT and dropped:
        log.warning("%s: %d sentence(s) dropped for violations", path, len(dropped))
    return bank


def _emit(text: str) -> None:
    sys.stdout.write(text)


def cmd_validate(args) -> int:
    run = Run("validate", args.out)
    run.input(args.path)
    bank, violations = read_conll_file(args.path, Mode(args.mode))
    report = {
        "sentences_read": len(bank),
        "violations": [v.to_dict() for v in violations],
    }
    run.write("violations.json", _dump(report))
    run.finish()
    if args.format == "json":
        _emit(_dump(report))
    else:
        for v in violations:
            _emit(f"{v.sentence_index}\t{v.kind.name}\t{v.detail}\n")
        _emit(f"{len(bank)} sentence(s) kept, {len(violations)} violation(s)\n")
    return 1 if any(v.kind.name != "SKIPPED_NODE" for v in violations) else 0


def cmd_sanitize(args) -> int:
    run = Run("sanitize", args.out)
    predicted = _read(run.input(args.pred), Mode.LENIENT)
    gold = _read(run.input(args.gold))
    lexicon = load_lexicon(run.input(args.lexicon)) if args.lexicon else set()
    keep = [DefectClass[name.upper()] for name in args.keep]
    kept, report = sanitize(predicted, gold, lexicon, keep)
    run.write("sanitized.conllu", write_conll(kept))
    run.write("sanitize_report.json", report.to_json())
    run.finish()
    if args.format == "json":
        _emit(report.to_json())
    else:
        _emit(f"retained {report.retained}, dropped {report.dropped}\n")
        for name, n in report.to_dict()["per_class"].items():
            _emit(f"{name}\t{n}\n")
    return 0


def cmd_score(args) -> int:
    run = Run("score", args.out)
    predicted = _read(run.input(args.pred), Mode.LENIENT)
    gold = _read(run.input(args.gold))
    gold = gold.subset(predicted.keys())
    exclude = PUNCT_PROFILES[args.profile] if args.punct == "auto" else args.punct == "exclude"
    report = score(predicted, gold, exclude)
    confusion = label_confusion(predicted, gold, args.top_k,
                                correct_heads_only=not args.all_tokens)
    roots = root_analysis(predicted, gold)
    data = {
        "score": report.to_dict(),
        "label_confusion": [vars(e) for e in confusion],
        "root_analysis": roots.to_dict(),
    }
    run.write("score.json", _dump(data))
    run.finish()
    _emit(_dump(data) if args.format == "json" else format_table(report, confusion, roots))
    return 0


def cmd_dted(args) -> int:
    run = Run("dted", args.out)
    bank_a, bank_b = _read(run.input(args.a)), _read(run.input(args.b))
    if len(bank_a) != len(bank_b):
        raise InputError(f"{len(bank_a)} vs {len(bank_b)} valid sentences; files pair by position")
    mode = LabelMode(args.label_mode)
    rows = []
    for (ka, sa), (kb, sb) in zip(zip(bank_a.keys(), bank_a), zip(bank_b.keys(), bank_b)):
        d = sentence_dted(sa, sb, mode)
        rows.append({"source_id_a": ka, "source_id_b": kb, **d.to_dict()})
    tsv = "source_id_a\tsource_id_b\tedit_dist\tscore\n" + "".join(
        f"{r['source_id_a']}\t{r['source_id_b']}\t{r['edit_dist']}\t{r['score']:.6f}\n" for r in rows)
    run.write("dted.tsv", tsv)
    run.finish()
    _emit(_dump(rows) if args.format == "json" else tsv)
    return 0


def _select(args, bank_a: Treebank, bank_b: Treebank):
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        return select_pairs(bank_a, bank_b, args.k, LabelMode(args.label_mode),
                            args.length_window, args.allow_repeats)


def cmd_pairs(args) -> int:
    run = Run("pairs", args.out)
    selection = _select(args, _read(run.input(args.a)), _read(run.input(args.b)))
    tsv = pairs_to_tsv(selection)
    run.write("pairs.tsv", tsv)
    meta = {"k": selection.k, "returned": len(selection.pairs), "policy": selection.policy,
            "label_mode": selection.mode.value, "warning": selection.warning}
    run.write("pairs_meta.json", _dump(meta))
    run.finish()
    if selection.warning:
        log.warning(selection.warning)
    _emit(_dump(meta) if args.format == "json" else tsv)
    return 0


def _llm_setup(run: Run, args) -> tuple[PromptTemplate, LlmConfig, ResponseCache]:
    template = PromptTemplate.from_file(run.input(args.template, "config"))
    overrides = {"offline": True} if args.offline else {}
    config = LlmConfig.from_file(run.input(args.config, "config"), **overrides)
    return template, config, ResponseCache(args.cache)


def _predict(run: Run, gold: Treebank, template, config, cache, suffix: str = "",
             transport=urllib_transport) -> Treebank:
    keys = gold.keys()
    prompts = [render_prompt(template, s) for s in gold]
    results = complete_many(config, prompts, cache, template=template, transport=transport)
    errors = [r for r in results if isinstance(r, LlmError)]
    if errors:
        raise errors[0]
    responses = "".join(json.dumps({"source_id": k, "response": r}, ensure_ascii=False) + "\n"
                        for k, r in zip(keys, results))
    predictions = "".join(prediction_block(r, k) for k, r in zip(keys, results))
    run.write(f"responses{suffix}.jsonl", responses)
    run.write(f"predictions{suffix}.conllu", predictions)
    bank, _ = read_conll(predictions, Mode.LENIENT, language_tag=gold.language_tag)
    return bank


def cmd_run(args, transport=urllib_transport) -> int:
    run = Run("run", args.out)
    gold = _read(run.input(args.gold))
    template, config, cache = _llm_setup(run, args)
    _predict(run, gold, template, config, cache, transport=transport)
    run.finish()
    _emit(f"{len(gold)} response(s) written to {run.out}\n")
    return 0


def cmd_pipeline(args, transport=urllib_transport) -> int:
    run = Run("pipeline", args.out)
    gold_a, gold_b = _read(run.input(args.gold_a)), _read(run.input(args.gold_b))
    template, config, cache = _llm_setup(run, args)
    lexicon = load_lexicon(run.input(args.lexicon)) if args.lexicon else set()
    mode = LabelMode(args.label_mode)

    selection = _select(args, gold_a, gold_b)
    run.write("pairs.tsv", pairs_to_tsv(selection))
    sub_a = gold_a.subset(p.id_a for p in selection.pairs)
    sub_b = gold_b.subset(p.id_b for p in selection.pairs)

    reports = {}
    kept = {}
    for side, gold in (("a", sub_a), ("b", sub_b)):
        predicted = _predict(run, gold, template, config, cache, f"_{side}", transport)
        kept[side], report = sanitize(predicted, gold, lexicon)
        reports[side] = report.to_dict()
        run.write(f"sanitize_{side}.json", report.to_json())

    summary = consistency_summary(kept["a"], kept["b"], selection, mode)
    data = {
        "label_mode": mode.value,
        "selection": {"k": selection.k, "returned": len(selection.pairs),
                      "policy": selection.policy, "warning": selection.warning},
        "sanitize": {side: {"retained": r["retained"], "dropped": r["dropped"]}
                     for side, r in reports.items()},
        "consistency": summary.to_dict(),
    }
    run.write("summary.json", _dump(data))
    run.finish()
    if args.format == "json":
        _emit(_dump(data))
    else:
        _emit(f"pairs {len(selection.pairs)}  scored {len(summary.per_pair)}  "
              f"skipped {summary.skipped}\n"
              f"mean predicted DTED {summary.mean_score:.4f}  mean gold DTED "
              f"{summary.mean_gold:.4f}  ratio "
              f"{'n/a' if summary.ratio is None else f'{summary.ratio:.4f}'}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="llmdep", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--format", choices=["json", "tsv", "table"], default="table")
        return p

    p = add("validate", cmd_validate, "check a CoNLL file for tree violations")
    p.add_argument("path")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="strict")

    p = add("sanitize", cmd_sanitize, "filter predictions that do not align with gold")
    p.add_argument("pred")
    p.add_argument("gold")
    p.add_argument("--lexicon", help="newline-separated sensitive word list")
    p.add_argument("--keep", nargs="*", default=[], metavar="CLASS",
                   choices=[c.name.lower() for c in DefectClass if c is not DefectClass.ALIGNED],
                   help="defect classes to keep instead of dropping")

    p = add("score", cmd_score, "UAS/LAS, label confusion and root analysis")
    p.add_argument("pred")
    p.add_argument("gold")
    p.add_argument("--punct", choices=["auto", "exclude", "include"], default="auto")
    p.add_argument("--profile", choices=sorted(PUNCT_PROFILES), default="ud",
                   help="dataset profile choosing the punctuation default")
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--all-tokens", action="store_true",
                   help="count label confusion on wrongly attached tokens too")

    def tree_opts(p):
        p.add_argument("--label-mode", choices=[m.value for m in LabelMode], default="structural")

    def pair_opts(p):
        tree_opts(p)
        p.add_argument("--k", type=int, default=50)
        p.add_argument("--length-window", type=int, default=3)
        p.add_argument("--allow-repeats", action="store_true")

    def llm_opts(p):
        p.add_argument("--template", required=True, help="prompt template JSON")
        p.add_argument("--config", required=True, help="LLM config JSON")
        p.add_argument("--cache", required=True, help="response cache directory")
        p.add_argument("--offline", action="store_true", help="replay from the cache only")

    p = add("dted", cmd_dted, "DTED scores for sentences paired by position")
    p.add_argument("a")
    p.add_argument("b")
    tree_opts(p)

    p = add("pairs", cmd_pairs, "select the most similar cross-lingual sentence pairs")
    p.add_argument("a")
    p.add_argument("b")
    pair_opts(p)

    p = add("run", cmd_run, "prompt the LLM for every gold sentence")
    p.add_argument("gold")
    llm_opts(p)

    p = add("pipeline", cmd_pipeline, "select pairs, parse both sides, summarize consistency")
    p.add_argument("gold_a")
    p.add_argument("gold_b")
    p.add_argument("--lexicon")
    pair_opts(p)
    llm_opts(p)
    return parser


def main(argv: list[str] | None = None, transport=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    kwargs = {"transport": transport} if transport and args.command in ("run", "pipeline") else {}
    try:
        return args.func(args, **kwargs)
    except (TransportError, HttpClientError) as exc:
        log.error("%s", exc)
        return 2
    except (InputError, AlignmentError, CacheMiss, LlmError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
