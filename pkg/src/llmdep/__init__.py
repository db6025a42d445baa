"""Evaluate LLM-produced dependency parses: CoNLL I/O, sanitization,
attachment scoring, tree edit distance and cross-lingual consistency."""

__version__ = "0.1.0"

from .conll import (Dialect, Mode, Sentence, Token, Treebank, Violation, ViolationKind,
                    read_conll, read_conll_file, validate, write_conll, write_conll_file)
from .crosslingual import (ConsistencySummary, PairSelection, ScoredPair, consistency_summary,
                           read_pairs, select_pairs)
from .evaluation import (AlignmentError, ConfusionEntry, EvalReport, RootCategory, RootReport,
                         format_table, label_confusion, root_analysis, score)
from .harness import (CacheMiss, HttpClientError, LlmConfig, LlmError, PromptTemplate,
                      ResponseCache, TransportError, complete, complete_many, extract_conll,
                      render_prompt, response_to_sentence)
from .sanitize import DefectClass, SanitizeReport, align_forms, load_lexicon, sanitize
from .treedist import (DepTree, DtedScore, LabelMode, build_tree, dted, edit_distance,
                       sentence_dted)
