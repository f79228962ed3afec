"""Hybrid word-sense disambiguation.

A symbolic layer generates logical-form candidate meanings for ambiguous
words, a verbalizer renders them as distinguishable English options, a
pluggable oracle picks one, and a truth-maintenance layer propagates the
selection through the rest of the sentence.  A scoring harness reports
accuracy at frame (coarse) and sense (fine) granularity.
"""

from .candgen import (AnnotatedSentence, ChoiceSet, TargetWord,
                      generate_choice_sets, link_arguments, parse_corpus,
                      parse_corpus_file)
from .errors import SenseBridgeError
from .kb import (KnowledgeBase, dump_kb, load_kb, load_kb_file, validate_kb)
from .logic import (Atom, CandidateMeaning, ConceptConst, DiscourseVar,
                    FixedIdGenerator, PredicateConst, SequentialIdGenerator,
                    instantiate_sense, make_atom, parse_sexpr, render_sexpr)
from .oracle import (OracleConfig, Selection, build_prompt, make_oracle,
                     parse_replies, parse_replies_file, parse_response,
                     select_meaning)
from .scoring import (EvalReport, FramePrediction, GoldAnnotation,
                      analytic_random_expectation, error_breakdown,
                      format_percent, parse_frame_preds,
                      parse_frame_preds_file, parse_gold, parse_gold_file,
                      random_within_frame_baseline, score)
from .tms import (DisambiguationState, Justification, SentenceAnalysis,
                  commit_selection, disambiguate_sentence, init_state,
                  prompt_for_target, propagate, retract_selection,
                  verify_prune_justification)
from .verbalize import verbalize_atom, verbalize_candidate

__version__ = "0.1.0"

__all__ = [
    "AnnotatedSentence", "Atom", "CandidateMeaning", "ChoiceSet",
    "ConceptConst", "DiscourseVar", "DisambiguationState", "EvalReport",
    "FixedIdGenerator", "FramePrediction", "GoldAnnotation", "Justification",
    "KnowledgeBase", "OracleConfig", "PredicateConst", "Selection",
    "SenseBridgeError", "SentenceAnalysis", "SequentialIdGenerator",
    "TargetWord", "analytic_random_expectation", "build_prompt",
    "commit_selection", "disambiguate_sentence", "dump_kb", "error_breakdown",
    "format_percent", "generate_choice_sets", "init_state",
    "instantiate_sense", "link_arguments", "load_kb", "load_kb_file",
    "make_atom", "make_oracle", "parse_corpus", "parse_corpus_file",
    "parse_frame_preds", "parse_frame_preds_file", "parse_gold",
    "parse_gold_file", "parse_replies", "parse_replies_file", "parse_response",
    "parse_sexpr", "prompt_for_target", "propagate",
    "random_within_frame_baseline", "render_sexpr", "retract_selection",
    "score", "select_meaning", "validate_kb", "verbalize_atom",
    "verbalize_candidate", "verify_prune_justification",
]
