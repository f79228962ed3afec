"""Candidate generation: from a sentence to one choice set per target word.

The canonical input path is an annotated corpus that names each target and
its SUBJ/OBJ argument lemmas explicitly.  ``link_arguments`` offers a
best-effort positional heuristic for raw text so single sentences can be
tried without writing a corpus file.
"""

import re
from dataclasses import dataclass, field

from . import sexpr
from .errors import ParseError
from .logic import DiscourseVar, instantiate_sense
from .sexpr import Symbol

LINK_ROLES = ("SUBJ", "OBJ")

OPEN = "open"
COMMITTED = "committed"
EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class TargetWord:
    token_index: int
    surface: str
    lemma: str
    pos: str
    links: tuple = ()  # ((role, filler lemma), ...)

    def link_map(self):
        return dict(self.links)


@dataclass(frozen=True)
class AnnotatedSentence:
    sentence_id: str
    text: str
    targets: tuple = ()


@dataclass
class ChoiceSet:
    """One ambiguous word's ordered candidates plus its resolution status."""

    target: TargetWord
    candidates: tuple
    status: str = OPEN
    committed_index: int | None = None

    def __post_init__(self):
        if not self.candidates:
            self.status = EXHAUSTED


# -- corpus files -------------------------------------------------------------


def parse_corpus(source, source_name="<corpus>"):
    """Parse `(sentence "<id>" :text "..." :targets (...))` records."""
    sentences = []
    seen_ids = set()
    for form, line in sexpr.read_forms(source):
        if not (isinstance(form, list) and form and form[0] == Symbol("sentence")):
            raise ParseError(f"{source_name}: expected (sentence ...) form", line)
        if len(form) < 2 or isinstance(form[1], (Symbol, list, int)):
            raise ParseError(f"{source_name}: sentence id must be a quoted string", line)
        sid = form[1]
        if sid in seen_ids:
            raise ParseError(f"{source_name}: duplicate sentence id {sid!r}", line)
        seen_ids.add(sid)
        opts = sexpr.plist(form[2:], "sentence", line, {"text", "targets"}, {"text"})
        targets = []
        for t in opts.get("targets", []):
            if not (isinstance(t, list) and len(t) >= 3):
                raise ParseError(
                    f"{source_name}: target must be (<idx> <lemma> <pos> ...)", line)
            idx, lemma, pos = t[0], t[1], t[2]
            if not isinstance(idx, int):
                raise ParseError(f"{source_name}: target token index must be an integer", line)
            topts = sexpr.plist(t[3:], "target", line, {"subj", "obj"})
            links = []
            for role, key in (("SUBJ", "subj"), ("OBJ", "obj")):
                if key in topts:
                    links.append((role, str(topts[key])))
            targets.append(TargetWord(idx, str(lemma), str(lemma), str(pos), tuple(links)))
        targets.sort(key=lambda t: t.token_index)
        sentences.append(AnnotatedSentence(sid, opts["text"], tuple(targets)))
    return sentences


def parse_corpus_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse_corpus(fh.read(), source_name=str(path))


# -- raw-text heuristic --------------------------------------------------------

_STRIP = ".,!?;:\"'()"


def _tokens(text):
    return [t.strip(_STRIP).lower() for t in text.split() if t.strip(_STRIP)]


def _form_index(kb):
    """Map token tuples to (lemma, matched-past?) for every known word form."""
    index = {}
    for lex in kb.lexemes.values():
        index[tuple(lex.surface_form().split())] = (lex.lemma, False)
        index.setdefault((lex.lemma,), (lex.lemma, False))
        if lex.past:
            index[(lex.past,)] = (lex.lemma, True)
    return index


def link_arguments(text, kb, sentence_id="raw"):
    """Greedy lexicon match plus nearest-entity SUBJ/OBJ links for verbs."""
    tokens = _tokens(text)
    index = _form_index(kb)
    longest = max((len(k) for k in index), default=1)

    occurrences = []  # (token_index, surface, lemma, matched_past)
    i = 0
    while i < len(tokens):
        match = None
        for width in range(min(longest, len(tokens) - i), 0, -1):
            key = tuple(tokens[i:i + width])
            if key in index:
                match = (width, index[key])
                break
        if match:
            width, (lemma, was_past) = match
            occurrences.append((i, " ".join(tokens[i:i + width]), lemma, was_past))
            i += width
        else:
            i += 1

    def is_entity(lemma):
        return lemma in kb.entity_types or (lemma, "noun") in kb.senses

    targets = []
    for tok_idx, surface, lemma, was_past in occurrences:
        if was_past and (lemma, "verb") in kb.senses:
            pos = "verb"
        elif (lemma, "noun") in kb.senses:
            pos = "noun"
        elif (lemma, "verb") in kb.senses:
            pos = "verb"
        else:
            continue
        links = []
        if pos == "verb":
            before = [o for o in occurrences if o[0] < tok_idx and is_entity(o[2])]
            after = [o for o in occurrences if o[0] > tok_idx and is_entity(o[2])]
            if before:
                links.append(("SUBJ", before[-1][2]))
            if after:
                links.append(("OBJ", after[0][2]))
        targets.append(TargetWord(tok_idx, surface, lemma, pos, tuple(links)))
    return AnnotatedSentence(sentence_id, text, tuple(targets))


# -- choice-set generation -----------------------------------------------------


def generate_choice_sets(kb, sentence, idgen):
    """One ChoiceSet per known-lemma target, selectionally filtered.

    A sense is skipped when (a) its skeleton needs a role the target does
    not link, or (b) a role constraint conflicts with the linked filler's
    declared entity type.  Fillers without a declared type never filter.
    """
    filler_vars = {}
    for target in sentence.targets:
        for _, filler in target.links:
            if filler not in filler_vars:
                filler_vars[filler] = DiscourseVar(filler, idgen.fresh(filler))

    choice_sets = []
    for target in sentence.targets:
        senses = kb.lookup_senses(target.lemma, target.pos)
        if not senses:
            continue
        links = target.link_map()
        bindings = {role: filler_vars[filler] for role, filler in target.links}
        candidates = []
        for tpl in senses:
            if any(role not in bindings for role in tpl.required_roles()):
                continue
            compatible = True
            for role, required in tpl.role_constraints:
                filler = links.get(role)
                if filler is None:
                    continue
                filler_type = kb.entity_types.get(filler)
                if filler_type is not None and not kb.is_subconcept(filler_type, required):
                    compatible = False
                    break
            if not compatible:
                continue
            candidates.append(instantiate_sense(kb, tpl, bindings, idgen))
        choice_sets.append(ChoiceSet(target, tuple(candidates)))
    return choice_sets
