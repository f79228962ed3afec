"""Template-driven rendering of logical forms into English fragments.

Each predicate may carry a template with ``{N}`` / ``{N:form}`` slots
(``{{``/``}}`` escape literal braces).  Atoms whose predicate has no
template are skipped; the surviving fragments are joined with "; ".
"""

import re
from dataclasses import dataclass

from .errors import ParseError, TemplateError, UnverbalizableCandidateError
from .logic import ConceptConst, DiscourseVar, PredicateConst

FORMS = ("base", "past", "gloss")

SEPARATOR = "; "


@dataclass(frozen=True)
class TemplateSlot:
    position: int  # 1-based argument position
    form: str = "base"


_SLOT_RE = re.compile(r"\{([0-9]+)(?::([a-z]+))?\}")


def parse_template(template):
    """Split a template into literal strings and TemplateSlot parts."""
    parts = []
    i = 0
    n = len(template)
    literal = []
    while i < n:
        ch = template[i]
        if ch == "{":
            if template.startswith("{{", i):
                literal.append("{")
                i += 2
                continue
            m = _SLOT_RE.match(template, i)
            if not m:
                raise ParseError(f"malformed slot in template {template!r}")
            position = int(m.group(1))
            form = m.group(2) or "base"
            if position < 1:
                raise ParseError(f"slot positions are 1-based: {template!r}")
            if form not in FORMS:
                raise ParseError(f"unknown slot form {form!r} in template {template!r}")
            if literal:
                parts.append("".join(literal))
                literal = []
            parts.append(TemplateSlot(position, form))
            i = m.end()
        elif ch == "}":
            if template.startswith("}}", i):
                literal.append("}")
                i += 2
                continue
            raise ParseError(f"unmatched '}}' in template {template!r}")
        else:
            literal.append(ch)
            i += 1
    if literal:
        parts.append("".join(literal))
    return parts


def _surface(kb, lemma):
    lex = kb.lexemes.get(lemma)
    if lex is not None:
        return lex.surface_form()
    return lemma.replace("-", " ")


def _past(kb, lemma):
    lex = kb.lexemes.get(lemma)
    if lex is not None:
        return lex.past_form()
    return lemma + "ed"


def _fill_slot(kb, predicate, slot, term):
    if isinstance(term, DiscourseVar):
        if slot.form == "base":
            return _surface(kb, term.lemma)
        if slot.form == "past":
            return _past(kb, term.lemma)
    elif isinstance(term, ConceptConst):
        if slot.form == "gloss":
            return kb.gloss(term.id)
    kind = type(term).__name__
    raise TemplateError(
        f"predicate {predicate}: slot {{{slot.position}:{slot.form}}} "
        f"cannot render a {kind}")


def verbalize_atom(kb, atom):
    """English fragment for one atom, or None when its predicate is untemplated."""
    pred = kb.predicates.get(atom.predicate)
    if pred is None:
        raise ParseError(f"unknown predicate {atom.predicate!r}")
    if pred.template is None:
        return None
    pieces = []
    for part in parse_template(pred.template):
        if isinstance(part, str):
            pieces.append(part)
            continue
        if part.position > len(atom.args):
            raise TemplateError(
                f"predicate {atom.predicate}: slot {{{part.position}}} exceeds "
                f"argument count {len(atom.args)}")
        pieces.append(_fill_slot(kb, atom.predicate, part, atom.args[part.position - 1]))
    return "".join(pieces).strip()


def verbalize_candidate(kb, meaning):
    """Fragments of all templated atoms, in atom order, joined by '; '."""
    fragments = []
    for atom in meaning.atoms:
        text = verbalize_atom(kb, atom)
        if text is not None:
            fragments.append(text)
    if not fragments:
        raise UnverbalizableCandidateError(
            f"candidate {meaning.sense_id or render_hint(meaning)} has no "
            "verbalizable atom and cannot be offered as an option")
    return SEPARATOR.join(fragments)


def render_hint(meaning):
    from .logic import render_sexpr

    return render_sexpr(meaning)
