"""Logical forms: discourse variables, ground atoms, conjunctive meanings.

The rendered shape is byte-exact and stable because reports and golden
files depend on it: a one-atom meaning renders as the bare atom, anything
longer as ``(and <atom> <atom> ...)`` with single spaces between tokens.
"""

import re
from dataclasses import dataclass

from . import sexpr
from .errors import ArityError, MissingBindingError, ParseError
from .kb import ConstRef
from .sexpr import Symbol


@dataclass(frozen=True)
class DiscourseVar:
    """Unique per-analysis identifier, e.g. lemma 'turn' + index 38450."""

    lemma: str
    index: int

    @property
    def name(self):
        return f"{self.lemma}{self.index}"


@dataclass(frozen=True)
class ConceptConst:
    id: str


@dataclass(frozen=True)
class PredicateConst:
    """Predicate used in argument position (higher-order atoms)."""

    name: str


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple


@dataclass(frozen=True)
class CandidateMeaning:
    """One reading of an ambiguous word: isa atom plus role atoms."""

    sense_id: str | None
    atoms: tuple
    frame: str | None
    head_var: DiscourseVar


class SequentialIdGenerator:
    """Monotonic per-sentence counter; every fresh() yields a new index."""

    def __init__(self, start=1):
        self._next = start

    def fresh(self, lemma):
        index = self._next
        self._next += 1
        return index


class FixedIdGenerator:
    """Returns a preset index per lemma, the same one every time.

    Used when output must reproduce externally chosen variable names.
    """

    def __init__(self, mapping):
        self.mapping = dict(mapping)

    def fresh(self, lemma):
        try:
            return self.mapping[lemma]
        except KeyError:
            raise KeyError(f"no fixed index configured for lemma {lemma!r}") from None


def make_atom(kb, predicate, args):
    """Construct an Atom, enforcing the predicate's declared arity."""
    pred = kb.predicates.get(predicate)
    if pred is None:
        raise ParseError(f"unknown predicate {predicate!r}")
    if len(args) != pred.arity:
        raise ArityError(
            f"predicate {predicate} expects {pred.arity} args, got {len(args)}")
    return Atom(predicate, tuple(args))


def _resolve_const(kb, name):
    if name in kb.concepts:
        return ConceptConst(name)
    if name in kb.predicates:
        return PredicateConst(name)
    raise ParseError(f"constant {name!r} is neither a concept nor a predicate")


def instantiate_sense(kb, template, bindings, idgen):
    """Ground a sense template: fresh EVENT variable, bound roles, constants."""
    needed = template.required_roles()
    for role in needed:
        if role not in bindings:
            raise MissingBindingError(
                f"sense {template.sense_id} needs a binding for role {role}")
    event = DiscourseVar(template.lemma, idgen.fresh(template.lemma))
    atoms = []
    for skel in template.atoms:
        args = []
        for a in skel.args:
            if isinstance(a, ConstRef):
                args.append(_resolve_const(kb, a.name))
            elif a == "EVENT":
                args.append(event)
            else:
                args.append(bindings[a])
        atoms.append(make_atom(kb, skel.predicate, args))
    return CandidateMeaning(template.sense_id, tuple(atoms), template.frame, event)


# -- rendering ---------------------------------------------------------------


def _render_term(term):
    if isinstance(term, DiscourseVar):
        return term.name
    if isinstance(term, ConceptConst):
        return term.id
    if isinstance(term, PredicateConst):
        return term.name
    raise TypeError(f"not a term: {term!r}")


def _render_atom(atom):
    return "(" + " ".join([atom.predicate] + [_render_term(a) for a in atom.args]) + ")"


def render_sexpr(meaning):
    """Render a meaning; inverse of parse_sexpr on well-formed input."""
    rendered = [_render_atom(a) for a in meaning.atoms]
    if len(rendered) == 1:
        return rendered[0]
    return "(and " + " ".join(rendered) + ")"


# -- parsing -----------------------------------------------------------------

_VAR_RE = re.compile(r"^(.*[^0-9])([0-9]+)$")


def split_var_name(name):
    """Split a rendered variable at its maximal trailing digit run, or None."""
    m = _VAR_RE.match(name)
    if not m:
        return None
    return m.group(1), int(m.group(2))


def _classify_term(sym, kb):
    name = str(sym)
    if kb is not None:
        if name in kb.concepts:
            return ConceptConst(name)
        if name in kb.predicates:
            return PredicateConst(name)
        parts = split_var_name(name)
        if parts:
            return DiscourseVar(*parts)
        raise ParseError(f"unknown predicate/concept {name!r}")
    parts = split_var_name(name)
    if parts:
        return DiscourseVar(*parts)
    # without a KB the constant kind is unknowable; default to concept
    return ConceptConst(name)


def _atom_from_form(form, kb):
    if not isinstance(form, list) or not form:
        raise ParseError(f"expected an atom form, got {form!r}")
    head = form[0]
    if not isinstance(head, Symbol):
        raise ParseError(f"atom must start with a predicate symbol, got {head!r}")
    args = []
    for item in form[1:]:
        if isinstance(item, list):
            raise ParseError("nested forms are not valid atom arguments")
        if isinstance(item, int):
            raise ParseError(f"bare integer {item} is not a valid atom argument")
        args.append(_classify_term(item, kb))
    if kb is not None:
        return make_atom(kb, str(head), args)
    return Atom(str(head), tuple(args))


def _match_sense(kb, atoms, head_var):
    """Find the unique sense template whose skeleton these atoms instantiate."""
    if kb is None:
        return None
    candidates = []
    for pos in ("verb", "noun"):
        candidates.extend(kb.senses.get((head_var.lemma, pos), ()))
    matches = []
    for tpl in candidates:
        if len(tpl.atoms) != len(atoms):
            continue
        ok = True
        for skel, atom in zip(tpl.atoms, atoms):
            if skel.predicate != atom.predicate or len(skel.args) != len(atom.args):
                ok = False
                break
            for sa, ta in zip(skel.args, atom.args):
                if isinstance(sa, ConstRef):
                    if not isinstance(ta, (ConceptConst, PredicateConst)):
                        ok = False
                        break
                    if (ta.id if isinstance(ta, ConceptConst) else ta.name) != sa.name:
                        ok = False
                        break
                elif sa == "EVENT":
                    if ta != head_var:
                        ok = False
                        break
                else:  # SUBJ/OBJ slots hold some non-head variable
                    if not isinstance(ta, DiscourseVar) or ta == head_var:
                        ok = False
                        break
            if not ok:
                break
        if ok:
            matches.append(tpl)
    if len(matches) == 1:
        return matches[0]
    return None


def parse_sexpr(text, kb=None):
    """Parse a rendered meaning back into a CandidateMeaning.

    With a KB the terms are checked against the declared vocabulary and the
    originating sense (and hence its frame) is recovered by matching the
    atoms against the sense skeletons for the head variable's lemma.
    """
    form = sexpr.read_one(text)
    if not isinstance(form, list) or not form:
        raise ParseError(f"expected an atom or (and ...) form, got {form!r}")
    if isinstance(form[0], Symbol) and form[0] == "and":
        atom_forms = form[1:]
        if not atom_forms:
            raise ParseError("(and) without atoms")
    else:
        atom_forms = [form]
    atoms = tuple(_atom_from_form(f, kb) for f in atom_forms)
    first = atoms[0]
    if first.predicate != "isa" or not first.args or not isinstance(first.args[0], DiscourseVar):
        raise ParseError("first atom must be (isa <var> <Concept>)")
    head_var = first.args[0]
    tpl = _match_sense(kb, atoms, head_var)
    if tpl is not None:
        return CandidateMeaning(tpl.sense_id, atoms, tpl.frame, head_var)
    return CandidateMeaning(None, atoms, None, head_var)
