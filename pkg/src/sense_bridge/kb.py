"""Fixture knowledge base: ontology, predicates, frames, sense lexicon.

The KB file format is s-expression based, one declaration per toplevel form:

    (concept <Id> :gloss "<text>" :parents (<Id> ...))
    (predicate <name> :arity <n> [:template "<tpl>"])
    (frame <FN_Id> :desc "<text>")
    (lexeme <lemma> [:past "<text>"] [:surface "<text>"])
    (entity <lemma> <ConceptId>)
    (sense <sense_id> :lemma <lemma> :pos <verb|noun> :concept <Id>
           [:frame <FN_Id>] :atoms ((<pred> <ROLE-or-CONST:Sym> ...) ...)
           [:constraints ((<ROLE> <ConceptId>) ...)])

Forward references are legal; resolution happens after the whole document
is parsed.  A loaded KnowledgeBase is immutable and safe to share between
threads.
"""

from dataclasses import dataclass, field

from . import sexpr
from .errors import KBError, ParseError, UnknownConceptError
from .sexpr import Symbol

ROLES = ("EVENT", "SUBJ", "OBJ")
POS_VALUES = ("verb", "noun")
FRAME_PREFIX = "FN_"


@dataclass(frozen=True)
class Concept:
    id: str
    gloss: str
    parents: tuple = ()


@dataclass(frozen=True)
class PredicateDef:
    name: str
    arity: int
    template: str | None = None


@dataclass(frozen=True)
class Frame:
    id: str
    description: str = ""


@dataclass(frozen=True)
class ConstRef:
    """A CONST:<symbol> argument slot inside a sense atom skeleton."""

    name: str


@dataclass(frozen=True)
class AtomSkeleton:
    predicate: str
    args: tuple  # role name strings and ConstRef entries

    def roles(self):
        return tuple(a for a in self.args if isinstance(a, str))


@dataclass(frozen=True)
class SenseTemplate:
    sense_id: str
    lemma: str
    pos: str
    head_concept: str
    frame: str | None
    atoms: tuple
    role_constraints: tuple = ()  # ((role, concept_id), ...)

    def required_roles(self):
        """Roles the caller must bind before instantiation (EVENT excluded)."""
        seen = []
        for skel in self.atoms:
            for role in skel.roles():
                if role != "EVENT" and role not in seen:
                    seen.append(role)
        return tuple(seen)

    def constraint_map(self):
        return dict(self.role_constraints)


@dataclass(frozen=True)
class Lexeme:
    lemma: str
    past: str | None = None
    surface: str | None = None

    def surface_form(self):
        return self.surface if self.surface is not None else self.lemma.replace("-", " ")

    def past_form(self):
        return self.past if self.past is not None else self.lemma + "ed"


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning"
    code: str
    message: str
    location: str | None = None

    def __str__(self):
        where = f" [{self.location}]" if self.location else ""
        return f"{self.severity}: {self.code}: {self.message}{where}"


@dataclass
class ValidationReport:
    findings: list = field(default_factory=list)

    def __bool__(self):
        return not self.findings

    def errors(self):
        return [f for f in self.findings if f.severity == "error"]


class KnowledgeBase:
    """Indexed, immutable-by-convention store of all KB declarations."""

    def __init__(self, concepts=(), predicates=(), frames=(), senses=(),
                 lexemes=(), entity_types=None):
        self.concepts = {c.id: c for c in concepts}
        self.predicates = {p.name: p for p in predicates}
        self.frames = {f.id: f for f in frames}
        self.lexemes = {l.lemma: l for l in lexemes}
        self.entity_types = dict(entity_types or {})
        self.senses = {}        # (lemma, pos) -> [SenseTemplate...] in declaration order
        self.senses_by_id = {}
        for s in senses:
            self.senses.setdefault((s.lemma, s.pos), []).append(s)
            self.senses_by_id[s.sense_id] = s

    # -- queries ---------------------------------------------------------

    def lookup_senses(self, lemma, pos):
        """Declaration-ordered senses for (lemma, pos); empty if unknown."""
        return list(self.senses.get((lemma, pos), ()))

    def sense(self, sense_id):
        try:
            return self.senses_by_id[sense_id]
        except KeyError:
            raise KBError(f"unknown sense id {sense_id!r}") from None

    def frame_of_sense(self, sense_id):
        """The coarse frame pre-bound to a sense, or None."""
        return self.sense(sense_id).frame

    def is_subconcept(self, child, ancestor):
        """True iff ancestor is reachable from child via parent links (reflexive)."""
        for cid in (child, ancestor):
            if cid not in self.concepts:
                raise UnknownConceptError(f"unknown concept {cid!r}")
        if child == ancestor:
            return True
        seen = set()
        stack = [child]
        while stack:
            cur = stack.pop()
            if cur == ancestor:
                return True
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(p for p in self.concepts[cur].parents if p in self.concepts)
        return False

    def gloss(self, concept_id):
        try:
            return self.concepts[concept_id].gloss
        except KeyError:
            raise UnknownConceptError(f"unknown concept {concept_id!r}") from None


# -- loading ---------------------------------------------------------------


def _sym(value, what, line):
    if not isinstance(value, Symbol):
        raise ParseError(f"expected a symbol for {what}, got {value!r}", line)
    return str(value)


def _string(value, what, line):
    if not isinstance(value, str) or isinstance(value, Symbol):
        raise ParseError(f"expected a quoted string for {what}, got {value!r}", line)
    return value


def _parse_skeleton(form, line):
    if not isinstance(form, list) or not form:
        raise ParseError(f"atom skeleton must be a non-empty list, got {form!r}", line)
    pred = _sym(form[0], "predicate", line)
    args = []
    for a in form[1:]:
        name = _sym(a, "skeleton argument", line)
        if name.startswith("CONST:"):
            const = name[len("CONST:"):]
            if not const:
                raise ParseError("empty CONST: argument", line)
            args.append(ConstRef(const))
        elif name in ROLES:
            args.append(name)
        else:
            raise ParseError(
                f"skeleton argument {name!r} is neither a role {ROLES} nor CONST:<sym>",
                line)
    return AtomSkeleton(pred, tuple(args))


def load_kb(source, source_name="<kb>", validate=True):
    """Parse a KB document and, by default, reject any invariant violation.

    ``validate=False`` still rejects structural problems (parse errors,
    duplicate ids) but defers semantic checks to validate_kb, which is how
    tooling reports findings instead of failing fast.
    """
    concepts, predicates, frames, lexemes, senses = [], [], [], [], []
    entity_types = {}
    lines = {}  # declared id -> line, for duplicate reporting

    def check_dup(kind, ident, line):
        key = (kind, ident)
        if key in lines:
            raise KBError(
                f"{source_name}:{line}: duplicate {kind} {ident!r} "
                f"(first declared at line {lines[key]})")
        lines[key] = line

    for form, line in sexpr.read_forms(source):
        if not isinstance(form, list) or not form:
            raise ParseError("toplevel form must be a list", line)
        head = _sym(form[0], "form head", line)
        if head == "concept":
            if len(form) < 2:
                raise ParseError("(concept ...) needs an id", line)
            cid = _sym(form[1], "concept id", line)
            opts = sexpr.plist(form[2:], "concept", line, {"gloss", "parents"}, {"gloss"})
            parents = tuple(_sym(p, "parent id", line) for p in opts.get("parents", []))
            check_dup("concept", cid, line)
            concepts.append(Concept(cid, _string(opts["gloss"], "gloss", line), parents))
        elif head == "predicate":
            name = _sym(form[1], "predicate name", line)
            opts = sexpr.plist(form[2:], "predicate", line, {"arity", "template"}, {"arity"})
            arity = opts["arity"]
            if not isinstance(arity, int):
                raise ParseError("predicate arity must be an integer", line)
            template = _string(opts["template"], "template", line) if "template" in opts else None
            check_dup("predicate", name, line)
            predicates.append(PredicateDef(name, arity, template))
        elif head == "frame":
            fid = _sym(form[1], "frame id", line)
            opts = sexpr.plist(form[2:], "frame", line, {"desc"})
            check_dup("frame", fid, line)
            frames.append(Frame(fid, _string(opts.get("desc", ""), "desc", line) if "desc" in opts else ""))
        elif head == "lexeme":
            lemma = _sym(form[1], "lexeme lemma", line)
            opts = sexpr.plist(form[2:], "lexeme", line, {"past", "surface"})
            check_dup("lexeme", lemma, line)
            lexemes.append(Lexeme(
                lemma,
                _string(opts["past"], "past", line) if "past" in opts else None,
                _string(opts["surface"], "surface", line) if "surface" in opts else None))
        elif head == "entity":
            if len(form) != 3:
                raise ParseError("(entity <lemma> <ConceptId>) takes two arguments", line)
            lemma = _sym(form[1], "entity lemma", line)
            check_dup("entity", lemma, line)
            entity_types[lemma] = _sym(form[2], "entity concept", line)
        elif head == "sense":
            sid = _sym(form[1], "sense id", line)
            opts = sexpr.plist(form[2:], "sense", line,
                               {"lemma", "pos", "concept", "frame", "atoms", "constraints"},
                               {"lemma", "pos", "concept", "atoms"})
            pos = _sym(opts["pos"], "pos", line)
            if pos not in POS_VALUES:
                raise ParseError(f"sense pos must be one of {POS_VALUES}, got {pos!r}", line)
            atoms = tuple(_parse_skeleton(a, line) for a in opts["atoms"])
            constraints = []
            for c in opts.get("constraints", []):
                if not (isinstance(c, list) and len(c) == 2):
                    raise ParseError("constraint must be (<ROLE> <ConceptId>)", line)
                constraints.append((_sym(c[0], "constraint role", line),
                                    _sym(c[1], "constraint concept", line)))
            check_dup("sense", sid, line)
            senses.append(SenseTemplate(
                sid, _sym(opts["lemma"], "lemma", line), pos,
                _sym(opts["concept"], "head concept", line),
                _sym(opts["frame"], "frame", line) if "frame" in opts else None,
                atoms, tuple(constraints)))
        else:
            raise ParseError(f"unknown toplevel form ({head} ...)", line)

    kb = KnowledgeBase(concepts, predicates, frames, senses, lexemes, entity_types)
    if validate:
        report = validate_kb(kb)
        if report.errors():
            details = "; ".join(str(f) for f in report.errors())
            raise KBError(f"{source_name}: invalid knowledge base: {details}")
    return kb


def load_kb_file(path):
    with open(path, encoding="utf-8") as fh:
        return load_kb(fh.read(), source_name=str(path))


# -- validation ------------------------------------------------------------


def _template_slots(template):
    """Parse a template into (literals, slots); raises ParseError when malformed."""
    from .verbalize import parse_template  # local import: verbalize depends on kb

    return parse_template(template)


def validate_kb(kb):
    """Check every KB invariant; findings are data, not exceptions."""
    report = ValidationReport()

    def err(code, message, location=None):
        report.findings.append(Finding("error", code, message, location))

    def warn(code, message, location=None):
        report.findings.append(Finding("warning", code, message, location))

    for c in kb.concepts.values():
        if not c.gloss:
            err("empty-gloss", f"concept {c.id} has an empty gloss", c.id)
        for p in c.parents:
            if p not in kb.concepts:
                err("dangling-reference", f"concept {c.id} names unknown parent {p}", c.id)

    # ontology acyclicity via iterative DFS coloring
    color = {}  # 0 in progress, 1 done

    def find_cycle(start):
        stack = [(start, iter(kb.concepts[start].parents))]
        color[start] = 0
        path = [start]
        while stack:
            node, parents = stack[-1]
            advanced = False
            for p in parents:
                if p not in kb.concepts:
                    continue
                if color.get(p) == 0:
                    return path + [p]
                if p not in color:
                    color[p] = 0
                    stack.append((p, iter(kb.concepts[p].parents)))
                    path.append(p)
                    advanced = True
                    break
            if not advanced:
                color[node] = 1
                stack.pop()
                path.pop()
        return None

    for cid in kb.concepts:
        if cid not in color:
            cycle = find_cycle(cid)
            if cycle:
                loop = cycle[cycle.index(cycle[-1]):]
                err("ontology-cycle",
                    "ontology cycle: " + " -> ".join(loop), cycle[-1])

    for p in kb.predicates.values():
        if p.arity < 1:
            err("bad-arity", f"predicate {p.name} has arity {p.arity} (must be >= 1)", p.name)
        if p.template is not None:
            try:
                parts = _template_slots(p.template)
            except ParseError as exc:
                err("bad-template", f"predicate {p.name}: {exc}", p.name)
            else:
                for part in parts:
                    if not isinstance(part, str) and part.position > p.arity:
                        err("bad-template",
                            f"predicate {p.name}: slot {{{part.position}}} exceeds arity {p.arity}",
                            p.name)

    for f in kb.frames.values():
        if not f.id.startswith(FRAME_PREFIX):
            err("bad-frame-id", f"frame id {f.id} must start with {FRAME_PREFIX!r}", f.id)

    for (lemma, pos), group in kb.senses.items():
        for s in group:
            loc = f"sense {s.sense_id}"
            if s.lemma != s.lemma.lower():
                err("bad-lemma", f"lemma {s.lemma!r} is not lowercase", loc)
            if s.head_concept not in kb.concepts:
                err("dangling-reference", f"unknown head concept {s.head_concept}", loc)
            if s.frame is not None and s.frame not in kb.frames:
                err("dangling-reference", f"unknown frame {s.frame}", loc)
            if not s.atoms:
                err("bad-sense", "sense declares no atoms", loc)
                continue
            first = s.atoms[0]
            if (first.predicate != "isa" or len(first.args) != 2
                    or first.args[0] != "EVENT"
                    or first.args[1] != ConstRef(s.head_concept)):
                err("bad-sense",
                    f"first atom must be (isa EVENT CONST:{s.head_concept})", loc)
            for skel in s.atoms:
                pred = kb.predicates.get(skel.predicate)
                if pred is None:
                    err("dangling-reference", f"unknown predicate {skel.predicate}", loc)
                elif len(skel.args) != pred.arity:
                    err("bad-arity",
                        f"atom ({skel.predicate} ...) has {len(skel.args)} args, "
                        f"predicate arity is {pred.arity}", loc)
                for a in skel.args:
                    if isinstance(a, ConstRef):
                        if a.name not in kb.concepts and a.name not in kb.predicates:
                            err("dangling-reference",
                                f"constant {a.name} is neither a concept nor a predicate", loc)
            for role, concept in s.role_constraints:
                if role not in ROLES:
                    err("bad-sense", f"constraint names unknown role {role}", loc)
                if concept not in kb.concepts:
                    err("dangling-reference", f"constraint names unknown concept {concept}", loc)

    verb_lemmas = {lemma for (lemma, pos) in kb.senses if pos == "verb"}
    for lex in kb.lexemes.values():
        if lex.lemma in verb_lemmas and not lex.past:
            warn("missing-past", f"verb lexeme {lex.lemma} has no :past form", lex.lemma)

    for lemma, concept in kb.entity_types.items():
        if concept not in kb.concepts:
            err("dangling-reference", f"entity {lemma} names unknown concept {concept}", lemma)

    return report


# -- canonical dump ----------------------------------------------------------


def dump_kb(kb):
    """Render a KB back to its file format in a canonical order.

    Concepts, predicates, frames, lexemes and entities are sorted by id;
    senses keep declaration order because that order is meaningful.
    """
    out = []
    q = sexpr.quote_string
    for c in sorted(kb.concepts.values(), key=lambda c: c.id):
        parents = " ".join(c.parents)
        out.append(f"(concept {c.id} :gloss {q(c.gloss)} :parents ({parents}))")
    for p in sorted(kb.predicates.values(), key=lambda p: p.name):
        tpl = f" :template {q(p.template)}" if p.template is not None else ""
        out.append(f"(predicate {p.name} :arity {p.arity}{tpl})")
    for f in sorted(kb.frames.values(), key=lambda f: f.id):
        desc = f" :desc {q(f.description)}" if f.description else ""
        out.append(f"(frame {f.id}{desc})")
    for lex in sorted(kb.lexemes.values(), key=lambda l: l.lemma):
        past = f" :past {q(lex.past)}" if lex.past is not None else ""
        surface = f" :surface {q(lex.surface)}" if lex.surface is not None else ""
        out.append(f"(lexeme {lex.lemma}{past}{surface})")
    for lemma in sorted(kb.entity_types):
        out.append(f"(entity {lemma} {kb.entity_types[lemma]})")
    for group in kb.senses.values():
        for s in group:
            atoms = " ".join(
                "(" + " ".join([skel.predicate] + [
                    a if isinstance(a, str) else f"CONST:{a.name}" for a in skel.args
                ]) + ")"
                for skel in s.atoms)
            parts = [f"(sense {s.sense_id} :lemma {s.lemma} :pos {s.pos}",
                     f":concept {s.head_concept}"]
            if s.frame is not None:
                parts.append(f":frame {s.frame}")
            parts.append(f":atoms ({atoms})")
            if s.role_constraints:
                cons = " ".join(f"({r} {c})" for r, c in s.role_constraints)
                parts.append(f":constraints ({cons})")
            out.append(" ".join(parts) + ")")
    return "\n".join(out) + "\n"
