"""Per-sentence disambiguation state: commitments, pruning, retraction.

Committing a selection lets ``propagate`` drive the state to a fixpoint:
selectional constraints between linked words prune incompatible candidates
(each prune carries a justification naming the committed word it depends
on), choice sets reduced to one survivor are auto-committed, and a set
reduced to zero marks the whole analysis inconsistent.

``retract_selection`` removes an externally made commitment and rebuilds
the state by replaying the remaining external commitments in their
original order, which restores exactly the state that propagation would
have produced had the retracted commitment never been made.
"""

from dataclasses import dataclass, field

from .candgen import COMMITTED, EXHAUSTED, OPEN, generate_choice_sets
from .errors import OracleError, StateError
from .logic import SequentialIdGenerator, render_sexpr
from .oracle import prepare_prompt, select_meaning

ORACLE_SELECTION = "oracle-selection"
SINGLETON_AUTOCOMMIT = "singleton-autocommit"
SELECTIONAL_CONFLICT = "selectional-conflict"


@dataclass(frozen=True)
class Justification:
    kind: str
    source_word: int | None = None  # token index of the commitment relied on
    role: str | None = None
    required_concept: str | None = None

    def to_dict(self):
        d = {"kind": self.kind}
        if self.source_word is not None:
            d["source_word"] = self.source_word
        if self.role is not None:
            d["role"] = self.role
        if self.required_concept is not None:
            d["required_concept"] = self.required_concept
        return d


@dataclass(frozen=True)
class PruneEntry:
    token_index: int
    candidate_index: int
    justification: Justification

    def to_dict(self):
        return {"token_index": self.token_index,
                "candidate_index": self.candidate_index,
                "justification": self.justification.to_dict()}


@dataclass
class DisambiguationState:
    sentence: object
    choice_sets: list
    commitments: dict = field(default_factory=dict)   # token -> (cand index, Justification)
    pruned: list = field(default_factory=list)        # PruneEntry, in prune order
    failed_reason: str | None = None
    root_commitments: list = field(default_factory=list)
    selection_meta: dict = field(default_factory=dict)  # token -> Selection
    _pruned_idx: dict = field(default_factory=dict)   # token -> set of candidate indices

    def set_for(self, token_index):
        for cs in self.choice_sets:
            if cs.target.token_index == token_index:
                return cs
        raise StateError(f"no choice set for token index {token_index}")

    def survivors(self, choice_set):
        dead = self._pruned_idx.get(choice_set.target.token_index, ())
        return [i for i in range(len(choice_set.candidates)) if i not in dead]

    def is_pruned(self, token_index, candidate_index):
        return candidate_index in self._pruned_idx.get(token_index, ())

    def snapshot(self):
        """Comparable structural summary used for state-equality checks."""
        return (
            tuple((cs.target.token_index, cs.status, cs.committed_index)
                  for cs in self.choice_sets),
            tuple(sorted((tok, idx, just)
                         for tok, (idx, just) in self.commitments.items())),
            tuple(self.pruned),
            self.failed_reason,
        )


def init_state(sentence, choice_sets):
    """Fresh state: no commitments, empty prune log, singletons untouched."""
    return DisambiguationState(sentence, list(choice_sets))


def _commit(state, choice_set, candidate_index, justification):
    tok = choice_set.target.token_index
    if choice_set.status == COMMITTED:
        raise StateError(f"token {tok} is already committed")
    if choice_set.status == EXHAUSTED:
        raise StateError(f"token {tok} has an exhausted choice set")
    if not 0 <= candidate_index < len(choice_set.candidates):
        raise StateError(
            f"candidate index {candidate_index} out of bounds for token {tok} "
            f"(have {len(choice_set.candidates)} candidates)")
    if state.is_pruned(tok, candidate_index):
        raise StateError(
            f"candidate {candidate_index} of token {tok} was pruned and "
            "cannot be committed")
    choice_set.status = COMMITTED
    choice_set.committed_index = candidate_index
    state.commitments[tok] = (candidate_index, justification)


def commit_selection(state, token_index, candidate_index, justification):
    """Commit an externally chosen candidate (oracle or caller decision)."""
    choice_set = state.set_for(token_index)
    _commit(state, choice_set, candidate_index, justification)
    state.root_commitments.append((token_index, candidate_index, justification))
    return state


def _prune(state, choice_set, candidate_index, justification, delta):
    tok = choice_set.target.token_index
    entry = PruneEntry(tok, candidate_index, justification)
    state.pruned.append(entry)
    state._pruned_idx.setdefault(tok, set()).add(candidate_index)
    delta.append(entry)


def _head_concept(kb, candidate):
    return kb.sense(candidate.sense_id).head_concept


def propagate(state, kb):
    """Drive the state to its propagation fixpoint; returns new prune entries.

    Repeats until nothing changes: (a) a committed word's role constraints
    prune linked words' candidates with incompatible head concepts, (b) a
    committed word's head concept prunes linked candidates whose constraint
    on the linking role it violates, (c) open sets with one survivor are
    auto-committed, and sets with none become exhausted, failing the
    analysis while preserving the log.
    """
    delta = []
    changed = True
    while changed:
        changed = False
        for tok in sorted(state.commitments):
            committed_set = state.set_for(tok)
            cand_index, _ = state.commitments[tok]
            committed_tpl = kb.sense(committed_set.candidates[cand_index].sense_id)
            committed_links = committed_set.target.link_map()

            for other in state.choice_sets:
                if other is committed_set:
                    continue

                # (a) the committed word constrains a role filled by `other`
                for role, required in committed_tpl.role_constraints:
                    if committed_links.get(role) != other.target.lemma:
                        continue
                    justification = Justification(SELECTIONAL_CONFLICT, tok, role, required)
                    if other.status == OPEN:
                        for i in state.survivors(other):
                            head = _head_concept(kb, other.candidates[i])
                            if not kb.is_subconcept(head, required):
                                _prune(state, other, i, justification, delta)
                                changed = True
                    elif other.status == COMMITTED:
                        head = _head_concept(kb, other.candidates[other.committed_index])
                        if not kb.is_subconcept(head, required):
                            state.failed_reason = "inconsistent"

                # (b) `other` constrains a role filled by the committed word
                other_links = other.target.link_map()
                committed_head = committed_tpl.head_concept
                linking_roles = [r for r, filler in other_links.items()
                                 if filler == committed_set.target.lemma]
                if not linking_roles:
                    continue
                if other.status == OPEN:
                    for i in state.survivors(other):
                        tpl = kb.sense(other.candidates[i].sense_id)
                        for role, required in tpl.role_constraints:
                            if role in linking_roles and not kb.is_subconcept(
                                    committed_head, required):
                                _prune(state, other, i,
                                       Justification(SELECTIONAL_CONFLICT, tok, role, required),
                                       delta)
                                changed = True
                                break
                elif other.status == COMMITTED:
                    tpl = kb.sense(other.candidates[other.committed_index].sense_id)
                    for role, required in tpl.role_constraints:
                        if role in linking_roles and not kb.is_subconcept(
                                committed_head, required):
                            state.failed_reason = "inconsistent"

        for cs in state.choice_sets:
            if cs.status != OPEN:
                continue
            surviving = state.survivors(cs)
            if not surviving:
                cs.status = EXHAUSTED
                state.failed_reason = "inconsistent"
                changed = True
            elif len(surviving) == 1:
                _commit(state, cs, surviving[0], Justification(SINGLETON_AUTOCOMMIT))
                changed = True
    return delta


def verify_prune_justification(state, kb, entry):
    """Re-check a prune's witness: the recorded conflict must still hold."""
    j = entry.justification
    if j.kind != SELECTIONAL_CONFLICT or j.source_word is None:
        return False
    if j.source_word not in state.commitments:
        return False
    source_set = state.set_for(j.source_word)
    source_idx, _ = state.commitments[j.source_word]
    source_tpl = kb.sense(source_set.candidates[source_idx].sense_id)
    pruned_set = state.set_for(entry.token_index)
    pruned_tpl = kb.sense(pruned_set.candidates[entry.candidate_index].sense_id)

    # direction (a): the source's own constraint on a role linked to the pruned word
    if (j.role, j.required_concept) in source_tpl.role_constraints:
        if source_set.target.link_map().get(j.role) == pruned_set.target.lemma:
            if not kb.is_subconcept(pruned_tpl.head_concept, j.required_concept):
                return True
    # direction (b): the pruned candidate's constraint on a role filled by the source
    if (j.role, j.required_concept) in pruned_tpl.role_constraints:
        if pruned_set.target.link_map().get(j.role) == source_set.target.lemma:
            if not kb.is_subconcept(source_tpl.head_concept, j.required_concept):
                return True
    return False


def _reset(state):
    for cs in state.choice_sets:
        cs.status = OPEN if cs.candidates else EXHAUSTED
        cs.committed_index = None
    state.commitments.clear()
    state.pruned.clear()
    state._pruned_idx.clear()
    state.failed_reason = None


def retract_selection(state, token_index, kb):
    """Withdraw a commitment and everything that depended on it.

    Implemented by replaying the remaining external commitments in their
    original order with propagation after each, so the result is exactly
    the state that would exist had the retracted commitment never been
    made.  Retracting an auto-commitment is legal but futile: propagation
    immediately re-derives it.
    """
    if token_index not in state.commitments:
        raise StateError(f"token {token_index} is not committed")
    remaining = [r for r in state.root_commitments if r[0] != token_index]
    state.root_commitments = []
    state.selection_meta.pop(token_index, None)
    _reset(state)
    propagate(state, kb)
    for tok, cand_index, justification in remaining:
        try:
            commit_selection(state, tok, cand_index, justification)
        except StateError as exc:
            raise StateError(
                f"retraction of token {token_index} invalidated the later "
                f"commitment on token {tok}: {exc}") from exc
        propagate(state, kb)
    return state


# -- end-to-end pipeline -------------------------------------------------------


@dataclass
class TargetResult:
    lemma: str
    token_index: int
    status: str  # committed | exhausted | open
    sense_id: str | None = None
    frame: str | None = None
    sexpr: str | None = None
    candidate_index: int | None = None
    option_index: int | None = None
    attempts: int = 0
    justification: str | None = None

    def to_dict(self):
        return {
            "lemma": self.lemma,
            "token_index": self.token_index,
            "status": self.status,
            "sense_id": self.sense_id,
            "frame": self.frame,
            "sexpr": self.sexpr,
            "candidate_index": self.candidate_index,
            "option_index": self.option_index,
            "attempts": self.attempts,
            "justification": self.justification,
        }


@dataclass
class SentenceAnalysis:
    sentence_id: str
    status: str  # complete | failed(inconsistent) | failed(oracle)
    targets: list
    prune_log: list
    oracle_calls: int

    @property
    def complete(self):
        return self.status == "complete"

    def target_at(self, token_index):
        for t in self.targets:
            if t.token_index == token_index:
                return t
        return None

    def to_dict(self):
        return {
            "sentence_id": self.sentence_id,
            "status": self.status,
            "oracle_calls": self.oracle_calls,
            "targets": [t.to_dict() for t in self.targets],
            "prune_log": [e.to_dict() for e in self.prune_log],
        }


def _analysis_from_state(state, kb, oracle_calls, failure):
    targets = []
    for cs in state.choice_sets:
        tok = cs.target.token_index
        if cs.status == COMMITTED:
            candidate = cs.candidates[cs.committed_index]
            _, justification = state.commitments[tok]
            sel = state.selection_meta.get(tok)
            targets.append(TargetResult(
                cs.target.lemma, tok, "committed",
                sense_id=candidate.sense_id,
                frame=kb.frame_of_sense(candidate.sense_id),
                sexpr=render_sexpr(candidate),
                candidate_index=cs.committed_index,
                option_index=sel.option_index if sel else None,
                attempts=sel.attempts if sel else 0,
                justification=justification.kind))
        else:
            targets.append(TargetResult(cs.target.lemma, tok, cs.status))
    if failure is not None:
        status = f"failed({failure})"
    elif all(cs.status != OPEN for cs in state.choice_sets):
        status = "complete"
    else:
        status = "failed(incomplete)"
    return SentenceAnalysis(state.sentence.sentence_id, status, targets,
                            list(state.pruned), oracle_calls)


def disambiguate_sentence(kb, oracle, sentence, idgen=None):
    """Generate, propagate, and resolve every choice set left to right.

    The leftmost open choice set is prompted over its surviving candidates
    (prompt numbering covers survivors only), the reply is committed, and
    propagation runs before the next word is considered.
    """
    if idgen is None:
        idgen = SequentialIdGenerator()
    choice_sets = generate_choice_sets(kb, sentence, idgen)
    state = init_state(sentence, choice_sets)
    propagate(state, kb)
    oracle_calls = 0
    failure = None
    while state.failed_reason is None:
        pending = next((cs for cs in state.choice_sets if cs.status == OPEN), None)
        if pending is None:
            break
        survivors = state.survivors(pending)
        try:
            selection = select_meaning(
                oracle, sentence.text, pending.target.lemma, pending, kb,
                sentence_id=sentence.sentence_id, survivor_indices=survivors)
        except OracleError:
            failure = "oracle"
            break
        oracle_calls += 1
        tok = pending.target.token_index
        commit_selection(state, tok, survivors[selection.option_index - 1],
                         Justification(ORACLE_SELECTION))
        state.selection_meta[tok] = selection
        propagate(state, kb)
    if failure is None and state.failed_reason is not None:
        failure = state.failed_reason
    return _analysis_from_state(state, kb, oracle_calls, failure)


def prompt_for_target(kb, sentence, token_index, idgen=None, bold_target=False):
    """The exact prompt the pipeline would issue for this target first.

    Reflects the initially propagated state: candidate generation plus one
    propagation pass, before any oracle selection is made.
    """
    if idgen is None:
        idgen = SequentialIdGenerator()
    choice_sets = generate_choice_sets(kb, sentence, idgen)
    state = init_state(sentence, choice_sets)
    propagate(state, kb)
    cs = state.set_for(token_index)
    if cs.status != OPEN:
        raise StateError(
            f"token {token_index} is not open after propagation "
            f"(status {cs.status}); no prompt would be issued")
    survivors = state.survivors(cs)
    candidates = [cs.candidates[i] for i in survivors]
    _, prompt = prepare_prompt(kb, sentence.text, cs.target.lemma, candidates,
                               bold_target=bold_target)
    return prompt
