"""Two-granularity scoring plus the random-within-frame baseline.

Accuracies are exact rationals; rounding happens only when rendering
(one decimal for accuracies, whole percents for the error breakdown,
halves away from zero in both cases).
"""

import hashlib
import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import sexpr
from .errors import KBError, ParseError, ScoringError
from .sexpr import Symbol

UNCATEGORIZED = "uncategorized"


def round_half_away(value):
    """Round an exact Fraction to the nearest integer, halves away from zero."""
    sign = -1 if value < 0 else 1
    magnitude = abs(value)
    whole, rest = divmod(magnitude.numerator, magnitude.denominator)
    if 2 * rest >= magnitude.denominator:
        whole += 1
    return sign * whole


def format_percent(value):
    """Render a Fraction in [0, 1] as a one-decimal percent string."""
    tenths = round_half_away(value * 1000)
    return f"{tenths // 10}.{tenths % 10}%"


# -- gold annotations and frame predictions ------------------------------------


@dataclass(frozen=True)
class GoldAnnotation:
    sentence_id: str
    token_index: int
    gold_sense_id: str
    gold_frame: str | None = None
    error_category: str | None = None

    @property
    def key(self):
        return (self.sentence_id, self.token_index)


@dataclass(frozen=True)
class FramePrediction:
    sentence_id: str
    token_index: int
    predicted_frame: str | None

    @property
    def key(self):
        return (self.sentence_id, self.token_index)


def parse_gold(source, kb, source_name="<gold>"):
    """Parse `(gold "<id>" <idx> :sense <sid> [:frame <FN_Id>] [:category <label>])`.

    Each gold sense must resolve in the KB.  When :frame is omitted it
    defaults to the sense's pre-established frame binding; when given it
    must agree with that binding.
    """
    items = []
    seen = set()
    for form, line in sexpr.read_forms(source):
        if not (isinstance(form, list) and len(form) >= 3 and form[0] == Symbol("gold")):
            raise ParseError(f"{source_name}: expected (gold ...) form", line)
        sid, tok = form[1], form[2]
        if isinstance(sid, Symbol) or not isinstance(sid, str) or not isinstance(tok, int):
            raise ParseError(
                f"{source_name}: gold needs a quoted sentence id and integer token index",
                line)
        opts = sexpr.plist(form[3:], "gold", line, {"sense", "frame", "category"}, {"sense"})
        sense_id = str(opts["sense"])
        try:
            binding = kb.frame_of_sense(sense_id)
        except KBError:
            raise ScoringError(
                f"{source_name}:{line}: unknown gold sense {sense_id!r}") from None
        frame = str(opts["frame"]) if "frame" in opts else binding
        if "frame" in opts and frame != binding:
            raise ScoringError(
                f"{source_name}:{line}: gold frame {frame} disagrees with the "
                f"KB binding {binding} of sense {sense_id}")
        key = (sid, tok)
        if key in seen:
            raise ScoringError(f"{source_name}:{line}: duplicate gold key {key}")
        seen.add(key)
        items.append(GoldAnnotation(sid, tok, sense_id, frame,
                                    str(opts["category"]) if "category" in opts else None))
    return items


def parse_gold_file(path, kb):
    with open(path, encoding="utf-8") as fh:
        return parse_gold(fh.read(), kb, source_name=str(path))


def parse_frame_preds(source, source_name="<frame-preds>"):
    """Parse `(frame-pred "<id>" <idx> <FN_Id|none>)` records."""
    preds = []
    seen = set()
    for form, line in sexpr.read_forms(source):
        if not (isinstance(form, list) and len(form) == 4
                and form[0] == Symbol("frame-pred")):
            raise ParseError(
                f'{source_name}: expected (frame-pred "<id>" <idx> <FN_Id|none>)', line)
        sid, tok, frame = form[1], form[2], form[3]
        if isinstance(sid, Symbol) or not isinstance(sid, str) or not isinstance(tok, int):
            raise ParseError(f"{source_name}: bad frame-pred key", line)
        frame = None if frame == Symbol("none") else str(frame)
        key = (sid, tok)
        if key in seen:
            raise ScoringError(f"{source_name}:{line}: duplicate frame-pred key {key}")
        seen.add(key)
        preds.append(FramePrediction(sid, tok, frame))
    return preds


def parse_frame_preds_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse_frame_preds(fh.read(), source_name=str(path))


# -- scoring --------------------------------------------------------------------


@dataclass(frozen=True)
class ItemVerdict:
    sentence_id: str
    token_index: int
    gold_sense_id: str
    gold_frame: str | None
    predicted_sense_id: str | None
    predicted_frame: str | None
    coarse_correct: bool
    fine_correct: bool
    analysis_status: str

    @property
    def key(self):
        return (self.sentence_id, self.token_index)

    def to_dict(self):
        return {
            "sentence_id": self.sentence_id,
            "token_index": self.token_index,
            "gold_sense_id": self.gold_sense_id,
            "gold_frame": self.gold_frame,
            "predicted_sense_id": self.predicted_sense_id,
            "predicted_frame": self.predicted_frame,
            "coarse_correct": self.coarse_correct,
            "fine_correct": self.fine_correct,
            "analysis_status": self.analysis_status,
        }


@dataclass
class EvalReport:
    n_items: int
    coarse_correct: int
    fine_correct: int
    coarse_accuracy: Fraction
    fine_accuracy: Fraction
    error_percentages: dict
    verdicts: list = field(default_factory=list)

    @property
    def coarse_percent(self):
        return format_percent(self.coarse_accuracy)

    @property
    def fine_percent(self):
        return format_percent(self.fine_accuracy)

    def to_dict(self):
        return {
            "n_items": self.n_items,
            "coarse_correct": self.coarse_correct,
            "fine_correct": self.fine_correct,
            "coarse_accuracy": {
                "exact": f"{self.coarse_accuracy.numerator}/{self.coarse_accuracy.denominator}",
                "percent": self.coarse_percent,
            },
            "fine_accuracy": {
                "exact": f"{self.fine_accuracy.numerator}/{self.fine_accuracy.denominator}",
                "percent": self.fine_percent,
            },
            "error_breakdown": self.error_percentages,
            "items": [v.to_dict() for v in self.verdicts],
        }


def score(analyses, gold, kb):
    """Score analyses against gold at frame and sense granularity.

    Coarse correctness compares the selected sense's frame binding with the
    gold frame (both absent counts as agreement); fine correctness compares
    sense ids.  Failed analyses count every one of their gold items wrong
    at both levels.
    """
    if not gold:
        raise ScoringError("cannot score an empty gold list")
    predictions = {}
    for analysis in analyses:
        for target in analysis.targets:
            predictions[(analysis.sentence_id, target.token_index)] = (analysis, target)

    missing = [g.key for g in gold if g.key not in predictions]
    if missing:
        raise ScoringError(
            "gold keys missing from the analyses: "
            + ", ".join(f"{sid}:{tok}" for sid, tok in sorted(missing)))

    verdicts = []
    for g in sorted(gold, key=lambda g: g.key):
        kb.sense(g.gold_sense_id)  # unknown gold senses are an error
        analysis, target = predictions[g.key]
        if analysis.complete and target.status == "committed":
            predicted_sense = target.sense_id
            predicted_frame = target.frame
        else:
            predicted_sense = None
            predicted_frame = None
        if analysis.complete:
            coarse = predicted_frame == g.gold_frame
            fine = predicted_sense == g.gold_sense_id
        else:
            coarse = fine = False
        verdicts.append(ItemVerdict(
            g.sentence_id, g.token_index, g.gold_sense_id, g.gold_frame,
            predicted_sense, predicted_frame, coarse, fine, analysis.status))

    n = len(verdicts)
    coarse_correct = sum(v.coarse_correct for v in verdicts)
    fine_correct = sum(v.fine_correct for v in verdicts)
    report = EvalReport(
        n_items=n,
        coarse_correct=coarse_correct,
        fine_correct=fine_correct,
        coarse_accuracy=Fraction(coarse_correct, n),
        fine_accuracy=Fraction(fine_correct, n),
        error_percentages={},
        verdicts=verdicts,
    )
    report.error_percentages = error_breakdown(report, gold)
    return report


def error_breakdown(report, gold):
    """Whole-percent share of each error category among fine-grained errors."""
    categories = {g.key: g.error_category for g in gold}
    wrong = [v for v in report.verdicts if not v.fine_correct]
    if not wrong:
        return {}
    counts = {}
    for v in wrong:
        label = categories.get(v.key) or UNCATEGORIZED
        counts[label] = counts.get(label, 0) + 1
    total = len(wrong)
    return {label: round_half_away(Fraction(100 * count, total))
            for label, count in sorted(counts.items())}


# -- random-within-frame baseline -----------------------------------------------


@dataclass
class BaselineReport:
    n_items: int
    trials: int
    seed: int
    coarse_correct: int
    coarse_accuracy: Fraction
    fine_accuracy_mean: Fraction
    analytic_expectation: Fraction
    flagged_items: list = field(default_factory=list)  # frame right but no in-frame candidate

    def to_dict(self):
        return {
            "n_items": self.n_items,
            "trials": self.trials,
            "seed": self.seed,
            "coarse_correct": self.coarse_correct,
            "coarse_accuracy": {
                "exact": f"{self.coarse_accuracy.numerator}/{self.coarse_accuracy.denominator}",
                "percent": format_percent(self.coarse_accuracy),
            },
            "fine_accuracy_mean": {
                "exact": f"{self.fine_accuracy_mean.numerator}/{self.fine_accuracy_mean.denominator}",
                "percent": format_percent(self.fine_accuracy_mean),
            },
            "analytic_expectation": {
                "exact": f"{self.analytic_expectation.numerator}/{self.analytic_expectation.denominator}",
                "percent": format_percent(self.analytic_expectation),
            },
            "flagged_items": [f"{sid}:{tok}" for sid, tok in self.flagged_items],
        }


def _baseline_rows(choice_sets_by_item, frame_preds, gold):
    """Per gold item: (key, frame_correct, in-frame senses, gold sense)."""
    if not gold:
        raise ScoringError("cannot score an empty gold list")
    preds = {p.key: p.predicted_frame for p in frame_preds}
    rows = []
    for g in sorted(gold, key=lambda g: g.key):
        if g.key not in choice_sets_by_item:
            raise ScoringError(f"no choice set supplied for item {g.key}")
        if g.key not in preds:
            raise ScoringError(f"no frame prediction supplied for item {g.key}")
        predicted = preds[g.key]
        candidates = choice_sets_by_item[g.key]
        candidates = getattr(candidates, "candidates", candidates)
        in_frame = [c.sense_id for c in candidates if c.frame == predicted]
        rows.append((g.key, predicted == g.gold_frame, in_frame, g.gold_sense_id))
    return rows


def analytic_random_expectation(choice_sets_by_item, frame_preds, gold):
    """Exact expected fine accuracy of frame-then-uniform-random selection."""
    rows = _baseline_rows(choice_sets_by_item, frame_preds, gold)
    total = Fraction(0)
    for _, frame_correct, in_frame, gold_sense in rows:
        if frame_correct and gold_sense in in_frame:
            total += Fraction(1, len(in_frame))
    return total / len(rows)


def _item_rng(seed, key):
    digest = hashlib.sha256(f"{seed}|{key[0]}|{key[1]}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def random_within_frame_baseline(choice_sets_by_item, frame_preds, gold, seed, trials):
    """Monte Carlo emulation of frame classification plus random sense choice.

    Frame-wrong items are wrong in every trial; frame-correct items draw
    uniformly among their candidates in the predicted frame.  Each item's
    draw stream depends only on (seed, item key), so results are identical
    across runs and worker counts.
    """
    if trials < 1:
        raise ScoringError("trials must be >= 1")
    rows = _baseline_rows(choice_sets_by_item, frame_preds, gold)
    coarse_correct = sum(1 for _, ok, _, _ in rows if ok)
    flagged = []
    correct_draws = 0
    for key, frame_correct, in_frame, gold_sense in rows:
        if not frame_correct:
            continue
        if not in_frame:
            flagged.append(key)
            continue
        rng = _item_rng(seed, key)
        k = len(in_frame)
        try:
            gold_pos = in_frame.index(gold_sense)
        except ValueError:
            gold_pos = -1
        correct_draws += sum(1 for _ in range(trials) if rng.randrange(k) == gold_pos)
    n = len(rows)
    return BaselineReport(
        n_items=n,
        trials=trials,
        seed=seed,
        coarse_correct=coarse_correct,
        coarse_accuracy=Fraction(coarse_correct, n),
        fine_accuracy_mean=Fraction(correct_draws, n * trials),
        analytic_expectation=analytic_random_expectation(choice_sets_by_item,
                                                         frame_preds, gold),
        flagged_items=flagged,
    )


# -- plain-text rendering ---------------------------------------------------------


def render_report_text(report):
    """Aligned two-column accuracy table plus the error breakdown."""
    lines = [
        f"Disambiguation accuracy ({report.n_items} items)",
        "",
        f"{'':<18}{'Coarse-grained':<16}{'Fine-grained'}",
        f"{'selected':<18}{report.coarse_percent:<16}{report.fine_percent}",
        "",
        f"coarse correct: {report.coarse_correct}/{report.n_items}",
        f"fine correct:   {report.fine_correct}/{report.n_items}",
    ]
    errors = report.n_items - report.fine_correct
    if report.error_percentages:
        lines.append("")
        lines.append(f"Errors by category ({errors} fine-grained errors)")
        width = max(len(label) for label in report.error_percentages)
        for label, pct in report.error_percentages.items():
            lines.append(f"  {label:<{width}}  {pct}%")
    return "\n".join(lines) + "\n"


def render_baseline_text(report):
    lines = [
        f"Random-within-frame baseline ({report.n_items} items, "
        f"{report.trials} trials, seed {report.seed})",
        "",
        f"{'':<22}{'Coarse-grained':<16}{'Fine-grained'}",
        f"{'baseline':<22}{format_percent(report.coarse_accuracy):<16}"
        f"{format_percent(report.fine_accuracy_mean)}",
        f"{'analytic expectation':<22}{'':<16}"
        f"{format_percent(report.analytic_expectation)}",
    ]
    if report.flagged_items:
        lines.append("")
        lines.append("items with no candidate in the predicted frame (counted wrong):")
        for sid, tok in report.flagged_items:
            lines.append(f"  {sid}:{tok}")
    return "\n".join(lines) + "\n"
