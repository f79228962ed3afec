"""Command-line surface for batch and single-sentence use.

Exit codes: 0 success, 1 input error, 2 oracle failure.  Secrets travel
only through the environment (SENSE_BRIDGE_ENDPOINT, SENSE_BRIDGE_API_KEY);
all randomness sits behind explicit --seed flags.
"""

import json
import sys
from concurrent.futures import ThreadPoolExecutor

import click

from . import scoring
from .candgen import generate_choice_sets, parse_corpus_file
from .errors import OracleError, SenseBridgeError
from .kb import load_kb_file, validate_kb
from .logic import SequentialIdGenerator, parse_sexpr
from .oracle import OracleConfig, make_oracle, parse_replies_file
from .scoring import (parse_frame_preds_file, parse_gold_file,
                      random_within_frame_baseline, render_baseline_text,
                      render_report_text, score)
from .tms import disambiguate_sentence, prompt_for_target
from .verbalize import verbalize_candidate

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_ORACLE = 2


def oracle_options(fn):
    fn = click.option("--oracle", "oracle_kind", required=True,
                      type=click.Choice(["http-chat", "scripted", "uniform-random",
                                         "first-option"]),
                      help="Selection oracle kind.")(fn)
    fn = click.option("--replies", type=click.Path(exists=True, dir_okay=False),
                      help="Scripted replies file (scripted oracle).")(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True,
                      help="Seed for the uniform-random oracle.")(fn)
    fn = click.option("--model", help="Model name (http-chat oracle).")(fn)
    fn = click.option("--endpoint",
                      help="Chat endpoint URL; defaults to $SENSE_BRIDGE_ENDPOINT.")(fn)
    fn = click.option("--retries", type=int, default=2, show_default=True,
                      help="Re-queries allowed after a malformed reply.")(fn)
    fn = click.option("--timeout", type=float, default=60.0, show_default=True,
                      help="Request timeout in seconds (http-chat oracle).")(fn)
    fn = click.option("--bold-target/--no-bold-target", default=False,
                      help="Wrap the target word in ** inside the prompt.")(fn)
    return fn


def build_oracle(oracle_kind, replies, seed, model, endpoint, retries, timeout,
                 bold_target):
    replies_map = parse_replies_file(replies) if replies else {}
    if oracle_kind == "scripted" and not replies:
        raise click.UsageError("--oracle scripted requires --replies")
    config = OracleConfig(kind=oracle_kind, endpoint=endpoint, model=model,
                          retries=retries, timeout=timeout, seed=seed,
                          replies=replies_map, bold_target=bold_target)
    try:
        return make_oracle(config)
    except ValueError as exc:
        raise click.UsageError(str(exc))


def run_pipeline(kb, sentences, oracle, jobs=1, id_base=1):
    """Disambiguate every sentence; output order follows corpus order."""
    def run_one(sentence):
        return disambiguate_sentence(kb, oracle, sentence,
                                     idgen=SequentialIdGenerator(id_base))

    if jobs <= 1:
        return [run_one(s) for s in sentences]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_one, sentences))


def write_output(text, output):
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def analyses_json(analyses):
    return json.dumps([a.to_dict() for a in analyses], indent=2, sort_keys=True) + "\n"


@click.group()
def cli():
    """Word-sense disambiguation over a symbolic KB with a pluggable oracle."""


@cli.group("kb")
def kb_group():
    """Knowledge-base utilities."""


@kb_group.command("validate")
@click.argument("kb_path", type=click.Path(exists=True, dir_okay=False))
def kb_validate(kb_path):
    """Check every KB invariant and report findings."""
    from .kb import load_kb

    with open(kb_path, encoding="utf-8") as fh:
        source = fh.read()
    kb = load_kb(source, source_name=kb_path, validate=False)
    report = validate_kb(kb)
    click.echo(f"{len(report.findings)} findings")
    for finding in report.findings:
        click.echo(str(finding))
    if report.findings:
        sys.exit(EXIT_INPUT)


@cli.command("senses")
@click.argument("kb_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("lemma")
@click.argument("pos", type=click.Choice(["verb", "noun"]))
def senses_cmd(kb_path, lemma, pos):
    """List the declaration-ordered senses of (LEMMA, POS)."""
    kb = load_kb_file(kb_path)
    senses = kb.lookup_senses(lemma, pos)
    click.echo(f"{len(senses)} senses for {lemma}.{pos}")
    for k, s in enumerate(senses, start=1):
        frame = s.frame or "-"
        click.echo(f"{k}. {s.sense_id}  concept={s.head_concept}  frame={frame}")


@cli.command("verbalize")
@click.argument("kb_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("sexpr_text")
def verbalize_cmd(kb_path, sexpr_text):
    """Render a logical form as its English option text."""
    kb = load_kb_file(kb_path)
    meaning = parse_sexpr(sexpr_text, kb)
    click.echo(verbalize_candidate(kb, meaning))


@cli.command("prompt")
@click.argument("kb_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("corpus_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("sentence_id")
@click.argument("token_index", type=int)
@click.option("--id-base", type=int, default=1, show_default=True,
              help="Starting index for discourse variables.")
@click.option("--bold-target/--no-bold-target", default=False)
def prompt_cmd(kb_path, corpus_path, sentence_id, token_index, id_base, bold_target):
    """Dump the exact prompt bytes the pipeline would issue for one target."""
    kb = load_kb_file(kb_path)
    sentences = {s.sentence_id: s for s in parse_corpus_file(corpus_path)}
    if sentence_id not in sentences:
        raise SenseBridgeError(f"no sentence {sentence_id!r} in {corpus_path}")
    text = prompt_for_target(kb, sentences[sentence_id], token_index,
                             idgen=SequentialIdGenerator(id_base),
                             bold_target=bold_target)
    sys.stdout.write(text)
    sys.stdout.flush()


@cli.command("disambiguate")
@click.argument("kb_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("corpus_path", type=click.Path(exists=True, dir_okay=False))
@oracle_options
@click.option("--output", "-o", type=click.Path(dir_okay=False),
              help="Write analyses JSON here instead of stdout.")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Worker threads; output order stays corpus order.")
@click.option("--id-base", type=int, default=1, show_default=True)
def disambiguate_cmd(kb_path, corpus_path, output, jobs, id_base, **oracle_kwargs):
    """Disambiguate a corpus and write one analysis record per sentence."""
    kb = load_kb_file(kb_path)
    sentences = parse_corpus_file(corpus_path)
    oracle = build_oracle(**oracle_kwargs)
    analyses = run_pipeline(kb, sentences, oracle, jobs=jobs, id_base=id_base)
    write_output(analyses_json(analyses), output)
    if any(a.status == "failed(oracle)" for a in analyses):
        sys.exit(EXIT_ORACLE)


@cli.command("eval")
@click.argument("kb_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("corpus_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("gold_path", type=click.Path(exists=True, dir_okay=False))
@oracle_options
@click.option("--output", "-o", type=click.Path(dir_okay=False))
@click.option("--report-format", "fmt", type=click.Choice(["json", "text"]),
              default="text", show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--id-base", type=int, default=1, show_default=True)
def eval_cmd(kb_path, corpus_path, gold_path, output, fmt, jobs, id_base,
             **oracle_kwargs):
    """Run the pipeline over a corpus and score it against gold annotations."""
    kb = load_kb_file(kb_path)
    sentences = parse_corpus_file(corpus_path)
    gold = parse_gold_file(gold_path, kb)
    oracle = build_oracle(**oracle_kwargs)
    analyses = run_pipeline(kb, sentences, oracle, jobs=jobs, id_base=id_base)
    report = score(analyses, gold, kb)
    if fmt == "json":
        write_output(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", output)
    else:
        write_output(render_report_text(report), output)
    if any(a.status == "failed(oracle)" for a in analyses):
        sys.exit(EXIT_ORACLE)


@cli.command("baseline")
@click.argument("kb_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("corpus_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("gold_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--frame-preds", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="External frame predictions, one (frame-pred ...) per item.")
@click.option("--seed", type=int, required=True)
@click.option("--trials", type=int, default=10000, show_default=True)
@click.option("--output", "-o", type=click.Path(dir_okay=False))
@click.option("--report-format", "fmt", type=click.Choice(["json", "text"]),
              default="text", show_default=True)
@click.option("--id-base", type=int, default=1, show_default=True)
def baseline_cmd(kb_path, corpus_path, gold_path, frame_preds, seed, trials,
                 output, fmt, id_base):
    """Frame predictions plus uniform random choice within the frame."""
    kb = load_kb_file(kb_path)
    sentences = parse_corpus_file(corpus_path)
    gold = parse_gold_file(gold_path, kb)
    preds = parse_frame_preds_file(frame_preds)
    choice_sets_by_item = {}
    for sentence in sentences:
        sets = generate_choice_sets(kb, sentence, SequentialIdGenerator(id_base))
        for cs in sets:
            choice_sets_by_item[(sentence.sentence_id, cs.target.token_index)] = cs
    report = random_within_frame_baseline(choice_sets_by_item, preds, gold,
                                          seed, trials)
    if fmt == "json":
        write_output(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", output)
    else:
        write_output(render_baseline_text(report), output)


def main(argv=None):
    """Entry point returning the process exit code."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return EXIT_INPUT
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return EXIT_INPUT
    except OracleError as exc:
        click.echo(f"oracle failure: {exc}", err=True)
        return EXIT_ORACLE
    except SystemExit as exc:
        return int(exc.code or 0)
    except (SenseBridgeError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
