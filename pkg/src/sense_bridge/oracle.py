"""Selection oracles: prompt construction, querying, reply parsing.

The prompt layout is frozen byte-for-byte because golden files and any
remote model see exactly these bytes:

    Sentence: "<text>" Please select the most appropriate meaning for the word "<word>"
    Options:
    1. <option one>
    ...
    Reply only with the option number.

Lines are joined with a single linefeed and there is no trailing newline.
"""

import hashlib
import os
import random
import re
import threading
from dataclasses import dataclass, field

from . import sexpr
from .errors import (OracleExhaustedError, OracleTransportError, ParseError,
                     PromptError, UnscriptedKeyError)
from .sexpr import Symbol
from .verbalize import verbalize_candidate

ENDPOINT_ENV = "SENSE_BRIDGE_ENDPOINT"
API_KEY_ENV = "SENSE_BRIDGE_API_KEY"

DEFAULT_RETRIES = 2
DEFAULT_TIMEOUT = 60.0


def build_prompt(sentence_text, word, options, bold_target=False):
    """Assemble the exact prompt text for a numbered-options query."""
    if not options:
        raise PromptError("cannot build a prompt with zero options")
    for k, option in enumerate(options, start=1):
        if not option:
            raise PromptError(f"option {k} is empty")
    shown = f"**{word}**" if bold_target else word
    lines = [
        f'Sentence: "{sentence_text}" Please select the most appropriate '
        f'meaning for the word "{shown}"',
        "Options:",
    ]
    lines.extend(f"{k}. {option}" for k, option in enumerate(options, start=1))
    lines.append("Reply only with the option number.")
    return "\n".join(lines)


_DIGITS_RE = re.compile(r"[0-9]+")


def parse_response(reply, n_options):
    """First maximal digit run in ``reply`` if it lies in 1..n, else None."""
    m = _DIGITS_RE.search(reply)
    if not m:
        return None
    value = int(m.group(0))
    if 1 <= value <= n_options:
        return value
    return None


@dataclass(frozen=True)
class OracleRequest:
    """Everything an oracle may use: the prompt bytes plus query metadata."""

    prompt: str
    sentence_id: str
    word: str
    n_options: int


@dataclass(frozen=True)
class Selection:
    option_index: int  # 1-based over the options as presented
    raw_reply: str
    attempts: int


@dataclass
class OracleConfig:
    kind: str  # http-chat | scripted | uniform-random | first-option
    endpoint: str | None = None
    model: str | None = None
    retries: int = DEFAULT_RETRIES
    timeout: float = DEFAULT_TIMEOUT
    seed: int = 0
    replies: dict = field(default_factory=dict)
    bold_target: bool = False
    system_message: str | None = None

    def __post_init__(self):
        if self.retries < 0:
            raise ValueError("retries must be >= 0")


class Oracle:
    """Base oracle; subclasses implement query(request) -> reply text."""

    def __init__(self, retries=DEFAULT_RETRIES, bold_target=False):
        self.retries = retries
        self.bold_target = bold_target

    def query(self, request):
        raise NotImplementedError


class FirstOptionOracle(Oracle):
    def query(self, request):
        return "1"


class UniformRandomOracle(Oracle):
    """Seeded choice over 1..n, derived from (seed, sentence_id, word).

    The stream depends only on that key, so replies are reproducible and
    independent of call order or concurrency.
    """

    def __init__(self, seed=0, **kwargs):
        super().__init__(**kwargs)
        self.seed = seed

    def query(self, request):
        key = f"{self.seed}|{request.sentence_id}|{request.word}".encode("utf-8")
        digest = hashlib.sha256(key).digest()
        rng = random.Random(int.from_bytes(digest[:8], "big"))
        return str(rng.randrange(1, request.n_options + 1))


class ScriptedOracle(Oracle):
    """Replays canned replies keyed by (sentence_id, word).

    Multiple replies under one key are consumed in order, which lets tests
    script a malformed reply followed by a correction.
    """

    def __init__(self, replies, **kwargs):
        super().__init__(**kwargs)
        self._replies = {k: list(v) if isinstance(v, (list, tuple)) else [v]
                         for k, v in dict(replies).items()}
        self._lock = threading.Lock()

    def query(self, request):
        key = (request.sentence_id, request.word)
        with self._lock:
            queue = self._replies.get(key)
            if not queue:
                raise UnscriptedKeyError(
                    f"no scripted reply for sentence {request.sentence_id!r}, "
                    f"word {request.word!r}")
            return queue.pop(0)


class HttpChatOracle(Oracle):
    """Speaks the common chat-completions JSON POST protocol.

    One request per query, default sampling parameters (no overrides), the
    prompt as the single user message.  A bearer token is attached when the
    environment provides one.
    """

    def __init__(self, endpoint, model, timeout=DEFAULT_TIMEOUT,
                 api_key=None, system_message=None, **kwargs):
        super().__init__(**kwargs)
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.system_message = system_message

    def query(self, request):
        import requests

        messages = []
        if self.system_message:
            messages.append({"role": "system", "content": self.system_message})
        messages.append({"role": "user", "content": request.prompt})
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            resp = requests.post(
                self.endpoint,
                json={"model": self.model, "messages": messages},
                headers=headers,
                timeout=self.timeout,
            )
            resp.raise_for_status()
            payload = resp.json()
            return payload["choices"][0]["message"]["content"]
        except requests.RequestException as exc:
            raise OracleTransportError(f"chat endpoint failed: {exc}") from exc
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise OracleTransportError(f"malformed chat response: {exc}") from exc


def make_oracle(config):
    """Build an oracle instance from an OracleConfig."""
    common = {"retries": config.retries, "bold_target": config.bold_target}
    if config.kind == "first-option":
        return FirstOptionOracle(**common)
    if config.kind == "uniform-random":
        return UniformRandomOracle(seed=config.seed, **common)
    if config.kind == "scripted":
        return ScriptedOracle(config.replies, **common)
    if config.kind == "http-chat":
        endpoint = config.endpoint or os.environ.get(ENDPOINT_ENV)
        if not endpoint:
            raise ValueError(
                f"http-chat oracle needs an endpoint (flag or ${ENDPOINT_ENV})")
        if not config.model:
            raise ValueError("http-chat oracle needs a model name")
        return HttpChatOracle(endpoint, config.model, timeout=config.timeout,
                              system_message=config.system_message, **common)
    raise ValueError(f"unknown oracle kind {config.kind!r}")


def parse_replies(source, source_name="<replies>"):
    """Parse `(reply "<sentence_id>" <word> "<text>" ...)` script files."""
    replies = {}
    for form, line in sexpr.read_forms(source):
        if not (isinstance(form, list) and len(form) >= 4 and form[0] == Symbol("reply")):
            raise ParseError(
                f'{source_name}: expected (reply "<id>" <word> "<text>" ...)', line)
        sid, word = form[1], str(form[2])
        texts = [str(t) for t in form[3:]]
        replies.setdefault((sid, word), []).extend(texts)
    return replies


def parse_replies_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse_replies(fh.read(), source_name=str(path))


def prepare_prompt(kb, sentence_text, word, candidates, bold_target=False):
    """Verbalize candidates in order and build the prompt; returns both.

    This is the single code path for prompt construction, shared by the
    selection loop and by tools that only want to inspect the bytes.
    """
    if not candidates:
        raise PromptError("cannot select among zero candidates")
    options = [verbalize_candidate(kb, c) for c in candidates]
    return options, build_prompt(sentence_text, word, options, bold_target=bold_target)


def select_meaning(oracle, sentence_text, word, choice_set, kb,
                   sentence_id="", survivor_indices=None):
    """Verbalize the (surviving) candidates, prompt the oracle, parse, retry.

    Returns a Selection whose option_index is 1-based over the options as
    presented.  Raises OracleExhaustedError after retries+1 malformed
    replies; transport and scripting errors propagate as-is.
    """
    if survivor_indices is None:
        survivor_indices = range(len(choice_set.candidates))
    candidates = [choice_set.candidates[i] for i in survivor_indices]
    options, prompt = prepare_prompt(kb, sentence_text, word, candidates,
                                     bold_target=getattr(oracle, "bold_target", False))
    request = OracleRequest(prompt, sentence_id, word, len(options))
    retries = getattr(oracle, "retries", DEFAULT_RETRIES)
    attempts = 0
    last_reply = None
    while attempts <= retries:
        reply = oracle.query(request)
        attempts += 1
        index = parse_response(reply, len(options))
        if index is not None:
            return Selection(index, reply, attempts)
        last_reply = reply
    raise OracleExhaustedError(
        f"no parseable option number after {attempts} attempts for "
        f"word {word!r} (last reply: {last_reply!r})")
