"""Exception hierarchy shared across the package."""


class SenseBridgeError(Exception):
    """Base class for every error this package raises deliberately."""


class ParseError(SenseBridgeError):
    """Malformed textual input (KB files, corpora, rendered logical forms)."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f" at line {line}"
            if col is not None:
                where += f", column {col}"
        super().__init__(message + where)


class KBError(SenseBridgeError):
    """Knowledge-base content problem (duplicates, dangling references)."""


class UnknownConceptError(KBError):
    """A concept id was used that the knowledge base does not declare."""


class MissingBindingError(SenseBridgeError):
    """A sense skeleton needs a role that the caller did not bind."""


class ArityError(SenseBridgeError):
    """An atom's argument count disagrees with its predicate declaration."""


class TemplateError(SenseBridgeError):
    """A verbalization template asked for a form its argument cannot take."""


class UnverbalizableCandidateError(SenseBridgeError):
    """No atom of a candidate has a template, so no option text exists."""


class PromptError(SenseBridgeError):
    """Prompt construction was given unusable options."""


class OracleError(SenseBridgeError):
    """Base class for selection-oracle failures."""


class OracleTransportError(OracleError):
    """The remote chat endpoint could not be reached or answered garbage."""


class UnscriptedKeyError(OracleError):
    """The scripted oracle has no (sentence, word) entry for this query."""


class OracleExhaustedError(OracleError):
    """Every allowed attempt produced a malformed reply."""


class StateError(SenseBridgeError):
    """Illegal operation on a disambiguation state (double commit, ...)."""


class ScoringError(SenseBridgeError):
    """Gold annotations and analyses cannot be aligned, or n = 0."""
