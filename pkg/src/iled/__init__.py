"""Incremental learning of Event Calculus definitions from annotated streams.

The learner keeps a hypothesis of ``initiatedAt``/``terminatedAt`` clauses
and revises it one window at a time. Every clause carries a support set of
most-specific bottom clauses, so specializations can be computed without
rereading old data, and a revision triggers at most one pass over the
stored windows.

>>> from iled import Learner, datasets
>>> ds = datasets.load("example5")
>>> h = Learner(ds.background, ds.language).learn(ds.windows)
>>> print(h)
initiatedAt(fighting(X,Y),T) :- happensAt(active(X),T), holdsAt(close(X,Y,23),T).
"""

from .errors import DataError, IledError, ModeError, NoSolution, ParseError, ResourceLimit, UnsafeClauseError
from .event_calculus import (
    BackgroundTheory, Window, classify_clause, covers, covers_window, fires, items, recognize,
)
from .incremental import (
    AnnotatedClause, Hypothesis, Learner, StepReport, SupportSet, audit, iled_step, single_pass_recheck,
)
from .induction import learn_batch, reduce_refined, revise
from .io import load_background, load_modes, load_stream, read_hypothesis, write_hypothesis
from .kernel import KernelSet, build_kernel
from .logic import Clause, Const, Fn, Literal, Program, Var, theta_subsumes_clause
from .metrics import Metrics, evaluate
from .modes import LanguageConfig, ModeDeclaration
from .store import HistoricalMemory
from .syntax import format_clause, parse_clause, parse_program
from .synthetic import generate_synthetic, split_windows

__version__ = "0.1.0"

__all__ = [
    "IledError", "ParseError", "DataError", "ModeError", "UnsafeClauseError", "NoSolution", "ResourceLimit",
    "BackgroundTheory", "Window", "recognize", "covers", "covers_window", "classify_clause", "fires", "items",
    "AnnotatedClause", "Hypothesis", "Learner", "StepReport", "SupportSet", "audit", "iled_step",
    "single_pass_recheck", "revise", "reduce_refined", "learn_batch", "KernelSet", "build_kernel",
    "load_stream", "load_modes", "load_background", "read_hypothesis", "write_hypothesis",
    "Clause", "Const", "Fn", "Literal", "Program", "Var", "theta_subsumes_clause",
    "Metrics", "evaluate", "LanguageConfig", "ModeDeclaration", "HistoricalMemory",
    "parse_clause", "parse_program", "format_clause", "generate_synthetic", "split_windows",
]
