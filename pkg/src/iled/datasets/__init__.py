"""Small bundled datasets: the worked examples and the fighting task.

Each dataset is a directory holding some of ``modes.lp``, ``background.lp``,
``stream.lp``, ``hypothesis.lp`` and extra programs (``expected.lp``,
``truth.lp``, ...).

>>> from iled import datasets
>>> ds = datasets.load("table3")
>>> [w.id for w in ds.windows]
[1]
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from ..event_calculus import BackgroundTheory, Window
from ..logic import Program
from ..modes import LanguageConfig

__all__ = ["Dataset", "load", "names", "path", "load_program"]

_ROOT = Path(__file__).resolve().parent


def names() -> List[str]:
    return sorted(p.name for p in _ROOT.iterdir() if p.is_dir() and not p.name.startswith("_"))


def path(name: str) -> Path:
    p = _ROOT / name
    if not p.is_dir():
        raise KeyError(f"unknown dataset {name!r}; available: {', '.join(names())}")
    return p


@dataclass(frozen=True)
class Dataset:
    name: str
    language: Optional[LanguageConfig]
    background: BackgroundTheory
    windows: List[Window]
    hypothesis: Optional[object]  # a Hypothesis when hypothesis.lp exists


def load_program(name: str, filename: str) -> Program:
    from ..syntax import parse_program
    f = path(name) / filename
    return parse_program(f.read_text(), str(f))


def load(name: str, depth_bound: int = 1) -> Dataset:
    from .. import io
    d = path(name)
    lang = io.load_modes(d / "modes.lp", depth_bound) if (d / "modes.lp").exists() else None
    bg = io.load_background(d / "background.lp") if (d / "background.lp").exists() else BackgroundTheory()
    windows = io.load_stream(d / "stream.lp") if (d / "stream.lp").exists() else []
    hyp = io.read_hypothesis(d / "hypothesis.lp") if (d / "hypothesis.lp").exists() else None
    return Dataset(name, lang, bg, windows, hyp)
