"""Mode declarations, the depth-bounded mode language and variabilization."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import ModeError
from .logic import Clause, Const, Fn, Literal, Term, Var, is_ground, variable_depth

__all__ = [
    "Placemarker", "ModeDeclaration", "LanguageConfig", "schema_bindings",
    "in_mode_language", "variabilize", "infer_var_types", "TIME_TYPE",
]

TIME_TYPE = "time"


class Placemarker:
    """``+type`` (input), ``-type`` (output) or ``#type`` (ground)."""

    __slots__ = ("kind", "type", "_hash")

    def __init__(self, kind: str, type: str):
        if kind not in "+-#" or len(kind) != 1:
            raise ValueError(f"bad placemarker kind {kind!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "type", type)
        object.__setattr__(self, "_hash", hash(("P", kind, type)))

    def __setattr__(self, key, value):
        raise AttributeError("placemarkers are immutable")

    def __eq__(self, other):
        return isinstance(other, Placemarker) and (other.kind, other.type) == (self.kind, self.type)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Placemarker({self.kind!r}, {self.type!r})"

    def __str__(self):
        return self.kind + self.type

    def __reduce__(self):
        return (Placemarker, (self.kind, self.type))


@dataclass(frozen=True)
class ModeDeclaration:
    kind: str  # "head" or "body"
    schema: Fn
    negated: bool = False

    def __post_init__(self):
        if self.kind not in ("head", "body"):
            raise ValueError("mode kind must be 'head' or 'body'")
        if self.kind == "head" and self.negated:
            raise ModeError("head mode declarations cannot be negated")

    def placemarkers(self) -> List[Placemarker]:
        out: List[Placemarker] = []

        def walk(t):
            if isinstance(t, Placemarker):
                out.append(t)
            elif isinstance(t, Fn):
                for a in t.args:
                    walk(a)
        walk(self.schema)
        return out

    def __str__(self):
        from .syntax import format_mode
        return format_mode(self)


@dataclass(frozen=True)
class LanguageConfig:
    modes: Tuple[ModeDeclaration, ...]
    depth_bound: int = 1
    type_domains: Mapping[str, Tuple[Term, ...]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if self.depth_bound < 0:
            raise ValueError("depth_bound must be non-negative")
        doms = {k: tuple(v) for k, v in dict(self.type_domains).items()}
        object.__setattr__(self, "type_domains", doms)

    @property
    def head_modes(self) -> List[ModeDeclaration]:
        return [m for m in self.modes if m.kind == "head"]

    @property
    def body_modes(self) -> List[ModeDeclaration]:
        return [m for m in self.modes if m.kind == "body"]

    def missing_types(self) -> List[str]:
        """Placemarker types with no entry in ``type_domains``."""
        seen = []
        for m in self.modes:
            for p in m.placemarkers():
                if p.type not in self.type_domains and p.type not in seen:
                    seen.append(p.type)
        return seen

    def with_domains(self, extra: Mapping[str, Iterable[Term]]) -> "LanguageConfig":
        doms = dict(self.type_domains)
        for k, v in extra.items():
            merged = list(doms.get(k, ()))
            for c in v:
                if c not in merged:
                    merged.append(c)
            doms[k] = tuple(merged)
        return LanguageConfig(self.modes, self.depth_bound, doms)


def schema_bindings(schema: Term, atom: Term, out=None) -> Optional[List[Tuple[Placemarker, Term]]]:
    """Pair each placemarker of ``schema`` with the subterm of ``atom`` at its position."""
    if out is None:
        out = []
    if isinstance(schema, Placemarker):
        out.append((schema, atom))
        return out
    if isinstance(schema, Const):
        return out if schema == atom else None
    if isinstance(schema, Fn):
        if not isinstance(atom, Fn) or atom.name != schema.name or len(atom.args) != len(schema.args):
            return None
        for s, a in zip(schema.args, atom.args):
            if schema_bindings(s, a, out) is None:
                return None
        return out
    return None


def _assign_type(types: Dict[Var, str], v: Var, t: str) -> bool:
    prev = types.get(v)
    if prev is None:
        types[v] = t
        return True
    return prev == t


def in_mode_language(c: Clause, cfg: LanguageConfig) -> bool:
    """Membership of ``c`` in the depth-bounded mode language of ``cfg``."""
    for hm in cfg.head_modes:
        pairs = schema_bindings(hm.schema, c.head)
        if pairs is None:
            continue
        types: Dict[Var, str] = {}
        ok = True
        for pm, term in pairs:
            if pm.kind == "#":
                ok = is_ground(term)
            else:
                ok = isinstance(term, Var) and _assign_type(types, term, pm.type)
            if not ok:
                break
        if ok and _body_in_language(c.body, cfg, set(types), types):
            depth = variable_depth(c)
            if all(d <= cfg.depth_bound for d in depth.values()):
                return True
    return False


def _body_in_language(body: Sequence[Literal], cfg: LanguageConfig, known: set, types: Dict[Var, str]) -> bool:
    if not body:
        return True
    lit = body[0]
    for bm in cfg.body_modes:
        if bm.negated != lit.negated:
            continue
        pairs = schema_bindings(bm.schema, lit.atom)
        if pairs is None:
            continue
        t2 = dict(types)
        outputs = set()
        ok = True
        for pm, term in pairs:
            if pm.kind == "#":
                ok = is_ground(term)
            elif pm.kind == "+":
                ok = isinstance(term, Var) and term in known and _assign_type(t2, term, pm.type)
            else:
                ok = isinstance(term, Var) and _assign_type(t2, term, pm.type)
                outputs.add(term)
            if not ok:
                break
        if ok and _body_in_language(body[1:], cfg, known | outputs, t2):
            return True
    return False


def infer_var_types(c: Clause, cfg: LanguageConfig) -> Dict[Var, str]:
    """Best-effort placemarker type of each variable of ``c``."""
    types: Dict[Var, str] = {}
    for hm in cfg.head_modes:
        pairs = schema_bindings(hm.schema, c.head)
        if pairs is not None:
            for pm, term in pairs:
                if isinstance(term, Var):
                    types.setdefault(term, pm.type)
            break
    for lit in c.body:
        for bm in cfg.body_modes:
            if bm.negated != lit.negated:
                continue
            pairs = schema_bindings(bm.schema, lit.atom)
            if pairs is not None:
                for pm, term in pairs:
                    if isinstance(term, Var):
                        types.setdefault(term, pm.type)
                break
    return types


class _Namer:
    plain = ["X", "Y", "Z", "U", "V", "W"]

    def __init__(self):
        self.n_plain = 0
        self.n_time = 0

    def fresh(self, type_: str) -> Var:
        if type_ == TIME_TYPE:
            name = "T" if self.n_time == 0 else f"T{self.n_time}"
            self.n_time += 1
        else:
            k, r = divmod(self.n_plain, len(self.plain))
            name = self.plain[r] + (str(k) if k else "")
            self.n_plain += 1
        return Var(name)


def _find_mode(modes: Sequence[ModeDeclaration], atom: Fn, negated: bool):
    for m in modes:
        if m.negated == negated:
            pairs = schema_bindings(m.schema, atom)
            if pairs is not None:
                return m, pairs
    return None, None


def _rebuild(schema: Term, atom: Term, mapping: Dict[Tuple[Term, str], Var], namer: _Namer) -> Term:
    if isinstance(schema, Placemarker):
        if schema.kind == "#":
            return atom
        key = (atom, schema.type)
        v = mapping.get(key)
        if v is None:
            v = mapping[key] = namer.fresh(schema.type)
        return v
    if isinstance(schema, Fn):
        return Fn(atom.name, [_rebuild(s, a, mapping, namer) for s, a in zip(schema.args, atom.args)])
    return atom


def variabilize(ground: Clause, cfg: LanguageConfig) -> Clause:
    """Replace +/- positions of a ground clause by variables, one per (term, type)."""
    mapping: Dict[Tuple[Term, str], Var] = {}
    namer = _Namer()
    hm, _ = _find_mode(cfg.head_modes, ground.head, False)
    if hm is None:
        raise ModeError(f"head {ground.head} matches no modeh declaration")
    head = _rebuild(hm.schema, ground.head, mapping, namer)
    body = []
    for lit in ground.body:
        bm, _ = _find_mode(cfg.body_modes, lit.atom, lit.negated)
        if bm is None:
            raise ModeError(f"body literal {lit} matches no modeb declaration")
        body.append(Literal(_rebuild(bm.schema, lit.atom, mapping, namer), lit.negated))
    return Clause(head, tuple(body))
