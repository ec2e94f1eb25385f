"""Core semantic objects: replicated systems, configurations, steps.

A replicated system is a finite-state program run by an unknown number of
identical agents; transitions rewrite multisets of states and never create
or destroy agents.  All types here are immutable values and safe to share
between concurrent tasks.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import InputError, PreconditionError
from .presburger import Formula, free_vars, is_quantifier_free

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _check_name(name: str, what: str) -> str:
    if not isinstance(name, str) or not _NAME_RE.match(name):
        raise InputError(f"invalid {what} name {name!r}")
    return name


@dataclass(frozen=True)
class Configuration:
    """Multiset of states: a map state -> count with zero entries absent.

    Counts are arbitrary-precision integers.  The same type describes the
    pre and post multisets of transitions.
    """

    counts: tuple[tuple[str, int], ...]

    @staticmethod
    def make(counts: Mapping[str, int] | Iterable[tuple[str, int]]) -> "Configuration":
        items = counts.items() if isinstance(counts, Mapping) else counts
        agg: dict[str, int] = {}
        for state, n in items:
            if n < 0:
                raise InputError(f"negative count for state {state!r}")
            if n:
                agg[state] = agg.get(state, 0) + n
        return Configuration(tuple(sorted(agg.items())))

    @staticmethod
    def zero() -> "Configuration":
        return Configuration(())

    def __getitem__(self, state: str) -> int:
        for s, n in self.counts:
            if s == state:
                return n
        return 0

    def as_dict(self) -> dict[str, int]:
        return dict(self.counts)

    @property
    def size(self) -> int:
        return sum(n for _, n in self.counts)

    @property
    def support(self) -> frozenset[str]:
        return frozenset(s for s, _ in self.counts)

    def covers(self, other: "Configuration") -> bool:
        return all(self[s] >= n for s, n in other.counts)

    def add_delta(self, delta: Mapping[str, int]) -> "Configuration":
        d = self.as_dict()
        for s, k in delta.items():
            v = d.get(s, 0) + k
            if v < 0:
                raise PreconditionError(f"count of {s!r} would become negative")
            if v:
                d[s] = v
            else:
                d.pop(s, None)
        return Configuration(tuple(sorted(d.items())))

    def __str__(self) -> str:
        if not self.counts:
            return "{}"
        return "{" + ", ".join(f"{s}:{n}" for s, n in self.counts) + "}"


@dataclass(frozen=True)
class Transition:
    """Multiset rewriting rule pre -> post with |pre| = |post|.

    Agent conservation is enforced; no-op rules (pre equal to post) are
    accepted by the model because their enabledness still matters for
    dead-transition analysis, but file input rejects them (see cli).
    """

    name: str
    pre: Configuration
    post: Configuration

    def __post_init__(self):
        _check_name(self.name, "transition")
        if self.pre.size != self.post.size:
            raise InputError(
                f"transition {self.name!r} must conserve agents "
                f"(|pre|={self.pre.size}, |post|={self.post.size})")

    @property
    def arity(self) -> int:
        return self.pre.size

    @property
    def is_noop(self) -> bool:
        return self.pre == self.post


def delta(t: Transition) -> dict[str, int]:
    """Effect of t: post - pre as a sparse integer vector over states."""
    d = {s: -n for s, n in t.pre.counts}
    for s, n in t.post.counts:
        d[s] = d.get(s, 0) + n
        if d[s] == 0:
            del d[s]
    return d


@dataclass(frozen=True)
class ReplicatedSystem:
    states: tuple[str, ...]
    transitions: tuple[Transition, ...]

    @staticmethod
    def make(states: Iterable[str], transitions: Iterable[Transition]) -> "ReplicatedSystem":
        return ReplicatedSystem(tuple(states), tuple(transitions))

    def __post_init__(self):
        if not self.states:
            raise InputError("a system needs at least one state")
        seen: set[str] = set()
        for s in self.states:
            _check_name(s, "state")
            if s in seen:
                raise InputError(f"duplicate state {s!r}")
            seen.add(s)
        names: set[str] = set()
        for t in self.transitions:
            if t.name in names:
                raise InputError(f"duplicate transition name {t.name!r}")
            names.add(t.name)
            for ref in t.pre.support | t.post.support:
                if ref not in seen:
                    raise InputError(
                        f"transition {t.name!r} references undeclared state {ref!r}")

    @property
    def arity(self) -> int:
        return max((t.arity for t in self.transitions), default=0)

    def transition(self, name: str) -> Transition:
        for t in self.transitions:
            if t.name == name:
                return t
        raise InputError(f"unknown transition {name!r}")

    def check_config(self, C: Configuration) -> Configuration:
        for s in C.support:
            if s not in self.states:
                raise InputError(f"configuration references undeclared state {s!r}")
        return C

    def check_formula(self, phi: Formula, quantifier_free: bool = False) -> Formula:
        extra = free_vars(phi) - set(self.states)
        if extra:
            raise InputError(f"formula references non-state variable(s) {sorted(extra)}")
        if quantifier_free and not is_quantifier_free(phi):
            raise InputError("formula must be quantifier-free")
        return phi


def enabled(C: Configuration, t: Transition) -> bool:
    """C enables t iff C covers pre(t)."""
    return C.covers(t.pre)


def step(C: Configuration, t: Transition) -> Configuration:
    """Successor C + delta(t); only defined when t is enabled at C."""
    if not enabled(C, t):
        raise PreconditionError(f"transition {t.name!r} is not enabled at {C}")
    return C.add_delta(delta(t))


@dataclass(frozen=True)
class StableTerminationProperty:
    """Precondition plus the postconditions the system must settle into.

    Induces the temporal property: from every configuration satisfying the
    precondition, almost surely eventually one postcondition holds forever.
    """

    name: str
    pre: Formula
    posts: tuple[Formula, ...]

    def __post_init__(self):
        _check_name(self.name, "property")
        if not self.posts:
            raise InputError(f"property {self.name!r} needs at least one postcondition")

    def validate(self, system: ReplicatedSystem) -> "StableTerminationProperty":
        system.check_formula(self.pre, quantifier_free=True)
        for p in self.posts:
            system.check_formula(p, quantifier_free=True)
        return self
