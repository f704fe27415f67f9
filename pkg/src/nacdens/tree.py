"""Nesting structures and their text form.

A structure is written as ``G(1.3333; 1, G(2; 2, 3))``: a family letter
(``C`` Clayton, ``G`` Gumbel, ``F`` Frank, ``J`` Joe, ``A`` AMH, ``T`` tilted
outer power), its parameter(s), then a comma-separated list of 1-based leaf
indices and nested structures.  Tilted outer powers take
``T(theta, c, base; ...)`` with base ``E`` (``exp(-t)``) or ``C``
(``1/(1+t)``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import DslError, UnsupportedStructureError
from .generators import BASES, Family, Generator
from .inner_coeffs import NodePair

MAX_LEVELS = 3

Child = Union[int, "NacTree"]


@dataclass(frozen=True)
class NacTree:
    """A generator with an ordered tuple of children (leaf indices or subtrees)."""

    generator: Generator
    children: tuple

    def __post_init__(self):
        children = tuple(self.children)
        if not children:
            raise UnsupportedStructureError("a node needs at least one child")
        for ch in children:
            if isinstance(ch, NacTree):
                NodePair(self.generator, ch.generator)
            elif not isinstance(ch, int) or isinstance(ch, bool) or ch < 1:
                raise DslError(f"leaf indices must be positive integers, got {ch!r}")
        object.__setattr__(self, "children", children)

    @property
    def leaves(self) -> tuple[int, ...]:
        out = []
        for ch in self.children:
            out.extend(ch.leaves if isinstance(ch, NacTree) else (ch,))
        return tuple(out)

    @property
    def d(self) -> int:
        return len(self.leaves)

    @property
    def levels(self) -> int:
        sub = [ch.levels for ch in self.children if isinstance(ch, NacTree)]
        return 1 + max(sub, default=0)

    @property
    def subtrees(self) -> tuple[NacTree, ...]:
        return tuple(ch for ch in self.children if isinstance(ch, NacTree))

    def validate(self) -> NacTree:
        leaves = self.leaves
        if sorted(leaves) != list(range(1, len(leaves) + 1)):
            raise DslError(f"leaf indices must be 1..{len(leaves)} exactly once, got {leaves}")
        if self.levels > MAX_LEVELS:
            raise UnsupportedStructureError(
                f"{self.levels} nesting levels; at most {MAX_LEVELS} are supported")
        return self

    def __str__(self):
        return format_tree(self)


def nac(generator: Generator, *children) -> NacTree:
    return NacTree(generator, tuple(children))


def with_params(tree: NacTree, theta0: float, theta1: float) -> NacTree:
    """Copy of ``tree`` with root parameter ``theta0`` and all others ``theta1``."""

    def rebuild(node, theta):
        kids = tuple(rebuild(ch, theta1) if isinstance(ch, NacTree) else ch
                     for ch in node.children)
        return NacTree(node.generator.with_theta(theta), kids)

    return rebuild(tree, theta0)


# --------------------------------------------------------------------------
# text form

_TOKEN = re.compile(r"\s*(?:(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
                    r"|(?P<name>[A-Za-z]+)|(?P<punct>[(),;]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise DslError(f"unexpected character at position {pos}: {text[pos:pos + 10]!r}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, -1)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None:
            raise DslError("unexpected end of input")
        if (kind and tok[0] != kind) or (value and tok[1] != value):
            want = value or kind
            raise DslError(f"expected {want!r} at position {tok[2]}, got {tok[1]!r}")
        self.i += 1
        return tok

    def tree(self) -> NacTree:
        _, name, pos = self.take("name")
        try:
            fam = Family(name.upper())
        except ValueError:
            raise DslError(f"unknown family {name!r} at position {pos}") from None
        self.take("punct", "(")
        params = [float(self.take("num")[1])]
        base = "E"
        while self.peek()[1] == ",":
            self.take()
            tok = self.peek()
            if tok[0] == "name":
                base = self.take()[1].upper()
                if base not in BASES:
                    raise DslError(f"unknown base {base!r} at position {tok[2]}")
            else:
                params.append(float(self.take("num")[1]))
        if fam is Family.TOP:
            if len(params) != 2:
                raise DslError("T(...) takes theta and tilt c followed by an optional base")
            gen = Generator(fam, params[0], params[1], BASES[base])
        else:
            if len(params) != 1 or base != "E":
                raise DslError(f"{name}(...) takes exactly one parameter")
            gen = Generator(fam, params[0])
        self.take("punct", ";")
        children = [self.child()]
        while self.peek()[1] == ",":
            self.take()
            children.append(self.child())
        self.take("punct", ")")
        return NacTree(gen, tuple(children))

    def child(self):
        tok = self.peek()
        if tok[0] == "num":
            self.take()
            try:
                return int(tok[1])
            except ValueError:
                raise DslError(f"leaf index must be an integer, got {tok[1]!r}") from None
        return self.tree()


def parse(text: str) -> NacTree:
    """Parse a structure string into a validated :class:`NacTree`."""
    p = _Parser(text)
    tree = p.tree()
    if p.peek()[0] is not None:
        raise DslError(f"trailing input at position {p.peek()[2]}")
    return tree.validate()


def _fmt_num(x: float) -> str:
    return repr(float(x))


def format_tree(tree: NacTree) -> str:
    """Canonical text form; ``parse(format_tree(t)) == t``."""
    g = tree.generator
    if g.family is Family.TOP:
        head = f"T({_fmt_num(g.theta)}, {_fmt_num(g.c)}, {g.base.name}"
    else:
        head = f"{g.family.value}({_fmt_num(g.theta)}"
    kids = ", ".join(format_tree(ch) if isinstance(ch, NacTree) else str(ch)
                     for ch in tree.children)
    return f"{head}; {kids})"
