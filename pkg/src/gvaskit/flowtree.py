"""Flow trees: validity, ordering with explicit witnesses, surgery, amalgamation.

A flow tree pairs a derivation tree with a run: every node is labeled by
a transition ``src ->symbol dst`` and the configurations of consecutive
children chain from the parent's source to its target.

The ordering between flow trees (componentwise-larger root plus a
recursively matching equal-arity subtree) returns explicit, replayable
embedding witnesses; the amalgamation construction consumes two such
witnesses and produces a common extension realizing both liftings.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

from .errors import (
    ChainUndefinedError,
    DimensionMismatchError,
    InvalidPositionError,
    InvalidWitnessError,
    ParseError,
    PreconditionError,
)
from .gvas import Config, Gvas, Transition, format_config

Position = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class FlowTree:
    label: Transition
    children: tuple["FlowTree", ...] = ()

    @property
    def arity(self) -> int:
        return len(self.children)

    def __eq__(self, other: object) -> bool:
        # iterative: witness chains can be thousands of nodes deep
        if not isinstance(other, FlowTree):
            return NotImplemented
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if a.label != b.label or len(a.children) != len(b.children):
                return False
            stack.extend(zip(a.children, b.children))
        return True

    def __hash__(self) -> int:
        return hash((self.label, len(self.children)))

    def __str__(self) -> str:
        return format_tree(self)


def node(src: Sequence[int], symbol, dst: Sequence[int], children: Sequence[FlowTree] = ()) -> FlowTree:
    sym = symbol if isinstance(symbol, str) else tuple(symbol)
    return FlowTree(Transition(tuple(src), sym, tuple(dst)), tuple(children))


def action_leaf(src: Sequence[int], action: Sequence[int]) -> FlowTree:
    a = tuple(action)
    dst = tuple(v + d for v, d in zip(src, a))
    return FlowTree(Transition(tuple(src), a, dst))


def root_of(t: FlowTree) -> Transition:
    return t.label


def positions(t: FlowTree) -> list[Position]:
    """All positions, depth-first pre-order; () is the root."""
    out: list[Position] = []
    stack: list[tuple[Position, FlowTree]] = [((), t)]
    while stack:
        pos, nd = stack.pop()
        out.append(pos)
        for i in range(len(nd.children), 0, -1):
            stack.append((pos + (i,), nd.children[i - 1]))
    return out


def subtree_at(t: FlowTree, p: Sequence[int]) -> FlowTree:
    cur = t
    for step, i in enumerate(p):
        if not 1 <= i <= len(cur.children):
            raise InvalidPositionError(f"position {tuple(p)} invalid at depth {step}")
        cur = cur.children[i - 1]
    return cur


def tree_size(t: FlowTree) -> int:
    n = 0
    stack = [t]
    while stack:
        nd = stack.pop()
        n += 1
        stack.extend(nd.children)
    return n


def _map_labels(t: FlowTree, f) -> FlowTree:
    """Rebuild a tree with every label passed through f; iterative, so
    chain-shaped trees of any depth are fine."""
    rebuilt: dict[int, FlowTree] = {}
    stack: list[tuple[FlowTree, bool]] = [(t, False)]
    while stack:
        nd, expanded = stack.pop()
        if expanded:
            rebuilt[id(nd)] = FlowTree(f(nd.label), tuple(rebuilt[id(c)] for c in nd.children))
            continue
        stack.append((nd, True))
        for c in nd.children:
            stack.append((c, False))
    return rebuilt[id(t)]


@dataclass(frozen=True)
class TreeDefect:
    position: Position
    message: str


def validate_tree(g: Gvas, t: FlowTree) -> Optional[TreeDefect]:
    """None when the tree is a valid flow tree of g, else the
    shallowest-leftmost violation."""
    actions = set(g.actions)
    nts = set(g.nonterminals)
    rule_set = set(g.rules)
    queue: list[tuple[Position, FlowTree]] = [((), t)]
    while queue:
        pos, nd = queue.pop(0)
        src, sym, dst = nd.label.src, nd.label.symbol, nd.label.dst
        if len(src) != g.dim or len(dst) != g.dim:
            return TreeDefect(pos, f"configuration length differs from dim {g.dim}")
        if any(v < 0 for v in src) or any(v < 0 for v in dst):
            return TreeDefect(pos, "negative coordinate")
        if isinstance(sym, tuple):
            if sym not in actions:
                return TreeDefect(pos, f"action {sym} not in the grammar")
            if nd.children:
                return TreeDefect(pos, "action node must be a leaf")
            if dst != tuple(a + b for a, b in zip(src, sym)):
                return TreeDefect(pos, f"target is not source + {format_config(sym)}")
        else:
            if sym not in nts:
                return TreeDefect(pos, f"unknown nonterminal {sym!r}")
            seq = tuple(c.label.symbol for c in nd.children)
            if (sym, seq) not in rule_set:
                return TreeDefect(pos, f"no rule {sym} -> {' '.join(map(str, seq)) or 'eps'}")
            if not nd.children:
                if dst != src:
                    return TreeDefect(pos, "empty-rule node must have equal source and target")
            else:
                if nd.children[0].label.src != src:
                    return TreeDefect(pos, "first child does not start at the source")
                for i in range(len(nd.children) - 1):
                    if nd.children[i].label.dst != nd.children[i + 1].label.src:
                        return TreeDefect(pos, f"children {i + 1} and {i + 2} do not chain")
                if nd.children[-1].label.dst != dst:
                    return TreeDefect(pos, "last child does not end at the target")
        for i, c in enumerate(nd.children, start=1):
            queue.append((pos + (i,), c))
    return None


def shift(t: FlowTree, v: Sequence[int]) -> FlowTree:
    """Add v to every source and target; validity is preserved."""
    a = tuple(v)
    if len(a) != len(t.label.src):
        raise DimensionMismatchError(f"shift vector {a} does not match dimension {len(t.label.src)}")
    return _map_labels(t, lambda lab: Transition(
        tuple(x + y for x, y in zip(lab.src, a)),
        lab.symbol,
        tuple(x + y for x, y in zip(lab.dst, a)),
    ))


# ---------------------------------------------------------------------------
# Ordering


@dataclass(frozen=True)
class Lifting:
    """Displacement pair between comparable transitions."""

    pre: tuple[int, ...]
    post: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(v < 0 for v in self.pre) or any(v < 0 for v in self.post):
            raise ValueError("lifting components must be non-negative")

    def chain(self, other: "Lifting") -> "Lifting":
        if self.post != other.pre:
            raise ChainUndefinedError(f"cannot chain {self} with {other}")
        return Lifting(self.pre, other.post)

    def __add__(self, other: "Lifting") -> "Lifting":
        return Lifting(
            tuple(a + b for a, b in zip(self.pre, other.pre)),
            tuple(a + b for a, b in zip(self.post, other.post)),
        )

    def is_zero(self) -> bool:
        return not any(self.pre) and not any(self.post)


@dataclass(frozen=True)
class EmbeddingWitness:
    """Replayable certificate for the tree ordering.

    ``anchor`` is the position, inside the compared-against tree, of the
    equal-arity subtree that matches; child witnesses certify the
    children, in order.
    """

    anchor: Position
    children: tuple["EmbeddingWitness", ...] = ()


def transition_leq(a: Transition, b: Transition) -> bool:
    return (
        a.symbol == b.symbol
        and all(x <= y for x, y in zip(a.src, b.src))
        and all(x <= y for x, y in zip(a.dst, b.dst))
    )


def lifting_between(a: Transition, b: Transition) -> Lifting:
    return Lifting(
        tuple(y - x for x, y in zip(a.src, b.src)),
        tuple(y - x for x, y in zip(a.dst, b.dst)),
    )


def _bfs_positions(t: FlowTree) -> list[tuple[Position, FlowTree]]:
    """Positions in shortest-then-lexicographic order."""
    out: list[tuple[Position, FlowTree]] = []
    layer: list[tuple[Position, FlowTree]] = [((), t)]
    while layer:
        out.extend(layer)
        layer = [
            (pos + (i,), c)
            for pos, nd in layer
            for i, c in enumerate(nd.children, start=1)
        ]
    return out


def leq(s: FlowTree, t: FlowTree) -> Optional[tuple[Lifting, EmbeddingWitness]]:
    """Decide the flow-tree ordering, returning a lifting and a witness.

    Deterministic: among matching subtrees the shortest, then
    lexicographically smallest anchor wins, recursively.  Memoizes on
    node identity to avoid re-searching shared substructure.
    """
    bfs_cache: dict[int, list[tuple[Position, FlowTree]]] = {}
    memo: dict[tuple[int, int], Optional[EmbeddingWitness]] = {}

    def bfs(nd: FlowTree) -> list[tuple[Position, FlowTree]]:
        got = bfs_cache.get(id(nd))
        if got is None:
            got = _bfs_positions(nd)
            bfs_cache[id(nd)] = got
        return got

    def go(a: FlowTree, b: FlowTree) -> Optional[EmbeddingWitness]:
        key = (id(a), id(b))
        if key in memo:
            return memo[key]
        result: Optional[EmbeddingWitness] = None
        if transition_leq(a.label, b.label):
            for pos, candidate in bfs(b):
                if candidate.arity != a.arity:
                    continue
                if not transition_leq(a.label, candidate.label):
                    continue
                ws = []
                for ca, cb in zip(a.children, candidate.children):
                    w = go(ca, cb)
                    if w is None:
                        break
                    ws.append(w)
                else:
                    result = EmbeddingWitness(pos, tuple(ws))
                    break
        memo[key] = result
        return result

    w = go(s, t)
    if w is None:
        return None
    return lifting_between(s.label, t.label), w


def replay(witness: EmbeddingWitness, s: FlowTree, t: FlowTree) -> Lifting:
    """Verify a witness against a tree pair in linear time.

    Returns the root lifting; raises :class:`InvalidWitnessError` when any
    clause fails.
    """
    if not transition_leq(s.label, t.label):
        raise InvalidWitnessError(f"roots not comparable: {s.label} vs {t.label}")
    try:
        anchor = subtree_at(t, witness.anchor)
    except InvalidPositionError as e:
        raise InvalidWitnessError(str(e)) from None
    if anchor.arity != s.arity:
        raise InvalidWitnessError(f"anchor arity {anchor.arity} differs from {s.arity}")
    if not transition_leq(s.label, anchor.label):
        raise InvalidWitnessError("anchor label not above the source root")
    if len(witness.children) != s.arity:
        raise InvalidWitnessError("witness arity differs from the source arity")
    for w, a, b in zip(witness.children, s.children, anchor.children):
        replay(w, a, b)
    return lifting_between(s.label, t.label)


# ---------------------------------------------------------------------------
# Homeomorphic embedding and the adorned-tree cross-check


def _subtrees(t) -> Iterator:
    stack = [t]
    while stack:
        nd = stack.pop(0)
        yield nd
        stack.extend(nd[1])


def _embeds(s, t, le: Callable) -> bool:
    """Homeomorphic embedding of generic (label, children) trees.

    Children embed as a subsequence; greedy leftmost matching is complete
    because a later match never enables an earlier one.
    """
    memo: dict[tuple[int, int], bool] = {}

    def go(a, b) -> bool:
        key = (id(a), id(b))
        if key in memo:
            return memo[key]
        out = False
        for cand in _subtrees(b):
            if not le(a[0], cand[0]):
                continue
            if len(a[1]) > len(cand[1]):
                continue
            i = 0
            ok = True
            for child in a[1]:
                while i < len(cand[1]) and not go(child, cand[1][i]):
                    i += 1
                if i == len(cand[1]):
                    ok = False
                    break
                i += 1
            if ok:
                out = True
                break
        memo[key] = out
        return out

    return go(s, t)


def _as_generic(t: FlowTree):
    return (t.label, tuple(_as_generic(c) for c in t.children))


def hom_embeds(s: FlowTree, t: FlowTree) -> bool:
    """Plain homeomorphic embedding with transitions compared pointwise.

    Strictly weaker than the flow-tree ordering: arity may grow and no
    root clause is imposed.
    """
    return _embeds(_as_generic(s), _as_generic(t), transition_leq)


Instance = tuple  # (kind key, configuration chain)


def adorn(t: FlowTree) -> tuple:
    """Relabel each node with its full rule instance.

    The label records which rule (or action) fired together with the
    chain of configurations across the children, so label comparability
    forces equal shape.
    """
    chain = (t.label.src,) + tuple(c.label.dst for c in t.children)
    if isinstance(t.label.symbol, tuple):
        key = ("act", t.label.symbol)
        chain = (t.label.src, t.label.dst)
    else:
        key = ("rule", t.label.symbol, tuple(c.label.symbol for c in t.children))
    return ((key, chain), tuple(adorn(c) for c in t.children))


def instance_leq(a: Instance, b: Instance) -> bool:
    return a[0] == b[0] and all(
        all(x <= y for x, y in zip(ca, cb)) for ca, cb in zip(a[1], b[1])
    )


def leq_via_adorn(s: FlowTree, t: FlowTree) -> bool:
    """Ordering decided through adorned trees; independent cross-check of
    :func:`leq` as a boolean."""
    return transition_leq(s.label, t.label) and _embeds(adorn(s), adorn(t), instance_leq)


# ---------------------------------------------------------------------------
# Surgery


def substitute(t: FlowTree, p: Sequence[int], u: FlowTree) -> FlowTree:
    """Replace the subtree at p by u, shifting siblings to keep the chain.

    Requires the replaced subtree to be below u in the tree ordering;
    siblings left of the spine shift by the lifting's pre component,
    siblings right of it by the post component.
    """
    target = subtree_at(t, p)
    cmp = leq(target, u)
    if cmp is None:
        raise PreconditionError("replaced subtree is not below the replacement")
    delta, _ = cmp
    a, b = delta.pre, delta.post

    def go(nd: FlowTree, path: tuple[int, ...]) -> FlowTree:
        if not path:
            return u
        i = path[0]
        lab = Transition(
            tuple(x + y for x, y in zip(nd.label.src, a)),
            nd.label.symbol,
            tuple(x + y for x, y in zip(nd.label.dst, b)),
        )
        kids = (
            tuple(shift(c, a) for c in nd.children[: i - 1])
            + (go(nd.children[i - 1], path[1:]),)
            + tuple(shift(c, b) for c in nd.children[i:])
        )
        return FlowTree(lab, kids)

    return go(t, tuple(p))


def replace_children(t: FlowTree, replacements: Sequence[tuple[FlowTree, Lifting]]) -> FlowTree:
    """Swap every child for a root-wise larger tree, lifting the root by
    the chained displacements."""
    if len(replacements) != t.arity:
        raise PreconditionError(f"{len(replacements)} replacements for arity {t.arity}")
    for child, (u, d) in zip(t.children, replacements):
        expected = Transition(
            tuple(x + y for x, y in zip(child.label.src, d.pre)),
            child.label.symbol,
            tuple(x + y for x, y in zip(child.label.dst, d.post)),
        )
        if u.label != expected:
            raise PreconditionError(f"replacement root {u.label} is not {expected}")
    if t.arity == 0:
        return t
    total = replacements[0][1]
    for _, d in replacements[1:]:
        total = total.chain(d)
    lab = Transition(
        tuple(x + y for x, y in zip(t.label.src, total.pre)),
        t.label.symbol,
        tuple(x + y for x, y in zip(t.label.dst, total.post)),
    )
    return FlowTree(lab, tuple(u for u, _ in replacements))


def amalgamate(
    s: FlowTree,
    t1: FlowTree,
    w1: EmbeddingWitness,
    t2: FlowTree,
    w2: EmbeddingWitness,
) -> FlowTree:
    """Common extension of two trees extending s, realizing both liftings.

    With ``s <= t1`` via lifting D1 and ``s <= t2`` via D2, the result s'
    satisfies ``t1 <= s'`` via D2, ``t2 <= s'`` via D1, and hence
    ``s <= s'`` via D1 + D2.  Both witnesses are replayed first; the
    construction recurses through the anchors, merges the children, and
    splices the merged block back into t2 and then t1.
    """
    replay(w1, s, t1)
    replay(w2, s, t2)

    def go(a: FlowTree, b1: FlowTree, v1: EmbeddingWitness, b2: FlowTree, v2: EmbeddingWitness) -> FlowTree:
        sub1 = subtree_at(b1, v1.anchor)
        sub2 = subtree_at(b2, v2.anchor)
        d1 = lifting_between(a.label, sub1.label)
        merged = tuple(
            go(ca, c1, u1, c2, u2)
            for ca, c1, u1, c2, u2 in zip(a.children, sub1.children, v1.children, sub2.children, v2.children)
        )
        lab = Transition(
            tuple(x + y for x, y in zip(sub2.label.src, d1.pre)),
            sub2.label.symbol,
            tuple(x + y for x, y in zip(sub2.label.dst, d1.post)),
        )
        block = FlowTree(lab, merged)
        widened = substitute(b2, v2.anchor, block)
        return substitute(b1, v1.anchor, widened)

    return go(s, t1, w1, t2, w2)


# ---------------------------------------------------------------------------
# Bounded enumeration (property-test fuel)


def enumerate_trees(
    g: Gvas,
    max_nodes: int,
    bound: int,
    symbols: Sequence | None = None,
    sources: Sequence[Config] | None = None,
) -> Iterator[FlowTree]:
    """All valid flow trees with at most ``max_nodes`` nodes whose
    configurations stay within ``{0..bound}^dim``, in a deterministic
    order.  Intended for exhaustive desk-scale property checks."""
    grid_cfgs: list[Config] = []

    def all_cfgs(prefix: tuple[int, ...]) -> None:
        if len(prefix) == g.dim:
            grid_cfgs.append(prefix)
            return
        for v in range(bound + 1):
            all_cfgs(prefix + (v,))

    all_cfgs(())
    syms = list(symbols) if symbols is not None else list(g.nonterminals) + list(g.actions)
    srcs = list(sources) if sources is not None else grid_cfgs

    def trees(symbol, src: Config, budget: int) -> Iterator[FlowTree]:
        if budget < 1:
            return
        if isinstance(symbol, tuple):
            dst = tuple(a + b for a, b in zip(src, symbol))
            if all(0 <= v <= bound for v in dst):
                yield FlowTree(Transition(src, symbol, dst))
            return
        for _, rhs in g.rules_for(symbol):
            if not rhs:
                yield FlowTree(Transition(src, symbol, src))
                continue
            for kids in child_seqs(rhs, src, budget - 1):
                yield FlowTree(Transition(src, symbol, kids[-1].label.dst), kids)

    def child_seqs(rhs, src: Config, budget: int) -> Iterator[tuple[FlowTree, ...]]:
        if len(rhs) > budget:
            return
        head, rest = rhs[0], rhs[1:]
        for first in trees(head, src, budget - len(rest)):
            if not rest:
                yield (first,)
                continue
            used = tree_size(first)
            for tail in child_seqs(rest, first.label.dst, budget - used):
                yield (first,) + tail

    for symbol in syms:
        for src in srcs:
            yield from trees(symbol, src, max_nodes)


# ---------------------------------------------------------------------------
# Serialization: nested s-expressions, and DOT for diagrams.


def format_tree(t: FlowTree) -> str:
    """Single-line s-expression; inverse of :func:`parse_tree`."""
    dim = len(t.label.src)

    def cfg(c: Config) -> str:
        return str(c[0]) if dim == 1 else format_config(c)

    def sym(s) -> str:
        return s if isinstance(s, str) else format_config(s)

    pieces: list[str] = []
    stack: list[tuple[str, FlowTree | None]] = [("open", t)]
    while stack:
        kind, nd = stack.pop()
        if kind == "close":
            pieces.append(")")
            continue
        label = f"({cfg(nd.label.src)} {sym(nd.label.symbol)} {cfg(nd.label.dst)})"
        pieces.append((" " if pieces else "") + "(" + label)
        stack.append(("close", None))
        for c in reversed(nd.children):
            stack.append(("open", c))
    return "".join(pieces)


_TOKEN = re.compile(r"\(|\)|-?\d+(?:,-?\d+)*|[A-Za-z_][A-Za-z0-9_']*")


def parse_tree(text: str) -> FlowTree:
    """Parse the s-expression tree format.

    Scalars are one-dimensional configurations; parenthesized comma
    tuples are vectors (actions are always written this way).
    """
    pos = 0
    tokens: list[tuple[str, int]] = []
    for m in _TOKEN.finditer(text):
        gap = text[pos : m.start()]
        if gap.strip():
            raise ParseError(f"unexpected {gap.strip()[0]!r}", 1, pos + 1)
        tokens.append((m.group(0), m.start() + 1))
        pos = m.end()
    if text[pos:].strip():
        raise ParseError(f"unexpected {text[pos:].strip()[0]!r}", 1, pos + 1)
    cursor = 0

    def peek() -> tuple[str, int]:
        if cursor >= len(tokens):
            raise ParseError("unexpected end of input", 1, len(text) + 1)
        return tokens[cursor]

    def take(expected: str | None = None) -> tuple[str, int]:
        nonlocal cursor
        tok = peek()
        if expected is not None and tok[0] != expected:
            raise ParseError(f"expected {expected!r}, got {tok[0]!r}", 1, tok[1])
        cursor += 1
        return tok

    def parse_value():
        tok, col = peek()
        if tok == "(":
            take()
            inner, _ = take()
            if not re.fullmatch(r"-?\d+(,-?\d+)*", inner):
                raise ParseError(f"expected a vector, got {inner!r}", 1, col)
            take(")")
            return tuple(int(v) for v in inner.split(","))
        take()
        if re.fullmatch(r"-?\d+", tok):
            return (int(tok),)
        return tok

    def parse_label() -> Transition:
        take("(")
        src = parse_value()
        symbol = parse_value()
        dst = parse_value()
        take(")")
        if isinstance(src, str) or isinstance(dst, str):
            raise ParseError("configurations must be numeric", 1, 1)
        return Transition(src, symbol, dst)

    frames: list[tuple[Transition, list[FlowTree]]] = []
    tree: FlowTree | None = None
    while tree is None:
        take("(")
        frames.append((parse_label(), []))
        while peek()[0] == ")":
            take(")")
            label, kids = frames.pop()
            closed = FlowTree(label, tuple(kids))
            if not frames:
                tree = closed
                break
            frames[-1][1].append(closed)
    if cursor != len(tokens):
        raise ParseError("trailing input after tree", 1, tokens[cursor][1])
    return tree


def to_dot(t: FlowTree, name: str = "flowtree") -> str:
    """DOT rendering with one node per transition, numbered in pre-order."""
    lines = [f"digraph {name} {{", "  node [shape=box];"]

    def sym(s) -> str:
        return s if isinstance(s, str) else format_config(s)

    counter = 0
    stack: list[tuple[FlowTree, int | None]] = [(t, None)]
    while stack:
        nd, parent = stack.pop()
        me = counter
        counter += 1
        label = f"{format_config(nd.label.src)} ->{sym(nd.label.symbol)} {format_config(nd.label.dst)}"
        lines.append(f'  n{me} [label="{label}"];')
        if parent is not None:
            lines.append(f"  n{parent} -> n{me};")
        for c in reversed(nd.children):
            stack.append((c, me))
    lines.append("}")
    return "\n".join(lines) + "\n"
