"""Grammar computers for the fast-growing hierarchy below omega^omega.

The core grammar at depth d works on d+2 counters: a running value, a
shuttle buffer, and d digit counters encoding an ordinal below omega^d
(digit i is the coefficient of omega^i).  Its start symbol rewrites the
value from v to the hierarchy function of v at the encoded level, and can
never exceed it; wrapping the core with an input loader and an output
drain yields a weak computer for any fixed level.

Witness runs are constructed, never searched: exact trees come out of a
structural recursion on the level, so construction cost is linear in tree
size and scales to every instance the value cap admits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import CapExceededError, OrdinalRangeError
from .flowtree import FlowTree, action_leaf, node
from .gvas import Config, Gvas
from .ordinal import DEFAULT_CAP, Ordinal, fast_growing, fast_growing_iter, natural_sum
from .reach import ReachTable, cached_reach
from .weakcomp import WeakComputer

VAL, BUF = 0, 1  # counter roles; digit i lives at coordinate 2 + i


def _unit(dim: int, i: int, sign: int) -> tuple[int, ...]:
    v = [0] * dim
    v[i] = sign
    return tuple(v)


@dataclass(frozen=True)
class CoreView:
    """A core-grammar configuration read as (value, buffer, level)."""

    val: int
    buf: int
    level: Ordinal

    @classmethod
    def from_config(cls, c: Sequence[int]) -> "CoreView":
        return cls(c[0], c[1], Ordinal(tuple(c[2:])))

    def to_config(self, d: int) -> Config:
        if self.level.degree > d:
            raise OrdinalRangeError(f"{self.level} needs more than {d} digits")
        digits = self.level.coeffs + (0,) * (d - self.level.degree)
        return (self.val, self.buf) + digits


def _names(d: int) -> list[str]:
    return ["Fn", "Iter", "Load"] + [f"Desc{i}" for i in range(1, d)]


def _actions(d: int) -> tuple[tuple[int, ...], ...]:
    dim = d + 2
    out = []
    for c in range(dim):
        out.append(_unit(dim, c, 1))
        out.append(_unit(dim, c, -1))
    return tuple(out)


def _core_rules(d: int) -> list[tuple[str, tuple]]:
    dim = d + 2
    iv, dv = _unit(dim, VAL, 1), _unit(dim, VAL, -1)
    ib, db = _unit(dim, BUF, 1), _unit(dim, BUF, -1)

    def idig(i):
        return _unit(dim, 2 + i, 1)

    def ddig(i):
        return _unit(dim, 2 + i, -1)

    rules: list[tuple[str, tuple]] = [
        ("Fn", (iv,)),
        ("Fn", (ddig(0), "Iter", "Fn", idig(0))),
    ]
    for i in range(1, d):
        rules.append(("Fn", (ddig(i), idig(i - 1), f"Desc{i}", ddig(i - 1), idig(i))))
    rules += [
        ("Iter", ("Load",)),
        ("Iter", (dv, ib, "Iter", "Fn")),
        ("Load", ()),
        ("Load", (iv, db, "Load")),
    ]
    for i in range(1, d):
        rules.append((f"Desc{i}", ("Load", "Fn")))
        rules.append((f"Desc{i}", (dv, ib, idig(i - 1), f"Desc{i}", ddig(i - 1))))
    return rules


def build_core(d: int) -> Gvas:
    """The depth-d core grammar; start symbol ``Fn``.

    d = 1 yields six rules over three counters; each extra depth adds one
    descent nonterminal with its limit and spin rules.
    """
    if d < 1:
        raise ValueError("depth must be at least 1")
    return Gvas(d + 2, tuple(_names(d)), _actions(d), tuple(_core_rules(d)), "Fn")


def build_computer(alpha: Ordinal, d: int) -> Gvas:
    """The core grammar wrapped as a weak computer for the level ``alpha``.

    The new start rule loads the level's digits, runs ``Fn`` once, and
    drains the value into the buffer, which doubles as the output counter.
    """
    if d < 1:
        raise ValueError("depth must be at least 1")
    if alpha.degree > d:
        raise OrdinalRangeError(f"{alpha} needs more than {d} digits")
    dim = d + 2
    dv, ib = _unit(dim, VAL, -1), _unit(dim, BUF, 1)
    loader = tuple(
        _unit(dim, 2 + i, 1) for i in range(d) for _ in range(alpha.coeff(i))
    )
    rules: list[tuple[str, tuple]] = [("Main", loader + ("Fn", "Emit"))]
    rules += _core_rules(d)
    rules += [("Emit", ()), ("Emit", (dv, ib, "Emit"))]
    return Gvas(dim, ("Main",) + tuple(_names(d)) + ("Emit",), _actions(d), tuple(rules), "Main")


def as_weak_computer(alpha: Ordinal, d: int, cap: int = DEFAULT_CAP) -> WeakComputer:
    return WeakComputer(
        build_computer(alpha, d),
        aux=d,
        oracle=lambda n: fast_growing(alpha, n, cap),
        cap=cap,
    )


# ---------------------------------------------------------------------------
# Derivation schemas


def _leftmost_apply(g: Gvas, word: tuple, nt: str, rule_rhs: tuple) -> tuple:
    for i, s in enumerate(word):
        if s == nt:
            return word[:i] + rule_rhs + word[i + 1 :]
    raise ValueError(f"no occurrence of {nt}")


def derivation_check(d: int, kind: str, n: int = 0, i: Optional[int] = None) -> tuple[tuple, ...]:
    """Produce and verify one of the schematic derivations of the core
    grammar; ``kind`` is one of base, succ, limit, transfer.

    Returns the full step-by-step trace (each step is verified to be a
    one-step rewrite).  The limit schema needs a digit index 0 < i < d.
    """
    from .gvas import derive_step

    g = build_core(d)
    dim = d + 2
    iv, dv = _unit(dim, VAL, 1), _unit(dim, VAL, -1)
    ib, db = _unit(dim, BUF, 1), _unit(dim, BUF, -1)

    def idig(k):
        return _unit(dim, 2 + k, 1)

    def ddig(k):
        return _unit(dim, 2 + k, -1)

    steps: list[tuple[str, tuple]]  # (nonterminal rewritten, its rhs)
    if kind == "base":
        start: tuple = ("Fn",)
        steps = [("Fn", (iv,))]
        target = (iv,)
    elif kind == "succ":
        start = ("Fn",)
        steps = [("Fn", (ddig(0), "Iter", "Fn", idig(0)))]
        steps += [("Iter", (dv, ib, "Iter", "Fn"))] * n
        steps += [("Iter", ("Load",))]
        target = (ddig(0),) + (dv, ib) * n + ("Load",) + ("Fn",) * (n + 1) + (idig(0),)
    elif kind == "limit":
        if i is None or not 0 < i < d:
            raise ValueError("limit schema needs a digit index 0 < i < d")
        start = ("Fn",)
        steps = [("Fn", (ddig(i), idig(i - 1), f"Desc{i}", ddig(i - 1), idig(i)))]
        steps += [(f"Desc{i}", (dv, ib, idig(i - 1), f"Desc{i}", ddig(i - 1)))] * n
        steps += [(f"Desc{i}", ("Load", "Fn"))]
        target = (
            (ddig(i), idig(i - 1))
            + (dv, ib, idig(i - 1)) * n
            + ("Load", "Fn")
            + (ddig(i - 1),) * (n + 1)
            + (idig(i),)
        )
    elif kind == "transfer":
        start = ("Load",)
        steps = [("Load", (iv, db, "Load"))] * n
        steps += [("Load", ())]
        target = (iv, db) * n
    else:
        raise ValueError(f"unknown schema kind {kind!r}")

    trace = [start]
    for nt, rhs in steps:
        nxt = _leftmost_apply(g, trace[-1], nt, rhs)
        if nxt not in derive_step(g, trace[-1]):
            raise AssertionError(f"{trace[-1]} does not rewrite to {nxt}")
        trace.append(nxt)
    if trace[-1] != target:
        raise AssertionError(f"schema mismatch: {trace[-1]} != {target}")
    return tuple(trace)


# ---------------------------------------------------------------------------
# Constructed witnesses


def build_witness(alpha: Ordinal, n: int, d: int, cap: int = DEFAULT_CAP) -> FlowTree:
    """Valid flow tree rewriting (n, 0, alpha) to (F(n), 0, alpha) via ``Fn``.

    Structural recursion on the level: base increments, successor levels
    stash the value and re-apply, limit levels step down the fundamental
    sequence.  Raises the cap error before building anything oversized.
    """
    if d < 1 or alpha.degree > d:
        raise OrdinalRangeError(f"{alpha} does not fit depth {d}")
    fast_growing(alpha, n, cap)  # cap guard; the recursion re-derives values
    dim = d + 2
    iv, dv = _unit(dim, VAL, 1), _unit(dim, VAL, -1)
    ib, db = _unit(dim, BUF, 1), _unit(dim, BUF, -1)

    def idig(k):
        return _unit(dim, 2 + k, 1)

    def ddig(k):
        return _unit(dim, 2 + k, -1)

    def load_tree(c: Config) -> FlowTree:
        # transfer the whole buffer into the value; chains are value-long,
        # so build bottom-up instead of recursing
        chain = []
        cur = c
        while cur[BUF] > 0:
            first = action_leaf(cur, iv)
            second = action_leaf(first.label.dst, db)
            chain.append((cur, first, second))
            cur = second.label.dst
        tree = node(cur, "Load", cur)
        for start, first, second in reversed(chain):
            tree = node(start, "Load", tree.label.dst, (first, second, tree))
        return tree

    def iter_tree(c: Config) -> FlowTree:
        # apply Fn once per unit of value, stashing as it goes
        chain = []
        cur = c
        while cur[VAL] > 0:
            a = action_leaf(cur, dv)
            b = action_leaf(a.label.dst, ib)
            chain.append((cur, a, b))
            cur = b.label.dst
        inner = load_tree(cur)
        tree = node(cur, "Iter", inner.label.dst, (inner,))
        for start, a, b in reversed(chain):
            fn = fn_tree(tree.label.dst)
            tree = node(start, "Iter", fn.label.dst, (a, b, tree, fn))
        return tree

    def desc_tree(i: int, c: Config) -> FlowTree:
        # walk the fundamental-sequence index down to the stash, then apply
        chain = []
        cur = c
        while cur[VAL] > 0:
            a = action_leaf(cur, dv)
            b = action_leaf(a.label.dst, ib)
            bump = action_leaf(b.label.dst, idig(i - 1))
            chain.append((cur, a, b, bump))
            cur = bump.label.dst
        ld = load_tree(cur)
        fn = fn_tree(ld.label.dst)
        tree = node(cur, f"Desc{i}", fn.label.dst, (ld, fn))
        for start, a, b, bump in reversed(chain):
            down = action_leaf(tree.label.dst, ddig(i - 1))
            tree = node(start, f"Desc{i}", down.label.dst, (a, b, bump, tree, down))
        return tree

    def fn_tree(c: Config) -> FlowTree:
        level = Ordinal(tuple(c[2:]))
        if level.is_zero():
            leaf = action_leaf(c, iv)
            return node(c, "Fn", leaf.label.dst, (leaf,))
        if level.is_successor():
            drop = action_leaf(c, ddig(0))
            it = iter_tree(drop.label.dst)
            fn = fn_tree(it.label.dst)
            back = action_leaf(fn.label.dst, idig(0))
            return node(c, "Fn", back.label.dst, (drop, it, fn, back))
        i = next(k for k, v in enumerate(level.coeffs) if v > 0)
        drop = action_leaf(c, ddig(i))
        bump = action_leaf(drop.label.dst, idig(i - 1))
        ds = desc_tree(i, bump.label.dst)
        down = action_leaf(ds.label.dst, ddig(i - 1))
        back = action_leaf(down.label.dst, idig(i))
        return node(c, "Fn", back.label.dst, (drop, bump, ds, down, back))

    start = CoreView(n, 0, alpha).to_config(d)
    return fn_tree(start)


def computer_witness(alpha: Ordinal, n: int, d: int, cap: int = DEFAULT_CAP) -> FlowTree:
    """Complete run of the wrapped computer: load the level, apply the
    core once, drain the value into the output counter."""
    core = build_witness(alpha, n, d, cap)
    dim = d + 2
    dv, ib = _unit(dim, VAL, -1), _unit(dim, BUF, 1)
    start: Config = (n, 0) + (0,) * d
    leaves = []
    cur = start
    for i in range(d):
        for _ in range(alpha.coeff(i)):
            leaf = action_leaf(cur, _unit(dim, 2 + i, 1))
            leaves.append(leaf)
            cur = leaf.label.dst
    assert cur == core.label.src

    def emit_tree(c: Config) -> FlowTree:
        chain = []
        cur = c
        while cur[VAL] > 0:
            a = action_leaf(cur, dv)
            b = action_leaf(a.label.dst, ib)
            chain.append((cur, a, b))
            cur = b.label.dst
        tree = node(cur, "Emit", cur)
        for start, a, b in reversed(chain):
            tree = node(start, "Emit", tree.label.dst, (a, b, tree))
        return tree

    emit = emit_tree(core.label.dst)
    return node(start, "Main", emit.label.dst, tuple(leaves) + (core, emit))


# ---------------------------------------------------------------------------
# Exhaustive bounded safety scan


@dataclass(frozen=True)
class SafetyScan:
    symbol: str
    entries: int
    violations: tuple[tuple[Config, Config], ...]
    max_slack: Optional[int]
    cap_hits: int


def safety_check(d: int, symbol: str, bound: int, table: Optional[ReachTable] = None) -> SafetyScan:
    """Check every table entry of one core nonterminal against its
    value-bound clause.

    Clauses (by symbol): ``Fn`` caps the final value sum at the hierarchy
    function of the entry sum; ``Iter`` at its value-fold iterate;
    ``Load`` preserves the sum exactly; ``Desc_i`` caps it at the level
    augmented by value copies of the digit below.  Every clause also
    demands the level be restored.  The hierarchy cap sits just above the
    grid, so a cap overflow certifies the clause vacuously (the bound
    exceeds anything the grid can hold); such entries count as cap hits.
    """
    g = build_core(d)
    if symbol not in g.nonterminals:
        raise ValueError(f"unknown core symbol {symbol!r}")
    if table is None:
        table = cached_reach(g, bound)
    rows, cols = table.pairs_arrays(symbol)
    entries = len(rows)
    if entries == 0:
        return SafetyScan(symbol, 0, (), None, 0)
    src = table.grid.decode_many(rows)
    dst = table.grid.decode_many(cols)
    cap = 2 * bound + 2

    bad_level = ~np.all(src[:, 2:] == dst[:, 2:], axis=1)
    s_in = src[:, VAL] + src[:, BUF]
    s_out = dst[:, VAL] + dst[:, BUF]

    if symbol == "Load":
        bad_sum = s_out != s_in
        slack = np.zeros(entries, dtype=np.int64)
        cap_hits = 0
    else:
        if symbol == "Fn":
            keys = np.concatenate([src[:, 2:], s_in[:, None]], axis=1)

            def limit_for(key) -> Optional[int]:
                level = Ordinal(tuple(key[:-1]))
                return fast_growing(level, int(key[-1]), cap)

        elif symbol == "Iter":
            keys = np.concatenate([src[:, 2:], src[:, VAL][:, None], s_in[:, None]], axis=1)

            def limit_for(key) -> Optional[int]:
                level = Ordinal(tuple(key[:-2]))
                return fast_growing_iter(level, int(key[-2]), int(key[-1]), cap)

        else:  # Desc_i
            i = int(symbol[4:])
            keys = np.concatenate([src[:, 2:], src[:, VAL][:, None], s_in[:, None]], axis=1)

            def limit_for(key) -> Optional[int]:
                level = natural_sum(Ordinal(tuple(key[:-2])), Ordinal.omega(i - 1, int(key[-2])))
                return fast_growing(level, int(key[-1]), cap)

        uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
        limits = np.empty(len(uniq), dtype=np.int64)
        capped = np.zeros(len(uniq), dtype=bool)
        for j, key in enumerate(uniq):
            try:
                limits[j] = limit_for(key)
            except CapExceededError:
                limits[j] = np.iinfo(np.int64).max
                capped[j] = True
        per_entry_limit = limits[inverse]
        bad_sum = s_out > per_entry_limit
        finite = ~capped[inverse]
        slack = np.where(finite, per_entry_limit - s_out, 0)
        cap_hits = int(np.count_nonzero(capped[inverse]))

    bad = bad_level | bad_sum
    viol_idx = np.nonzero(bad)[0][:32]
    violations = tuple(
        (tuple(int(v) for v in src[k]), tuple(int(v) for v in dst[k])) for k in viol_idx
    )
    finite_slacks = slack[~bad] if symbol != "Load" else slack
    max_slack = int(finite_slacks.max()) if len(finite_slacks) else None
    return SafetyScan(symbol, entries, violations, max_slack, cap_hits)
