"""Bounded reachability: the fixpoint engine behind every semantic query.

A pair (x, y) enters the table for symbol X exactly when some flow tree
for ``x ->X y`` keeps every node configuration inside the grid
``{0..B}^dim``.  Relations are sparse boolean matrices indexed by grid
cells; rules are binarized into chains of two-factor joins and the least
fixpoint is evaluated semi-naively, round by round.

Each newly discovered pair is stamped with its discovery round.  Witness
flow trees are reconstructed on demand by searching, per table entry, for
the first justification (rule declaration order, then lexicographically
smallest intermediate configurations) whose children all carry strictly
smaller stamps; strict descent makes the reconstruction well-founded and
deterministic without storing a derivation per pair.
"""

from __future__ import annotations

import functools
from collections import deque
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from scipy import sparse

from .errors import (
    NotInTableError,
    OutOfGridError,
    ResourceLimitError,
    UnknownSymbolError,
)
from .flowtree import FlowTree
from .gvas import Config, Gvas, Transition, fatal_defects

DEFAULT_MAX_CELLS = 1 << 21
DEFAULT_MAX_PAIRS = 60_000_000


@dataclass(frozen=True)
class Grid:
    """Mixed-radix bijection between {0..bound}^dim and 0..size-1."""

    dim: int
    bound: int

    @property
    def size(self) -> int:
        return (self.bound + 1) ** self.dim

    def contains(self, c: Sequence[int]) -> bool:
        return len(c) == self.dim and all(0 <= v <= self.bound for v in c)

    def encode(self, c: Sequence[int]) -> int:
        idx = 0
        for v in reversed(c):
            idx = idx * (self.bound + 1) + v
        return idx

    def decode(self, idx: int) -> Config:
        out = []
        for _ in range(self.dim):
            idx, v = divmod(idx, self.bound + 1)
            out.append(v)
        return tuple(out)

    def coords_matrix(self) -> np.ndarray:
        """All grid cells as a (size, dim) array, row i = decode(i)."""
        return self.decode_many(np.arange(self.size, dtype=np.int64))

    def decode_many(self, idx: np.ndarray) -> np.ndarray:
        """Vectorized decode: (n,) indices to an (n, dim) coordinate array."""
        idx = np.asarray(idx, dtype=np.int64)
        cols = []
        for _ in range(self.dim):
            idx, v = np.divmod(idx, self.bound + 1)
            cols.append(v)
        return np.stack(cols, axis=1) if cols else np.zeros((len(idx), 0), dtype=np.int64)


def _action_matrix(grid: Grid, a: tuple[int, ...]) -> sparse.csr_matrix:
    coords = grid.coords_matrix()
    shifted = coords + np.asarray(a, dtype=np.int64)
    ok = np.all((shifted >= 0) & (shifted <= grid.bound), axis=1)
    rows = np.nonzero(ok)[0]
    offset = grid.encode(tuple(v if v > 0 else 0 for v in a)) - grid.encode(tuple(-v if v < 0 else 0 for v in a))
    cols = rows + offset
    data = np.ones(len(rows), dtype=bool)
    return sparse.csr_matrix((data, (rows, cols)), shape=(grid.size, grid.size), dtype=bool)


def _empty(n: int) -> sparse.csr_matrix:
    return sparse.csr_matrix((n, n), dtype=bool)


class ReachTable:
    """Per-symbol bounded reachability relation with witness reconstruction.

    Immutable once built; safe to share.
    """

    def __init__(self, g, bound, grid, stamps, suffix_refs):
        self.gvas: Gvas = g
        self.bound: int = bound
        self.grid: Grid = grid
        self._stamps = stamps  # key -> csr int32, key is ("sym", nt) or ("aux", rule, i)
        self._suffix_refs = suffix_refs  # (rule, i) -> key of the suffix starting at child i
        self._action_mats: dict[tuple, sparse.csr_matrix] = {}

    # -- raw access -----------------------------------------------------

    def _action_mat(self, a: tuple[int, ...]) -> sparse.csr_matrix:
        m = self._action_mats.get(a)
        if m is None:
            m = _action_matrix(self.grid, a)
            self._action_mats[a] = m
        return m

    def _stamp_of(self, key, s: int, d: int) -> int:
        m = self._stamps[key]
        lo, hi = m.indptr[s], m.indptr[s + 1]
        cols = m.indices[lo:hi]
        pos = np.searchsorted(cols, d)
        if pos < len(cols) and cols[pos] == d:
            return int(m.data[lo + pos])
        return 0

    def _row(self, symbol, s: int) -> np.ndarray:
        """Destination indices reachable from cell s via one symbol."""
        if isinstance(symbol, tuple):
            m = self._action_mat(symbol)
            lo, hi = m.indptr[s], m.indptr[s + 1]
            return m.indices[lo:hi].astype(np.int64)
        m = self._stamps[("sym", symbol)]
        lo, hi = m.indptr[s], m.indptr[s + 1]
        return m.indices[lo:hi].astype(np.int64)

    # -- public queries ---------------------------------------------------

    def symbols(self) -> tuple:
        return tuple(self.gvas.nonterminals) + tuple(self.gvas.actions)

    def contains(self, symbol, x: Sequence[int], y: Sequence[int]) -> bool:
        if not self.grid.contains(x) or not self.grid.contains(y):
            return False
        s, d = self.grid.encode(x), self.grid.encode(y)
        if isinstance(symbol, tuple):
            m = self._action_mat(symbol)
            return bool(m[s, d])
        if symbol not in self.gvas.nonterminals:
            raise UnknownSymbolError(f"unknown symbol {symbol!r}")
        return self._stamp_of(("sym", symbol), s, d) > 0

    def successors(self, symbol, x: Sequence[int]) -> list[Config]:
        if not self.grid.contains(x):
            raise OutOfGridError(f"{tuple(x)} outside grid bound {self.bound}")
        idxs = self._row(symbol, self.grid.encode(x))
        return sorted(self.grid.decode(int(i)) for i in idxs)

    def pairs(self, symbol) -> Iterator[tuple[Config, Config]]:
        if isinstance(symbol, tuple):
            m = self._action_mat(symbol)
        else:
            m = self._stamps[("sym", symbol)]
        coo = m.tocoo()
        for s, d in zip(coo.row, coo.col):
            yield self.grid.decode(int(s)), self.grid.decode(int(d))

    def count(self, symbol) -> int:
        if isinstance(symbol, tuple):
            return int(self._action_mat(symbol).nnz)
        return int(self._stamps[("sym", symbol)].nnz)

    def pairs_arrays(self, symbol) -> tuple[np.ndarray, np.ndarray]:
        """Source and destination cell indices as parallel arrays.

        Bulk companion to :meth:`pairs`; decode with ``grid.decode_many``.
        """
        if isinstance(symbol, tuple):
            m = self._action_mat(symbol)
        else:
            m = self._stamps[("sym", symbol)]
        coo = m.tocoo()
        return coo.row.astype(np.int64), coo.col.astype(np.int64)

    # -- witness reconstruction -------------------------------------------

    def _feasible(self, ref, s: int, d: int, below: int) -> bool:
        """Is the pair present with stamp strictly below ``below``?"""
        kind = ref[0]
        if kind == "act":
            m = self._action_mat(ref[1])
            lo, hi = m.indptr[s], m.indptr[s + 1]
            return d in m.indices[lo:hi]
        return 0 < self._stamp_of(ref, s, d) < below

    def _symbol_ref(self, symbol):
        return ("act", symbol) if isinstance(symbol, tuple) else ("sym", symbol)

    def _justify(self, rule_idx: int, rhs, s: int, d: int, below: int) -> list[int] | None:
        """Intermediate cells for one rule application, or None.

        Children must all have stamps strictly below ``below``; picks the
        lexicographically smallest configuration at each position subject
        to the suffix staying feasible.
        """
        k = len(rhs)
        if k == 0:
            return [] if s == d else None
        if k == 1:
            return [] if self._feasible(self._symbol_ref(rhs[0]), s, d, below) else None
        mids: list[int] = []
        cur = s
        for i in range(k - 1):
            head = rhs[i]
            suffix = self._suffix_refs[(rule_idx, i + 1)]
            if isinstance(head, tuple):
                m = self._action_mat(head)
                lo, hi = m.indptr[cur], m.indptr[cur + 1]
                cands = [int(c) for c in m.indices[lo:hi]]
            else:
                m = self._stamps[("sym", head)]
                lo, hi = m.indptr[cur], m.indptr[cur + 1]
                cands = [int(c) for c, v in zip(m.indices[lo:hi], m.data[lo:hi]) if 0 < v < below]
            cands.sort(key=self.grid.decode)
            nxt = None
            for c in cands:
                if self._feasible(suffix, c, d, below):
                    nxt = c
                    break
            if nxt is None:
                return None
            mids.append(nxt)
            cur = nxt
        return mids

    def _build(self, symbol, s: int, d: int) -> FlowTree:
        src, dst = self.grid.decode(s), self.grid.decode(d)
        if isinstance(symbol, tuple):
            return FlowTree(Transition(src, symbol, dst))
        below = self._stamp_of(("sym", symbol), s, d)
        if below <= 0:
            raise NotInTableError(f"{src} ->{symbol} {dst} not in table")
        for rule_idx, rhs in self.gvas.rules_for(symbol):
            mids = self._justify(rule_idx, rhs, s, d, below)
            if mids is None:
                continue
            cells = [s] + mids + ([d] if rhs else [])
            children = tuple(
                self._build(rhs[i], cells[i], cells[i + 1]) for i in range(len(rhs))
            )
            return FlowTree(Transition(src, symbol, dst), children)
        raise NotInTableError(f"no justification for {src} ->{symbol} {dst}")  # unreachable

    def witness(self, x: Sequence[int], symbol, y: Sequence[int]) -> FlowTree:
        """Deterministic valid flow tree with root ``x ->symbol y``."""
        if not self.grid.contains(x) or not self.grid.contains(y):
            raise NotInTableError(f"{tuple(x)} or {tuple(y)} outside grid")
        if isinstance(symbol, tuple):
            if tuple(map(sum, zip(x, symbol))) != tuple(y):
                raise NotInTableError(f"{tuple(y)} is not {tuple(x)} + {symbol}")
            return FlowTree(Transition(tuple(x), symbol, tuple(y)))
        if symbol not in self.gvas.nonterminals:
            raise UnknownSymbolError(f"unknown symbol {symbol!r}")
        return self._build(symbol, self.grid.encode(x), self.grid.encode(y))


def bounded_reach(
    g: Gvas,
    bound: int,
    *,
    max_cells: int = DEFAULT_MAX_CELLS,
    max_pairs: int = DEFAULT_MAX_PAIRS,
) -> ReachTable:
    """Least fixpoint of the grid-bounded reachability relations.

    Deterministic: the output (including witness stamps) depends only on
    the grammar value and the bound.
    """
    if bound < 0:
        raise ValueError("bound must be non-negative")
    bad = fatal_defects(g)
    if bad:
        raise ValueError("invalid GVAS: " + "; ".join(str(d) for d in bad))
    grid = Grid(g.dim, bound)
    if grid.size > max_cells:
        raise ResourceLimitError(f"grid has {grid.size} cells, limit {max_cells}")
    n = grid.size

    # Binarize: each rule becomes a chain of two-factor joins over
    # auxiliary suffix relations; suffixes of length one alias the symbol.
    def symbol_ref(s):
        return ("act", s) if isinstance(s, tuple) else ("sym", s)

    defs: list[tuple[tuple, tuple]] = []  # (target key, op)
    suffix_refs: dict[tuple[int, int], tuple] = {}
    for r, (lhs, rhs) in enumerate(g.rules):
        k = len(rhs)
        for i in range(1, k):
            suffix_refs[(r, i)] = symbol_ref(rhs[k - 1]) if i == k - 1 else ("aux", r, i)
        target = ("sym", lhs)
        if k == 0:
            defs.append((target, ("eps",)))
        elif k == 1:
            defs.append((target, ("copy", symbol_ref(rhs[0]))))
        else:
            defs.append((target, ("join", symbol_ref(rhs[0]), suffix_refs[(r, 1)])))
            for i in range(1, k - 1):
                defs.append((("aux", r, i), ("join", symbol_ref(rhs[i]), suffix_refs[(r, i + 1)])))

    act_mats = {("act", a): _action_matrix(grid, a) for a in g.actions}
    defined_keys = []
    seen = set()
    for target, _ in defs:
        if target not in seen:
            seen.add(target)
            defined_keys.append(target)
    for nt in g.nonterminals:  # ruleless nonterminals still get (empty) tables
        key = ("sym", nt)
        if key not in seen:
            seen.add(key)
            defined_keys.append(key)

    fulls: dict[tuple, sparse.csr_matrix] = {k: _empty(n) for k in defined_keys}
    deltas: dict[tuple, sparse.csr_matrix] = {k: _empty(n) for k in defined_keys}
    stamp_parts: dict[tuple, list] = {k: [] for k in defined_keys}

    def full_of(ref):
        return act_mats[ref] if ref[0] == "act" else fulls[ref]

    def delta_of(ref):
        if ref[0] == "act":
            return act_mats[ref] if round_no == 1 else _empty(n)
        return deltas[ref]

    identity = sparse.identity(n, dtype=bool, format="csr")
    round_no = 1
    while True:
        contribs: dict[tuple, list] = {}
        for target, op in defs:
            acc = contribs.setdefault(target, [])
            if op[0] == "eps":
                if round_no == 1:
                    acc.append(identity)
            elif op[0] == "copy":
                d = delta_of(op[1])
                if d.nnz:
                    acc.append(d)
            else:
                _, left, right = op
                ld, rd = delta_of(left), delta_of(right)
                if ld.nnz:
                    acc.append(ld @ full_of(right))
                if rd.nnz:
                    acc.append(rd.__rmatmul__(full_of(left)))
        progressed = False
        new_deltas: dict[tuple, sparse.csr_matrix] = {}
        for key in defined_keys:
            parts = contribs.get(key, [])
            parts = [p for p in parts if p.nnz]
            if not parts:
                new_deltas[key] = _empty(n)
                continue
            combined = parts[0]
            for p in parts[1:]:
                combined = combined + p
            fresh = combined > fulls[key]
            fresh.eliminate_zeros()
            if fresh.nnz == 0:
                new_deltas[key] = _empty(n)
                continue
            progressed = True
            fulls[key] = fulls[key] + fresh
            coo = fresh.tocoo()
            stamp_parts[key].append((round_no, coo.row.copy(), coo.col.copy()))
            new_deltas[key] = fresh.tocsr()
        if not progressed:
            break
        deltas = new_deltas
        total = sum(m.nnz for m in fulls.values())
        if total > max_pairs:
            raise ResourceLimitError(f"relation store reached {total} pairs, limit {max_pairs}")
        round_no += 1

    stamps: dict[tuple, sparse.csr_matrix] = {}
    for key in defined_keys:
        parts = stamp_parts[key]
        if not parts:
            stamps[key] = sparse.csr_matrix((n, n), dtype=np.int32)
            continue
        rows = np.concatenate([p[1] for p in parts])
        cols = np.concatenate([p[2] for p in parts])
        vals = np.concatenate([np.full(len(p[1]), p[0], dtype=np.int32) for p in parts])
        stamps[key] = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=np.int32)
    return ReachTable(g, bound, grid, stamps, suffix_refs)


@functools.lru_cache(maxsize=4)
def cached_reach(g: Gvas, bound: int) -> ReachTable:
    """Small table cache for membership-style repeated queries."""
    return bounded_reach(g, bound)


class ReachCone:
    """Single-source slice of the bounded reachability relation.

    Tabled, demand-driven evaluation: only (symbol, source) pairs that
    some rule application actually touches are computed, which keeps
    high-dimensional membership queries far below the all-pairs table.
    Discovered pairs carry insertion stamps, so witness reconstruction
    works exactly as for the full table.
    """

    def __init__(self, g: Gvas, source, bound: int, max_entries: int = 5_000_000):
        bad = fatal_defects(g)
        if bad:
            raise ValueError("invalid GVAS: " + "; ".join(str(d) for d in bad))
        self.gvas = g
        self.bound = bound
        self.grid = Grid(g.dim, bound)
        if not self.grid.contains(source):
            raise OutOfGridError(f"{tuple(source)} outside grid bound {bound}")
        self.source: Config = tuple(source)
        self._max_entries = max_entries
        self._act_memo: dict[tuple, int | None] = {}
        self._offsets = {a: self.grid.encode(tuple(max(v, 0) for v in a)) - self.grid.encode(tuple(-min(v, 0) for v in a)) for a in g.actions}

        self._defs: dict[tuple, list[tuple]] = {}
        self._suffix_refs: dict[tuple[int, int], tuple] = {}
        for r, (lhs, rhs) in enumerate(g.rules):
            k = len(rhs)
            for i in range(1, k):
                self._suffix_refs[(r, i)] = self._symbol_ref(rhs[k - 1]) if i == k - 1 else ("aux", r, i)
            target = ("sym", lhs)
            if k == 0:
                self._defs.setdefault(target, []).append(("eps",))
            elif k == 1:
                self._defs.setdefault(target, []).append(("copy", self._symbol_ref(rhs[0])))
            else:
                self._defs.setdefault(target, []).append(("join", self._symbol_ref(rhs[0]), self._suffix_refs[(r, 1)]))
                for i in range(1, k - 1):
                    self._defs.setdefault(("aux", r, i), []).append(("join", self._symbol_ref(rhs[i]), self._suffix_refs[(r, i + 1)]))
        for nt in g.nonterminals:
            self._defs.setdefault(("sym", nt), [])

        self._tables: dict[tuple[tuple, int], dict[int, int]] = {}
        self._deps: dict[tuple[tuple, int], set[tuple[tuple, int]]] = {}
        self._stamp = 0
        self._evaluate_all(("sym", g.start), self.grid.encode(self.source))

    @staticmethod
    def _symbol_ref(s):
        return ("act", s) if isinstance(s, tuple) else ("sym", s)

    def _act_dst(self, a, s: int) -> int | None:
        key = (a, s)
        hit = self._act_memo.get(key, -1)
        if hit != -1:
            return hit
        c = self.grid.decode(s)
        out = tuple(x + y for x, y in zip(c, a))
        d = s + self._offsets[a] if all(0 <= v <= self.bound for v in out) else None
        self._act_memo[key] = d
        return d

    def _lookup(self, ref, s: int, reader: tuple[tuple, int]) -> dict[int, int]:
        if ref[0] == "act":
            d = self._act_dst(ref[1], s)
            return {d: 0} if d is not None else {}
        cell = (ref, s)
        if cell not in self._tables:
            self._tables[cell] = {}
            self._enqueue(cell)
        self._deps.setdefault(cell, set()).add(reader)
        return self._tables[cell]

    def _enqueue(self, cell) -> None:
        if cell not in self._queued:
            self._queued.add(cell)
            self._queue.append(cell)

    def _evaluate_all(self, root_key: tuple, root_src: int) -> None:
        self._queue: deque = deque()
        self._queued: set = set()
        self._tables[(root_key, root_src)] = {}
        self._enqueue((root_key, root_src))
        while self._queue:
            cell = self._queue.popleft()
            self._queued.discard(cell)
            key, s = cell
            grew = False
            table = self._tables[cell]

            def add(d: int) -> None:
                nonlocal grew
                if d not in table:
                    self._stamp += 1
                    table[d] = self._stamp
                    grew = True

            for op in self._defs.get(key, ()):
                if op[0] == "eps":
                    add(s)
                elif op[0] == "copy":
                    for d in list(self._lookup(op[1], s, cell)):
                        add(d)
                else:
                    _, left, right = op
                    for m in list(self._lookup(left, s, cell)):
                        for d in list(self._lookup(right, m, cell)):
                            add(d)
            if grew:
                if self._stamp > self._max_entries:
                    raise ResourceLimitError(f"reachability cone exceeded {self._max_entries} entries")
                for dep in self._deps.get(cell, ()):
                    self._enqueue(dep)

    # -- queries -----------------------------------------------------------

    def successors(self, symbol, x: Sequence[int]) -> list[Config]:
        """Destinations from a demanded source (the cone's own source is
        always demanded for the start symbol)."""
        if not self.grid.contains(x):
            raise OutOfGridError(f"{tuple(x)} outside grid bound {self.bound}")
        s = self.grid.encode(x)
        if isinstance(symbol, tuple):
            d = self._act_dst(symbol, s)
            return [self.grid.decode(d)] if d is not None else []
        cell = (("sym", symbol), s)
        got = self._tables.get(cell)
        if got is None:
            raise NotInTableError(f"source {tuple(x)} was never demanded for {symbol!r}")
        return sorted(self.grid.decode(d) for d in got)

    def _feasible(self, ref, s: int, d: int, below: int) -> bool:
        if ref[0] == "act":
            return self._act_dst(ref[1], s) == d
        got = self._tables.get((ref, s), {})
        st = got.get(d, 0)
        return 0 < st < below

    def _justify(self, rule_idx: int, rhs, s: int, d: int, below: int) -> list[int] | None:
        k = len(rhs)
        if k == 0:
            return [] if s == d else None
        if k == 1:
            return [] if self._feasible(self._symbol_ref(rhs[0]), s, d, below) else None
        mids: list[int] = []
        cur = s
        for i in range(k - 1):
            head = rhs[i]
            suffix = self._suffix_refs[(rule_idx, i + 1)]
            if isinstance(head, tuple):
                nxt_d = self._act_dst(head, cur)
                cands = [nxt_d] if nxt_d is not None else []
            else:
                got = self._tables.get((("sym", head), cur), {})
                cands = sorted((c for c, v in got.items() if 0 < v < below), key=self.grid.decode)
            nxt = None
            for c in cands:
                if self._feasible(suffix, c, d, below):
                    nxt = c
                    break
            if nxt is None:
                return None
            mids.append(nxt)
            cur = nxt
        return mids

    def _build(self, symbol, s: int, d: int) -> FlowTree:
        src, dst = self.grid.decode(s), self.grid.decode(d)
        if isinstance(symbol, tuple):
            return FlowTree(Transition(src, symbol, dst))
        below = self._tables.get((("sym", symbol), s), {}).get(d, 0)
        if below <= 0:
            raise NotInTableError(f"{src} ->{symbol} {dst} not in the cone")
        for rule_idx, rhs in self.gvas.rules_for(symbol):
            mids = self._justify(rule_idx, rhs, s, d, below)
            if mids is None:
                continue
            cells = [s] + mids + ([d] if rhs else [])
            children = tuple(self._build(rhs[i], cells[i], cells[i + 1]) for i in range(len(rhs)))
            return FlowTree(Transition(src, symbol, dst), children)
        raise NotInTableError(f"no justification for {src} ->{symbol} {dst}")

    def witness(self, x: Sequence[int], symbol, y: Sequence[int]) -> FlowTree:
        if isinstance(symbol, tuple):
            if tuple(map(sum, zip(x, symbol))) != tuple(y):
                raise NotInTableError(f"{tuple(y)} is not {tuple(x)} + {symbol}")
            return FlowTree(Transition(tuple(x), symbol, tuple(y)))
        return self._build(symbol, self.grid.encode(x), self.grid.encode(y))


def reach_from(g: Gvas, x, bound: int, max_entries: int = 5_000_000) -> ReachCone:
    """Demand-driven bounded reachability from one configuration."""
    return ReachCone(g, tuple(x), bound, max_entries)


@functools.lru_cache(maxsize=16)
def cached_cone(g: Gvas, x: tuple, bound: int) -> ReachCone:
    return ReachCone(g, x, bound)


def reachable_from(table: ReachTable, x: Sequence[int], word: Sequence) -> list[Config]:
    """Configurations reachable from x through a word of symbols.

    Relational composition of the per-symbol tables; the empty word gives
    back ``{x}``.  Sorted lexicographically.
    """
    if not table.grid.contains(x):
        raise OutOfGridError(f"{tuple(x)} outside grid bound {table.bound}")
    nts = set(table.gvas.nonterminals)
    acts = set(table.gvas.actions)
    front = {table.grid.encode(x)}
    for s in word:
        sym = s if isinstance(s, str) else tuple(s)
        if isinstance(sym, str):
            if sym not in nts:
                raise UnknownSymbolError(f"unknown nonterminal {sym!r}")
        elif sym not in acts:
            raise UnknownSymbolError(f"unknown action {sym}")
        nxt: set[int] = set()
        for idx in front:
            nxt.update(int(i) for i in table._row(sym, idx))
        front = nxt
        if not front:
            break
    return sorted(table.grid.decode(i) for i in front)


def witness_flow_tree(table: ReachTable, x: Sequence[int], symbol, y: Sequence[int]) -> FlowTree:
    return table.witness(x, symbol, y)
