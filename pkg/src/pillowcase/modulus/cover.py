"""Shortest cycles in a prescribed homotopy class on a mesh graph.

The mesh records, on every edge, the word of signed crossings with a
system of arcs whose complement is a disk, so based loops read off
elements of a free group and free homotopy classes are conjugacy
classes.  To find the shortest cycle in the class of a word ``w`` the
search runs in a cover of the mesh: states pair a mesh vertex with a
small automaton node tracking the coset of the accumulated word under
the cyclic subgroup <w>, together with the number of copies of ``w``
stripped so far (the winding).  A loop based at a fence vertex is in
the class exactly when it returns to its start state with trivial coset
and winding +-1.

The automaton keeps only nodes close to the axis of ``w`` (its set of
canonical coset representatives along powers of ``w``), with a
configurable excursion slack; this bounds the cover size while keeping
every geometrically reasonable competitor.  Solvers re-run the oracle
with a widened automaton at the end as a robustness check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from ..errors import ClassUnreachable

Word = Tuple[int, ...]


def reduce_word(word: Iterable[int]) -> Word:
    out: List[int] = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def invert_word(word: Word) -> Word:
    return tuple(-x for x in reversed(word))


def concat(a: Word, b: Word) -> Word:
    out = list(a)
    for x in b:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def cyclic_reduce(word: Word) -> Word:
    w = reduce_word(word)
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return w


def _shortlex_key(w: Word):
    return (len(w), w)


class FreeHomotopyClass:
    """Conjugacy class of a cyclically reduced word in the free group."""

    def __init__(self, word: Sequence[int], slack: int = 1, k_clamp: int = 1):
        w = cyclic_reduce(tuple(word))
        if not w:
            raise ValueError("trivial class has no shortest essential cycle")
        self.word = w
        self.slack = slack
        self.k_clamp = k_clamp
        self._powers: Dict[int, Word] = {0: ()}
        self._canon_cache: Dict[Word, Tuple[Word, int]] = {}
        self._axis = self._build_axis()
        self._trans_cache: Dict[Tuple[Word, int, Word], Optional[Tuple[Word, int]]] = {}

    # -- free group bookkeeping -------------------------------------------
    def _power(self, j: int) -> Word:
        if j not in self._powers:
            w = self.word
            if j > 0:
                self._powers[j] = concat(self._power(j - 1), w)
            else:
                self._powers[j] = concat(self._power(j + 1), invert_word(w))
        return self._powers[j]

    def canon(self, g: Word) -> Tuple[Word, int]:
        """Shortlex-minimal representative of <w> g, with the stripped power.

        Returns (r, j) with g = w**j * r and r minimal.
        """
        if g in self._canon_cache:
            return self._canon_cache[g]
        J = len(g) // len(self.word) + 2
        best = None
        for j in range(-J, J + 1):
            r = concat(self._power(-j), g)
            key = _shortlex_key(r)
            if best is None or key < best[0]:
                best = (key, r, j)
        res = (best[1], best[2])
        self._canon_cache[g] = res
        return res

    def _build_axis(self) -> List[Word]:
        reps = set()
        w = self.word
        for base in (w, invert_word(w)):
            doubled = base + base
            for i in range(2 * len(w) + 1):
                r, _ = self.canon(doubled[:i])
                reps.add(r)
        return sorted(reps, key=_shortlex_key)

    def admissible(self, r: Word) -> bool:
        for ax in self._axis:
            if len(r) - len(ax) <= self.slack and r[:len(ax)] == ax:
                return True
        return False

    # -- automaton interface -----------------------------------------------
    @property
    def start(self):
        return ((), 0)

    def targets(self, node_list):
        out = []
        for i, (r, k) in enumerate(node_list):
            if r == () and abs(k) == 1:
                out.append(i)
        return out

    def step(self, node, word: Word):
        key = (node[0], node[1], word)
        if key in self._trans_cache:
            return self._trans_cache[key]
        r, k = node
        g = concat(r, word)
        r2, j = self.canon(g)
        k2 = k + j
        res: Optional[Tuple[Word, int]] = (r2, k2)
        if abs(k2) > self.k_clamp or not self.admissible(r2):
            res = None
        self._trans_cache[key] = res
        return res

    def fence_letter(self) -> int:
        """An arc letter with nonzero net exponent in the class word."""
        for letter in sorted({abs(x) for x in self.word}):
            if sum(1 if x == letter else -1 if x == -letter else 0
                   for x in self.word) != 0:
                return letter
        raise ValueError("class word is null-homologous across every arc")

    def widened(self, extra_slack: int = 1, extra_clamp: int = 0):
        return FreeHomotopyClass(self.word, slack=self.slack + extra_slack,
                                 k_clamp=self.k_clamp + extra_clamp)


class AbelianClass:
    """Cycle class prescribed by signed crossing counts with the arcs."""

    def __init__(self, target: Sequence[int], slack: int = 1):
        self.target = tuple(int(x) for x in target)
        if not any(self.target):
            raise ValueError("trivial class has no shortest essential cycle")
        self.slack = slack
        self.lo = tuple(min(0, t) - slack for t in self.target)
        self.hi = tuple(max(0, t) + slack for t in self.target)

    @property
    def start(self):
        return tuple(0 for _ in self.target)

    def targets(self, node_list):
        tgt = {self.target, tuple(-t for t in self.target)}
        return [i for i, n in enumerate(node_list) if n in tgt]

    def step(self, node, word: Word):
        vec = list(node)
        for x in word:
            vec[abs(x) - 1] += 1 if x > 0 else -1
        for i, v in enumerate(vec):
            if not (self.lo[i] <= v <= self.hi[i]):
                return None
        return tuple(vec)

    def fence_letter(self) -> int:
        for i, t in enumerate(self.target):
            if t != 0:
                return i + 1
        raise AssertionError

    def widened(self, extra_slack: int = 1, extra_clamp: int = 0):
        return AbelianClass(self.target, slack=self.slack + extra_slack)


# ---------------------------------------------------------------------------
# Cover graph
# ---------------------------------------------------------------------------


@dataclass
class CoverGraph:
    """Product of a mesh graph with a class automaton."""

    n_states: int
    n_base: int
    nodes: list
    node_index: dict
    start_idx: int
    target_idx: List[int]
    graph: csr_matrix
    base_edge: np.ndarray  # base edge id per stored cover entry
    sources: np.ndarray    # mesh vertices usable as cycle basepoints

    _rev: Optional[csr_matrix] = None
    _rev_perm: Optional[np.ndarray] = None
    _row_of_entry: Optional[np.ndarray] = None

    def state(self, node_i: int, vertex: int) -> int:
        return node_i * self.n_base + vertex

    def set_weights(self, edge_weights: np.ndarray) -> None:
        self.graph.data = edge_weights[self.base_edge]

    def reversed_graph(self) -> csr_matrix:
        """Transposed cover graph sharing the current edge weights."""
        if self._rev is None:
            marker = csr_matrix(
                (np.arange(self.graph.nnz, dtype=np.int64) + 1.0,
                 self.graph.indices.copy(), self.graph.indptr.copy()),
                shape=self.graph.shape)
            rev = marker.T.tocsr()
            self._rev_perm = rev.data.astype(np.int64) - 1
            self._rev = rev
        self._rev.data = self.graph.data[self._rev_perm]
        return self._rev

    def entry_rows(self) -> np.ndarray:
        """Tail state of each stored cover entry (CSR data order)."""
        if self._row_of_entry is None:
            counts = np.diff(self.graph.indptr)
            self._row_of_entry = np.repeat(
                np.arange(self.n_states, dtype=np.int64), counts)
        return self._row_of_entry


def build_cover(mesh, cls) -> CoverGraph:
    """Assemble the cover of the mesh associated with a homotopy class."""
    V = mesh.n_vertices
    # Group mesh edges by crossing word.
    groups: Dict[Word, List[int]] = {}
    for e, w in enumerate(mesh.words):
        groups.setdefault(tuple(w), []).append(e)
    fw = {w: np.asarray(es, dtype=np.int64) for w, es in groups.items()}

    # Abstract automaton closure from the start node.
    words = set(fw)
    words |= {invert_word(w) for w in words}
    nodes = [cls.start]
    node_index = {cls.start: 0}
    queue = [cls.start]
    while queue:
        nd = queue.pop()
        for w in words:
            nxt = cls.step(nd, w)
            if nxt is not None and nxt not in node_index:
                node_index[nxt] = len(nodes)
                nodes.append(nxt)
                queue.append(nxt)
    n_nodes = len(nodes)
    n_states = n_nodes * V

    tails = mesh.tails
    heads = mesh.heads

    rows_parts = []
    cols_parts = []
    base_parts = []
    for ni, nd in enumerate(nodes):
        for w, es in fw.items():
            nxt = cls.step(nd, w)
            if nxt is not None:
                nj = node_index[nxt]
                rows_parts.append(ni * V + tails[es])
                cols_parts.append(nj * V + heads[es])
                base_parts.append(es)
            nxt = cls.step(nd, invert_word(w))
            if nxt is not None:
                nj = node_index[nxt]
                rows_parts.append(ni * V + heads[es])
                cols_parts.append(nj * V + tails[es])
                base_parts.append(es)
    rows = np.concatenate(rows_parts)
    cols = np.concatenate(cols_parts)
    base = np.concatenate(base_parts)
    order = np.lexsort((cols, rows))
    rows = rows[order]
    cols = cols[order]
    base = base[order]
    indptr = np.searchsorted(rows, np.arange(n_states + 1))
    graph = csr_matrix((np.zeros(len(base)), cols.astype(np.int32), indptr),
                       shape=(n_states, n_states))

    letter = cls.fence_letter()
    fence_edges = mesh.edges_crossing(letter)
    if len(fence_edges) == 0:
        raise ClassUnreachable(
            f"no mesh edge crosses arc {letter}; class cannot be realized")
    sources = np.unique(np.concatenate([tails[fence_edges],
                                        heads[fence_edges]]))

    start_idx = node_index[cls.start]
    target_idx = cls.targets(nodes)
    if not target_idx:
        raise ClassUnreachable("class target state was pruned from the cover")

    return CoverGraph(
        n_states=n_states, n_base=V, nodes=nodes, node_index=node_index,
        start_idx=start_idx, target_idx=target_idx, graph=graph,
        base_edge=base, sources=sources,
    )


@dataclass
class CycleResult:
    length: float
    basepoint: int
    vertices: np.ndarray       # mesh vertices along the cycle
    base_edges: np.ndarray     # mesh edge ids along the cycle


def shortest_cycle(mesh, cover: CoverGraph, edge_weights: np.ndarray,
                   cutoff: Optional[float] = None,
                   first_hit: bool = False,
                   max_exact: int = 64) -> Optional[CycleResult]:
    """Shortest mesh cycle in the class encoded by the cover.

    Uses a joint lower-bound sweep from every fence basepoint, then exact
    single-source runs in increasing lower-bound order.  If ``first_hit``
    is set, returns the first cycle strictly shorter than ``cutoff``.
    Returns None when no cycle beats the cutoff.
    """
    cover.set_weights(edge_weights)
    V = cover.n_base
    src_states = cover.start_idx * V + cover.sources
    lim = np.inf if cutoff is None else cutoff

    dist_lb = dijkstra(cover.graph, directed=True, indices=src_states,
                       min_only=True, limit=lim)
    lbs = np.full(len(cover.sources), np.inf)
    for t in cover.target_idx:
        lbs = np.minimum(lbs, dist_lb[t * V + cover.sources])
    order = np.argsort(lbs)

    best: Optional[Tuple[float, int]] = None
    exact_runs = 0
    for oi in order:
        v = int(cover.sources[oi])
        lb = lbs[oi]
        if not np.isfinite(lb):
            break
        if best is not None and lb >= best[0]:
            break
        if cutoff is not None and lb >= cutoff:
            break
        if exact_runs >= max_exact:
            break
        exact_runs += 1
        d = dijkstra(cover.graph, directed=True,
                     indices=cover.start_idx * V + v,
                     min_only=True,
                     limit=min(lim, best[0] if best else np.inf))
        val = min(d[t * V + v] for t in cover.target_idx)
        if not np.isfinite(val):
            continue
        if cutoff is not None and val >= cutoff:
            continue
        if best is None or val < best[0]:
            best = (float(val), v)
            if first_hit:
                break

    if best is None:
        return None
    val, v = best
    return _reconstruct(cover, v, val)


def shortest_cycles(mesh, cover: CoverGraph, edge_weights: np.ndarray,
                    cutoff: float, max_exact: int = 4096,
                    max_results: int = 8,
                    ) -> Tuple[List[CycleResult], bool, float]:
    """Collect cycles in the class shorter than ``cutoff``.

    A forward sweep from all basepoints and a backward sweep to all
    targets give per-basepoint lower bounds and an admissible potential;
    exact runs on the potential-reweighted graph then only explore the
    near-critical corridor through each candidate basepoint.  Returns
    the cycles found, whether the candidate list was exhausted (the
    flag is the certificate that no shorter cycle exists), and a
    certified lower bound on the length of the shortest cycle in the
    class under the given weights (the sweep bound, capped at
    ``cutoff`` where the sweeps were truncated).
    """
    cover.set_weights(edge_weights)
    V = cover.n_base
    src_states = cover.start_idx * V + cover.sources
    tgt_states = np.concatenate(
        [t * V + cover.sources for t in cover.target_idx])

    fwd = dijkstra(cover.graph, directed=True, indices=src_states,
                   min_only=True, limit=cutoff)
    bwd = dijkstra(cover.reversed_graph(), directed=True, indices=tgt_states,
                   min_only=True, limit=cutoff)
    f_tv = np.full(len(cover.sources), np.inf)
    for t in cover.target_idx:
        f_tv = np.minimum(f_tv, fwd[t * V + cover.sources])
    b_sv = bwd[src_states]
    lbs = np.maximum(f_tv, b_sv)
    order = np.argsort(lbs)
    # Every cycle in the class passes through some basepoint, so the
    # smallest per-basepoint bound (unreachable-within-cutoff basepoints
    # contribute >= cutoff) bounds the shortest cycle from below.
    finite = lbs[np.isfinite(lbs)]
    length_bound = float(min(cutoff, finite.min())) if finite.size \
        else float(cutoff)

    # Reweight by the backward potential: w' = w + b(head) - b(tail) >= 0
    # wherever b is exact; clamped entries sit beyond every search limit.
    big = 4.0 * cutoff + 1.0
    bf = np.where(np.isfinite(bwd), bwd, big)
    wprime = cover.graph.data + bf[cover.graph.indices] - bf[cover.entry_rows()]
    np.maximum(wprime, 0.0, out=wprime)
    saved = cover.graph.data
    cover.graph.data = wprime

    results: List[CycleResult] = []
    complete = True
    exact_runs = 0
    # Basepoints on an already-found cycle would reproduce (nearly) the
    # same cycle; skipping them keeps the batch diverse.
    seen = np.zeros(V, dtype=bool)
    try:
        for oi in order:
            v = int(cover.sources[oi])
            lb = lbs[oi]
            if not np.isfinite(lb) or lb >= cutoff:
                break
            if seen[v]:
                continue
            if exact_runs >= max_exact or len(results) >= max_results:
                complete = False
                break
            exact_runs += 1
            base = float(bwd[cover.start_idx * V + v])
            d, pred = dijkstra(cover.graph, directed=True,
                               indices=cover.start_idx * V + v,
                               return_predecessors=True,
                               limit=cutoff - base)
            val = min(d[t * V + v] for t in cover.target_idx) + base
            if not np.isfinite(val) or val >= cutoff:
                continue
            res = _walk_back(cover, v, float(val), d, pred)
            seen[res.vertices] = True
            results.append(res)
    finally:
        cover.graph.data = saved
    return results, complete, length_bound


def _reconstruct(cover: CoverGraph, v: int, val: float) -> CycleResult:
    """Recover the mesh vertices and edges of the cycle based at v."""
    d, pred = dijkstra(cover.graph, directed=True,
                       indices=cover.start_idx * cover.n_base + v,
                       return_predecessors=True,
                       limit=val * (1 + 1e-9) + 1e-30)
    return _walk_back(cover, v, val, d, pred)


def _walk_back(cover: CoverGraph, v: int, val: float,
               d: np.ndarray, pred: np.ndarray) -> CycleResult:
    V = cover.n_base
    t_state = min((t * V + v for t in cover.target_idx), key=lambda t: d[t])
    path_states = [t_state]
    while path_states[-1] != cover.start_idx * V + v:
        p = pred[path_states[-1]]
        if p < 0:
            raise AssertionError("predecessor chain broke during reconstruction")
        path_states.append(p)
    path_states.reverse()

    g = cover.graph
    base_edges = []
    verts = [s % V for s in path_states]
    for a, b in zip(path_states[:-1], path_states[1:]):
        lo, hi = g.indptr[a], g.indptr[a + 1]
        cand = np.nonzero(g.indices[lo:hi] == b)[0]
        ci = cand[np.argmin(g.data[lo:hi][cand])]
        base_edges.append(cover.base_edge[lo + ci])
    return CycleResult(length=val, basepoint=v,
                       vertices=np.asarray(verts, dtype=np.int64),
                       base_edges=np.asarray(base_edges, dtype=np.int64))
