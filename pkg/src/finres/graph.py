"""Directed graphs in CSR form, strongly connected components, and periods.

Both DFS-based algorithms keep their own call stack in arrays, so graph
depth is limited by memory only.  The kernels are compiled with numba.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numba
import numpy as np

from .errors import ContractViolation, DomainError, OracleScaleError

INDEX_DTYPES = {32: np.int32, 64: np.int64}
ORACLE_MAX_N = 64


@dataclass(frozen=True, eq=False)
class DiGraph:
    """Compressed sparse row adjacency; targets of u are
    ``targets[offsets[u]:offsets[u+1]]`` in construction order."""

    n: int
    offsets: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        off, tgt = self.offsets, self.targets
        if self.n < 0 or off.shape != (self.n + 1,):
            raise DomainError("offsets must have length n + 1")
        if off[0] != 0 or off[-1] != len(tgt) or np.any(np.diff(off) < 0):
            raise DomainError("offsets must be monotone from 0 to the edge count")
        if len(tgt) and (tgt.min() < 0 or tgt.max() >= self.n):
            raise DomainError("edge target out of range")

    @property
    def m(self) -> int:
        return len(self.targets)

    @classmethod
    def from_edges(cls, n: int, src, dst, index_width: int = 32) -> "DiGraph":
        """Build from parallel edge arrays; per-vertex order follows input order."""
        dtype = _index_dtype(index_width, n)
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if src.shape != dst.shape:
            raise DomainError("src and dst differ in length")
        if len(src) and (src.min() < 0 or src.max() >= n):
            raise DomainError("edge source out of range")
        order = np.argsort(src, kind="stable")
        counts = np.bincount(src, minlength=n)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        return cls(n, offsets, dst[order].astype(dtype))

    @classmethod
    def from_adjacency(cls, adj, index_width: int = 32) -> "DiGraph":
        src = [u for u, row in enumerate(adj) for _ in row]
        dst = [v for row in adj for v in row]
        return cls.from_edges(len(adj), src, dst, index_width)

    def successors(self, u: int) -> np.ndarray:
        return self.targets[self.offsets[u] : self.offsets[u + 1]]

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        src = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.offsets))
        return src, self.targets.astype(np.int64)

    def same_as(self, other: "DiGraph") -> bool:
        return (
            self.n == other.n
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.targets, other.targets)
        )


def _index_dtype(index_width: int, n: int):
    if index_width not in INDEX_DTYPES:
        raise DomainError("index width must be 32 or 64")
    dtype = INDEX_DTYPES[index_width]
    if n > np.iinfo(dtype).max:
        raise DomainError(f"{n} vertices need 64-bit indices")
    return dtype


def graph_from_comb(f, index_width: int = 32) -> DiGraph:
    """Edge (u, v) for every v in f(u)."""
    return DiGraph.from_adjacency(f.images, index_width)


# ------------------------------------------------------------------ kernels


@numba.njit(cache=True)
def _tarjan_kernel(n, offsets, targets):
    # returns (component ids, component count, max call depth, edges scanned)
    index = np.full(n, -1, dtype=targets.dtype)
    low = np.empty(n, dtype=targets.dtype)
    comp = np.full(n, -1, dtype=targets.dtype)
    on_stack = np.zeros(n, dtype=np.bool_)
    scc_stack = np.empty(n, dtype=targets.dtype)
    call_v = np.empty(n, dtype=targets.dtype)
    call_e = np.empty(n, dtype=np.int64)
    time = 0
    sp = 0
    k = 0
    max_depth = 0
    scanned = 0
    for root in range(n):
        if index[root] != -1:
            continue
        index[root] = time
        low[root] = time
        time += 1
        scc_stack[sp] = root
        sp += 1
        on_stack[root] = True
        call_v[0] = root
        call_e[0] = offsets[root]
        depth = 1
        if max_depth < 1:
            max_depth = 1
        while depth > 0:
            u = call_v[depth - 1]
            e = call_e[depth - 1]
            end = offsets[u + 1]
            lu = low[u]
            descended = False
            # scan edges until a tree edge is found; low[u] stays in a register
            while e < end:
                v = targets[e]
                e += 1
                scanned += 1
                iv = index[v]
                if iv == -1:
                    call_e[depth - 1] = e
                    low[u] = lu
                    index[v] = time
                    low[v] = time
                    time += 1
                    scc_stack[sp] = v
                    sp += 1
                    on_stack[v] = True
                    call_v[depth] = v
                    call_e[depth] = offsets[v]
                    depth += 1
                    if depth > max_depth:
                        max_depth = depth
                    descended = True
                    break
                if iv < lu and on_stack[v]:
                    lu = iv
            if descended:
                continue
            low[u] = lu
            if lu == index[u]:
                while True:
                    sp -= 1
                    w = scc_stack[sp]
                    on_stack[w] = False
                    comp[w] = k
                    if w == u:
                        break
                k += 1
            depth -= 1
            if depth > 0:
                parent = call_v[depth - 1]
                if lu < low[parent]:
                    low[parent] = lu
    return comp, k, max_depth, scanned


@numba.njit(cache=True)
def _gcd(a, b):
    while b != 0:
        a, b = b, a % b
    return a


@numba.njit(cache=True)
def _period_kernel(n, offsets, targets, root):
    # returns (gcd, visited count, max call depth, edges scanned)
    depth_of = np.full(n, -1, dtype=targets.dtype)
    call_v = np.empty(n, dtype=targets.dtype)
    call_e = np.empty(n, dtype=np.int64)
    p = 0
    visited = 1
    depth_of[root] = 0
    call_v[0] = root
    call_e[0] = offsets[root]
    sp = 1
    max_depth = 1
    scanned = 0
    while sp > 0:
        u = call_v[sp - 1]
        e = call_e[sp - 1]
        end = offsets[u + 1]
        du = np.int64(depth_of[u])
        descended = False
        while e < end:
            v = targets[e]
            e += 1
            scanned += 1
            dv = depth_of[v]
            if dv == -1:
                call_e[sp - 1] = e
                depth_of[v] = du + 1
                visited += 1
                call_v[sp] = v
                call_e[sp] = offsets[v]
                sp += 1
                if sp > max_depth:
                    max_depth = sp
                descended = True
                break
            d = np.int64(dv) - du - 1
            if d < 0:
                d = -d
            if p != 1:
                p = _gcd(p, d)
        if not descended:
            sp -= 1
    return p, visited, max_depth, scanned


# --------------------------------------------------------------- analyses


@dataclass(frozen=True, eq=False)
class SccResult:
    ids: np.ndarray
    count: int
    max_stack_depth: int = 0
    edges_scanned: int = 0

    def components(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.count)]
        for v, c in enumerate(self.ids.tolist()):
            out[c].append(v)
        return out


def tarjan_scc(g: DiGraph) -> SccResult:
    """Tarjan's algorithm; components numbered in the order they close."""
    if g.n == 0:
        return SccResult(np.zeros(0, dtype=g.targets.dtype), 0, 0, 0)
    comp, k, depth, scanned = _tarjan_kernel(g.n, g.offsets, g.targets)
    return SccResult(comp, int(k), int(depth), int(scanned))


def strongly_connected(g: DiGraph) -> bool:
    return g.n > 0 and tarjan_scc(g).count == 1


def graph_period(g: DiGraph, check: bool = True) -> int:
    """GCD of all cycle lengths of a strongly connected graph.

    DFS from vertex 0 with depth labels; every edge to an already labelled
    vertex contributes |d_v - d_u - 1|.  Returns 0 for the one-vertex graph
    with no edges.
    """
    if g.n < 1:
        raise ContractViolation("period of the empty graph")
    if check and not strongly_connected(g):
        raise ContractViolation("graph_period needs a strongly connected graph")
    p, visited, _, _ = _period_kernel(g.n, g.offsets, g.targets, 0)
    if visited != g.n:
        raise ContractViolation("graph_period needs a strongly connected graph")
    return int(p)


@dataclass(frozen=True)
class PeriodSearch:
    """Raw outcome of the depth-labelling DFS from vertex 0."""

    period: int
    visited: int
    max_stack_depth: int
    edges_scanned: int


def period_search(g: DiGraph) -> PeriodSearch:
    if g.n < 1:
        raise ContractViolation("period of the empty graph")
    return PeriodSearch(*(int(x) for x in _period_kernel(g.n, g.offsets, g.targets, 0)))


def is_transitive(g: DiGraph) -> bool:
    return strongly_connected(g)


def is_mixing(g: DiGraph) -> bool:
    return strongly_connected(g) and graph_period(g, check=False) == 1


@dataclass(frozen=True)
class GraphVerdict:
    vertices: int
    edges: int
    scc_count: int
    period: int | None
    transitive: bool
    mixing: bool


def analyze_graph(g: DiGraph) -> GraphVerdict:
    scc = tarjan_scc(g)
    sc = g.n > 0 and scc.count == 1
    period = graph_period(g, check=False) if sc else None
    return GraphVerdict(g.n, g.m, scc.count, period, sc, sc and period == 1)


# ----------------------------------------------------------------- oracles


def _bool_matrix(g: DiGraph) -> np.ndarray:
    if g.n > ORACLE_MAX_N:
        raise OracleScaleError(f"oracle limited to {ORACLE_MAX_N} vertices, got {g.n}")
    a = np.zeros((g.n, g.n), dtype=bool)
    src, dst = g.edge_arrays()
    a[src, dst] = True
    return a


def _bool_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a.astype(np.int64) @ b.astype(np.int64)) > 0


def reachability(g: DiGraph) -> np.ndarray:
    """Reflexive-transitive closure by Warshall's algorithm."""
    r = _bool_matrix(g) | np.eye(g.n, dtype=bool)
    for k in range(g.n):
        r |= r[:, k : k + 1] & r[k : k + 1, :]
    return r


def oracle_scc_relation(g: DiGraph) -> np.ndarray:
    """Boolean matrix: u and v mutually reachable."""
    r = reachability(g)
    return r & r.T


def oracle_period(g: DiGraph) -> int:
    """GCD of the lengths l <= n with trace(A^l) > 0."""
    a = _bool_matrix(g)
    power = a.copy()
    lengths = []
    for length in range(1, g.n + 1):
        if np.any(np.diagonal(power)):
            lengths.append(length)
        power = _bool_mul(power, a)
    return reduce(math.gcd, lengths, 0)


def oracle_mixing(f) -> bool:
    """Some boolean power A^k, k <= (n-1)^2 + 1, is all ones.

    Accepts a DiGraph or anything with ``images`` (a combinatorial map).
    """
    g = f if isinstance(f, DiGraph) else graph_from_comb(f)
    a = _bool_matrix(g)
    power = a.copy()
    for _ in range((g.n - 1) ** 2 + 1):
        if power.all():
            return True
        power = _bool_mul(power, a)
    return False


# --------------------------------------------------------------- file format


def write_edge_list(path, g: DiGraph):
    """``vertices n edges m`` then one ``u v`` line per edge, in CSR order."""
    src, dst = g.edge_arrays()
    with open(path, "w") as fh:
        fh.write(f"vertices {g.n} edges {g.m}\n")
        if g.m:
            np.savetxt(fh, np.column_stack([src, dst]), fmt="%d")


def read_edge_list(path, index_width: int = 32) -> DiGraph:
    with open(path) as fh:
        text = fh.read()
    first, _, body = text.partition("\n")
    head = first.split()
    if len(head) != 4 or head[0] != "vertices" or head[2] != "edges":
        raise DomainError(f"{path}:1: expected 'vertices N edges M'")
    try:
        n, m = int(head[1]), int(head[3])
    except ValueError:
        raise DomainError(f"{path}:1: bad vertex or edge count") from None
    try:
        flat = np.array(body.split(), dtype=np.int64)
        ok = len(flat) == 2 * m
    except ValueError:
        ok = False
    if not ok:
        _locate_edge_error(path, body, m)
    src, dst = flat[0::2], flat[1::2]
    for lineno, (u, v) in _bad_endpoints(src, dst, n):
        raise DomainError(f"{path}:{lineno}: vertex out of range in edge {u} {v}")
    return DiGraph.from_edges(n, src, dst, index_width)


def _bad_endpoints(src, dst, n):
    bad = np.flatnonzero((src < 0) | (src >= n) | (dst < 0) | (dst >= n))
    for i in bad[:1]:
        yield int(i) + 2, (int(src[i]), int(dst[i]))


def _locate_edge_error(path, body: str, m: int):
    count = 0
    for lineno, line in enumerate(body.split("\n"), start=2):
        tok = line.split()
        if not tok:
            continue
        if len(tok) != 2:
            raise DomainError(f"{path}:{lineno}: expected two vertex indices")
        try:
            int(tok[0]), int(tok[1])
        except ValueError:
            raise DomainError(f"{path}:{lineno}: non-integer vertex index") from None
        count += 1
    raise DomainError(f"{path}: header announces {m} edges, found {count}")
