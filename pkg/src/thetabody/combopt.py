"""Theta bodies of stable-set and max-cut ideals, built combinatorially.

For the stable-set ideal of a graph G the quotient basis is the set of
squarefree monomials x^U over stable sets U, so moment templates can be
enumerated directly from the graph: the cell of a pair (U, U') is the
y-coordinate of U union U' when that union is again stable and zero
otherwise.  Maximizing sum_i y_i over the level-k matrix gives the level-k
stable-set theta function (level 1 is the Lovasz theta body of G).

The max-cut model optimizes over characteristic vectors of edge sets that
are contained in some cut, i.e. edge sets whose subgraph is bipartite
(odd-cycle free).  That family is again closed under subsets, so the same
template construction applies with edges as the ground set; the union of two
odd-cycle-free sets is dropped to zero exactly when it picks up an odd cycle.

Enumerations are depth-first by last ground element, emitting sets sorted by
size then lexicographically, and abort with a resource error when a
configurable cap (default 20000 elements) is exceeded.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .errors import InputError, ResourceLimitError
from .exactalg import Monomial, parse_rational
from .momentsdp import MomentTemplate, build_theta_sdp
from .sdpsolve import SdpSolution, SolverOptions, solve

STABLE_SETS = "StableSets"
ODD_CYCLE_FREE = "OddCycleFreeEdgeSets"

DEFAULT_CAP = 20000


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 1..n with sorted edge pairs."""

    n: int
    edges: Tuple[Tuple[int, int], ...]

    def __init__(self, n: int, edges):
        n = int(n)
        if n < 1:
            raise InputError("graph needs at least one vertex")
        seen = set()
        normalized = []
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise InputError(f"loop at vertex {u} is not allowed")
            if not (1 <= u <= n and 1 <= v <= n):
                raise InputError(f"edge ({u},{v}) outside vertex range 1..{n}")
            pair = (min(u, v), max(u, v))
            if pair not in seen:
                seen.add(pair)
                normalized.append(pair)
        normalized.sort()
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", tuple(normalized))

    @property
    def m(self) -> int:
        return len(self.edges)

    def adjacency(self) -> List[set]:
        adj = [set() for _ in range(self.n + 1)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}

    @staticmethod
    def from_json(obj) -> "Graph":
        if not isinstance(obj, dict) or "n" not in obj or "edges" not in obj:
            raise InputError('graph JSON needs keys "n" and "edges"')
        return Graph(obj["n"], obj["edges"])

    @staticmethod
    def from_dimacs(text: str) -> "Graph":
        n = None
        edges = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("c"):
                continue
            tokens = line.split()
            if tokens[0] == "p":
                if len(tokens) < 4:
                    raise InputError(f"line {lineno}: malformed problem line")
                try:
                    n = int(tokens[2])
                except ValueError as exc:
                    raise InputError(f"line {lineno}: bad vertex count") from exc
            elif tokens[0] == "e":
                if n is None:
                    raise InputError(f"line {lineno}: edge before problem line")
                if len(tokens) != 3:
                    raise InputError(f"line {lineno}: malformed edge line")
                try:
                    edges.append((int(tokens[1]), int(tokens[2])))
                except ValueError as exc:
                    raise InputError(f"line {lineno}: bad edge endpoints") from exc
            else:
                raise InputError(f"line {lineno}: unknown record {tokens[0]!r}")
        if n is None:
            raise InputError("DIMACS input has no problem line")
        return Graph(n, edges)

    @staticmethod
    def from_file(path: str) -> "Graph":
        try:
            with open(path, "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise InputError(f"cannot read graph file {path}: {exc}") from exc
        stripped = text.lstrip()
        if stripped.startswith("{"):
            try:
                return Graph.from_json(json.loads(text))
            except json.JSONDecodeError as exc:
                raise InputError(f"invalid JSON in {path}: {exc}") from exc
        return Graph.from_dimacs(text)


@dataclass
class CombBasis:
    """A subset-closed family of ground-element sets, sorted by size then lex.

    kind is StableSets (ground = vertices) or OddCycleFreeEdgeSets (ground =
    edges).  Elements are tuples of 0-based ground indices; the empty tuple
    is always first.
    """

    kind: str
    graph: Graph
    ground: List
    elements: List[Tuple[int, ...]]
    max_size: int
    exhausted: bool = False  # True when no element larger than those listed exists

    def index(self) -> Dict[Tuple[int, ...], int]:
        return {e: i for i, e in enumerate(self.elements)}

    def label(self, element: Tuple[int, ...]) -> str:
        if not element:
            return "1"
        if self.kind == STABLE_SETS:
            return "*".join(f"x{self.ground[i]}" for i in element)
        return "*".join(f"e{u}_{v}" for u, v in (self.ground[i] for i in element))


def enumerate_stable_sets(
    graph: Graph, max_size: int, cap: int = DEFAULT_CAP
) -> CombBasis:
    """All stable sets of size <= max_size, sorted by size then lex."""
    if max_size < 0:
        raise InputError("max_size must be >= 0")
    adj = graph.adjacency()
    out: List[Tuple[int, ...]] = []
    frontier: List[Tuple[int, ...]] = [()]
    size = 0
    exhausted = False
    while True:
        for elem in frontier:
            out.append(elem)
            if len(out) > cap:
                raise ResourceLimitError(
                    f"stable-set enumeration exceeded cap {cap}"
                )
        if size == max_size:
            break
        nxt = []
        for elem in frontier:
            start = elem[-1] + 1 if elem else 0
            members = {g + 1 for g in elem}
            for gi in range(start, graph.n):
                if adj[gi + 1] & members:
                    continue
                nxt.append(elem + (gi,))
        if not nxt:
            exhausted = True
            break
        frontier = nxt
        size += 1
    return CombBasis(
        kind=STABLE_SETS,
        graph=graph,
        ground=list(range(1, graph.n + 1)),
        elements=out,
        max_size=max_size,
        exhausted=exhausted,
    )


def _parity_components(edge_pairs) -> bool:
    """True when the edge set induces a bipartite subgraph (union-find with
    parity; an edge closing an odd cycle joins endpoints at equal parity)."""
    parent: Dict[int, int] = {}
    rank: Dict[int, int] = {}
    parity: Dict[int, int] = {}

    def find(v):
        path = []
        while parent[v] != v:
            path.append(v)
            v = parent[v]
        p = 0
        for node in reversed(path):
            p ^= parity[node]
            parent[node] = v
            parity[node] = p
        return v

    def offset(v):
        find(v)
        return parity[v]

    for u, v in edge_pairs:
        for w in (u, v):
            if w not in parent:
                parent[w] = w
                rank[w] = 0
                parity[w] = 0
        ru, rv = find(u), find(v)
        if ru == rv:
            if offset(u) == offset(v):
                return False
            continue
        if rank[ru] < rank[rv]:
            ru, rv, u, v = rv, ru, v, u
        parent[rv] = ru
        parity[rv] = offset(u) ^ offset(v) ^ 1
        if rank[ru] == rank[rv]:
            rank[ru] += 1
    return True


def enumerate_odd_cycle_free(
    graph: Graph, max_size: int, cap: int = DEFAULT_CAP
) -> CombBasis:
    """All edge subsets of size <= max_size whose subgraph is bipartite."""
    if max_size < 0:
        raise InputError("max_size must be >= 0")
    edges = graph.edges
    out: List[Tuple[int, ...]] = []
    frontier: List[Tuple[int, ...]] = [()]
    size = 0
    exhausted = False
    while True:
        for elem in frontier:
            out.append(elem)
            if len(out) > cap:
                raise ResourceLimitError(
                    f"odd-cycle-free enumeration exceeded cap {cap}"
                )
        if size == max_size:
            break
        nxt = []
        for elem in frontier:
            start = elem[-1] + 1 if elem else 0
            for e in range(start, len(edges)):
                candidate = elem + (e,)
                if _parity_components(edges[i] for i in candidate):
                    nxt.append(candidate)
        if not nxt:
            exhausted = True
            break
        frontier = nxt
        size += 1
    return CombBasis(
        kind=ODD_CYCLE_FREE,
        graph=graph,
        ground=list(edges),
        elements=out,
        max_size=max_size,
        exhausted=exhausted,
    )


def is_bipartite(graph: Graph):
    """2-colorability plus an explicit odd-cycle witness when it fails.

    Returns (True, None) or (False, cycle) where cycle is an odd-length list
    of vertices with consecutive entries (and the wrap-around pair) adjacent.
    """
    adj = graph.adjacency()
    color = [None] * (graph.n + 1)
    parent = [0] * (graph.n + 1)
    for root in range(1, graph.n + 1):
        if color[root] is not None:
            continue
        color[root] = 0
        parent[root] = 0
        queue = [root]
        while queue:
            u = queue.pop(0)
            for v in sorted(adj[u]):
                if color[v] is None:
                    color[v] = color[u] ^ 1
                    parent[v] = u
                    queue.append(v)
                elif color[v] == color[u]:
                    # walk both endpoints to the root, splice at the meeting point
                    up, vp = [u], [v]
                    while up[-1] != root:
                        up.append(parent[up[-1]])
                    while vp[-1] != root:
                        vp.append(parent[vp[-1]])
                    while len(up) > 1 and len(vp) > 1 and up[-2] == vp[-2]:
                        up.pop()
                        vp.pop()
                    cycle = up[:-1] + list(reversed(vp))
                    assert len(cycle) % 2 == 1
                    return False, cycle
    return True, None


def moment_template(basis: CombBasis, k: int) -> MomentTemplate:
    """Level-k moment template over a subset-closed combinatorial basis.

    Rows are the elements of size <= k; the cell of (U, U') is the unit
    vector on U union U' when the union belongs to the family and the zero
    vector otherwise.  Cells with equal unions share one object.
    """
    if k < 1:
        raise InputError("moment level must be >= 1")
    if basis.max_size < 2 * k and not basis.exhausted:
        raise InputError(
            f"basis enumerated to size {basis.max_size}, level {k} needs "
            f"size {2 * k} (or an exhausted enumeration)"
        )
    index = basis.index()
    rows = [i for i, e in enumerate(basis.elements) if len(e) <= k]
    assert rows == list(range(len(rows)))  # elements are sorted by size
    y_dim = len(basis.elements)

    shared: Dict[Tuple[int, ...], Dict[int, Fraction]] = {}
    cells: Dict[Tuple[int, int], Dict[int, Fraction]] = {}
    for a, i in enumerate(rows):
        for j in rows[a:]:
            union = tuple(sorted(set(basis.elements[i]) | set(basis.elements[j])))
            vec = shared.get(union)
            if vec is None:
                l = index.get(union)
                vec = {l: Fraction(1)} if l is not None else {}
                shared[union] = vec
            cells[(i, j)] = vec

    labels = [basis.label(e) for e in basis.elements]
    linear = {}
    for g in range(len(basis.ground)):
        l = index.get((g,))
        if l is not None:
            linear[g + 1] = l
    return MomentTemplate(
        level=k,
        ambient_dim=len(basis.ground),
        row_indices=rows,
        row_labels=[labels[i] for i in rows],
        y_dim=y_dim,
        y_labels=labels,
        cells=cells,
        ring=None,
        linear_index=linear,
    )


@dataclass
class ThetaResult:
    """Outcome of a level-k theta relaxation over a graph model."""

    value: float
    x: List[float]
    status: str
    level: int
    kind: str
    solution: SdpSolution
    template: MomentTemplate

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "x": list(self.x),
            "status": self.status,
            "level": self.level,
            "kind": self.kind,
            "matrixSide": self.template.side,
            "yDim": self.template.y_dim,
        }


def _project(template: MomentTemplate, sol: SdpSolution) -> List[float]:
    out = []
    for g in range(1, template.ambient_dim + 1):
        l = template.linear_index.get(g)
        out.append(float(sol.y[l]) if l is not None else 0.0)
    return out


def stable_set_theta(
    graph: Graph,
    k: int,
    options: Optional[SolverOptions] = None,
    cap: int = DEFAULT_CAP,
) -> ThetaResult:
    """Level-k theta relaxation of the maximum stable set of the graph."""
    if k < 1:
        raise InputError("level must be >= 1")
    basis = enumerate_stable_sets(graph, 2 * k, cap=cap)
    template = moment_template(basis, k)
    objective = {Monomial.variable(v, graph.n): 1 for v in range(1, graph.n + 1)}
    problem = build_theta_sdp(template, objective)
    sol = solve(problem, options)
    return ThetaResult(
        value=sol.objective,
        x=_project(template, sol),
        status=sol.status,
        level=k,
        kind=STABLE_SETS,
        solution=sol,
        template=template,
    )


def parse_weights(raw, graph: Graph) -> List[Fraction]:
    """Accept a per-edge list (edge order of graph.edges), a {"u,v": w} or
    {(u, v): w} mapping, or None for unit weights."""
    if raw is None:
        return [Fraction(1)] * graph.m
    if isinstance(raw, dict):
        table = {}
        for key, value in raw.items():
            if isinstance(key, str):
                parts = re.split(r"[,\s]+", key.strip())
                if len(parts) != 2:
                    raise InputError(f"bad edge key {key!r}")
                u, v = int(parts[0]), int(parts[1])
            else:
                u, v = int(key[0]), int(key[1])
            table[(min(u, v), max(u, v))] = parse_rational(value)
        missing = [e for e in graph.edges if e not in table]
        if missing:
            raise InputError(f"missing weight for edge {missing[0]}")
        extras = [e for e in table if e not in set(graph.edges)]
        if extras:
            raise InputError(f"weight given for non-edge {extras[0]}")
        return [table[e] for e in graph.edges]
    weights = [parse_rational(w) for w in raw]
    if len(weights) != graph.m:
        raise InputError(
            f"{len(weights)} weights given, graph has {graph.m} edges"
        )
    return weights


def cut_theta(
    graph: Graph,
    weights=None,
    k: int = 1,
    options: Optional[SolverOptions] = None,
    cap: int = DEFAULT_CAP,
) -> ThetaResult:
    """Level-k theta relaxation of the maximum cut of the edge-weighted graph.

    Weights must be non-negative; the model optimizes sum_e w_e y_e over
    moment matrices of the cut ideal (edge sets contained in a cut are
    exactly the odd-cycle-free ones).
    """
    if k < 1:
        raise InputError("level must be >= 1")
    wlist = parse_weights(weights, graph)
    negative = [w for w in wlist if w < 0]
    if negative:
        raise InputError("cut weights must be non-negative")
    basis = enumerate_odd_cycle_free(graph, 2 * k, cap=cap)
    template = moment_template(basis, k)
    objective = {
        Monomial.variable(e + 1, graph.m): wlist[e] for e in range(graph.m)
    }
    if not objective:
        raise InputError("graph has no edges")
    problem = build_theta_sdp(template, objective)
    sol = solve(problem, options)
    return ThetaResult(
        value=sol.objective,
        x=_project(template, sol),
        status=sol.status,
        level=k,
        kind=ODD_CYCLE_FREE,
        solution=sol,
        template=template,
    )
