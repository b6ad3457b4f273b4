"""Finite simplicial and cellular complexes, integral homology, collapses."""

from __future__ import annotations

import heapq
import io
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence


class ComplexError(ValueError):
    pass


# ---------------------------------------------------------------------------
# simplicial complexes


class SimplicialComplex:
    """Face-closed set of simplices on integer vertices with string labels.

    Simplices are sorted tuples of vertex ids. The empty simplex is not
    stored.
    """

    def __init__(self, labels: Mapping[int, str] | Sequence[str] = (), simplices: Iterable = ()):
        if isinstance(labels, Mapping):
            self.labels = dict(labels)
        else:
            self.labels = dict(enumerate(labels))
        self._simplices: set = set()
        for v in self.labels:
            self._simplices.add((v,))
        for s in simplices:
            self.add_simplex(s)

    # construction -----------------------------------------------------
    def add_vertex(self, v: int, label: str | None = None):
        self.labels.setdefault(v, label if label is not None else str(v))
        self._simplices.add((v,))

    def add_simplex(self, s: Iterable[int]):
        s = tuple(sorted(s))
        if len(set(s)) != len(s):
            raise ComplexError(f"repeated vertex in simplex {s}")
        if not s or s in self._simplices:
            return
        for v in s:
            if v not in self.labels:
                self.labels[v] = str(v)
        for k in range(1, len(s) + 1):
            for f in combinations(s, k):
                self._simplices.add(f)

    @classmethod
    def from_maximal(cls, maximal: Iterable, labels=None) -> "SimplicialComplex":
        maximal = [tuple(sorted(s)) for s in maximal]
        if labels is None:
            labels = {v: str(v) for s in maximal for v in s}
        return cls(labels, maximal)

    @classmethod
    def full_simplex(cls, n_vertices: int) -> "SimplicialComplex":
        return cls.from_maximal([tuple(range(n_vertices))])

    # queries ------------------------------------------------------------
    @property
    def vertices(self) -> list:
        return sorted(self.labels)

    @property
    def simplices(self) -> frozenset:
        return frozenset(self._simplices)

    def __contains__(self, s) -> bool:
        return tuple(sorted(s)) in self._simplices

    def __len__(self) -> int:
        return len(self._simplices)

    def __eq__(self, other) -> bool:
        return isinstance(other, SimplicialComplex) and self._simplices == other._simplices

    def __repr__(self):
        return f"SimplicialComplex(vertices={len(self.labels)}, simplices={len(self)}, dim={self.dim})"

    @property
    def dim(self) -> int:
        return max((len(s) - 1 for s in self._simplices), default=-1)

    @property
    def is_empty(self) -> bool:
        return not self._simplices

    def simplices_of_dim(self, k: int) -> list:
        return sorted(s for s in self._simplices if len(s) == k + 1)

    def f_vector(self) -> list:
        out = [0] * (self.dim + 1)
        for s in self._simplices:
            out[len(s) - 1] += 1
        return out

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * n for k, n in enumerate(self.f_vector()))

    def maximal_simplices(self) -> list:
        by_dim = sorted(self._simplices, key=lambda s: (-len(s), s))
        covered: set = set()
        out = []
        for s in by_dim:
            if s in covered:
                continue
            out.append(s)
            for k in range(1, len(s)):
                covered.update(combinations(s, k))
        return sorted(out)

    def full_subcomplex(self, vertices: Iterable[int]) -> "SimplicialComplex":
        keep = set(vertices)
        out = SimplicialComplex({v: self.labels[v] for v in sorted(keep) if v in self.labels})
        out._simplices = {s for s in self._simplices if keep.issuperset(s)}
        return out

    def check_face_closed(self) -> bool:
        return all(f in self._simplices for s in self._simplices if len(s) > 1 for f in combinations(s, len(s) - 1))

    def chain_complex(self) -> "ChainComplex":
        cells = [self.simplices_of_dim(k) for k in range(self.dim + 1)]
        if not cells:
            return ChainComplex([0], [[]])
        index = [{s: i for i, s in enumerate(c)} for c in cells]
        boundaries = [[{} for _ in cells[0]]]
        for k in range(1, len(cells)):
            cols = []
            for s in cells[k]:
                col = {}
                for i in range(len(s)):
                    col[index[k - 1][s[:i] + s[i + 1:]]] = -1 if i % 2 else 1
                cols.append(col)
            boundaries.append(cols)
        return ChainComplex([len(c) for c in cells], boundaries)

    def homology(self, collapse: bool = True) -> "HomologyResult":
        result = self.chain_complex().homology()
        if collapse:
            result.collapsible = collapses_to_point(self)
        return result

    # serialization ------------------------------------------------------
    def to_text(self, extra_lines: Iterable[str] = ()) -> str:
        buf = io.StringIO()
        for v in self.vertices:
            buf.write(f"v {v} {self.labels[v]}\n")
        for s in self.maximal_simplices():
            if len(s) > 1:
                buf.write("s " + " ".join(map(str, s)) + "\n")
        for line in extra_lines:
            buf.write(line.rstrip("\n") + "\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "SimplicialComplex":
        out = cls()
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tag, *rest = line.split()
            if tag == "v":
                if not rest:
                    raise ComplexError(f"line {n}: vertex id missing")
                out.add_vertex(int(rest[0]), " ".join(rest[1:]) or rest[0])
            elif tag == "s":
                out.add_simplex(int(x) for x in rest)
            elif tag == "p":
                continue  # product-cell records belong to the quotient complex
            else:
                raise ComplexError(f"line {n}: unknown record {tag!r}")
        return out


def join(a: SimplicialComplex, b: SimplicialComplex, offset: int | None = None) -> SimplicialComplex:
    """Simplicial join; vertices of ``b`` are shifted by ``offset`` to stay disjoint."""
    if offset is None:
        offset = max(a.labels, default=-1) + 1
    labels = {v: f"X:{a.labels[v]}" for v in a.labels}
    labels.update({v + offset: f"Y:{b.labels[v]}" for v in b.labels})
    out = SimplicialComplex(labels)
    sa = list(a.simplices) + [()]
    sb = [tuple(v + offset for v in s) for s in b.simplices] + [()]
    out._simplices = {tuple(sorted(x + y)) for x in sa for y in sb if x or y}
    return out


# ---------------------------------------------------------------------------
# chain complexes and homology


@dataclass
class HomologyResult:
    """Reduced integral homology. ``betti[k]`` and ``torsion[k]`` per degree."""

    betti: list
    torsion: list
    collapsible: bool | None = None
    empty: bool = False

    @property
    def acyclic(self) -> bool:
        return not self.empty and not any(self.betti) and not any(self.torsion)

    def acyclic_through(self, degree: int) -> bool:
        if self.empty:
            return False
        return all(b == 0 for b in self.betti[: degree + 1]) and all(not t for t in self.torsion[: degree + 1])

    def summary(self) -> dict:
        return {"reduced_betti": list(self.betti), "torsion": [list(t) for t in self.torsion], "collapsible": self.collapsible}


class ChainComplex:
    """``sizes[k]`` cells in degree ``k``; ``boundaries[k][j]`` maps cell ``j`` to ``{face: coef}``."""

    def __init__(self, sizes: Sequence[int], boundaries: Sequence[Sequence[Mapping[int, int]]]):
        self.sizes = list(sizes)
        self.boundaries = [list(b) for b in boundaries]
        if len(self.boundaries) != len(self.sizes):
            raise ComplexError("one boundary list per degree is required")

    def check_d_squared(self) -> bool:
        for k in range(2, len(self.sizes)):
            for col in self.boundaries[k]:
                acc: dict = {}
                for f, c in col.items():
                    for g, e in self.boundaries[k - 1][f].items():
                        acc[g] = acc.get(g, 0) + c * e
                if any(acc.values()):
                    return False
        return True

    def homology(self) -> HomologyResult:
        n = len(self.sizes)
        if n == 0 or self.sizes[0] == 0:
            return HomologyResult([], [], collapsible=False, empty=True)
        # augmented complex: degree 0 maps onto Z
        mats = [[{0: 1} for _ in range(self.sizes[0])]] + self.boundaries[1:]
        ranks, divisors = [], []
        for cols in mats:
            r, d = smith_invariants(cols)
            ranks.append(r)
            divisors.append(d)
        betti, torsion = [], []
        for k in range(n):
            nxt = ranks[k + 1] if k + 1 < n else 0
            betti.append(self.sizes[k] - ranks[k] - nxt)
            torsion.append(sorted(divisors[k + 1]) if k + 1 < n else [])
        while len(betti) > 1 and betti[-1] == 0 and not torsion[-1]:
            betti.pop()
            torsion.pop()
        return HomologyResult(betti, torsion)


def smith_invariants(columns: Sequence[Mapping[int, int]]):
    """Rank and non-unit elementary divisors of a sparse integer matrix."""
    rows: dict = {}
    cols: dict = {}
    for j, col in enumerate(columns):
        for i, v in col.items():
            if v:
                rows.setdefault(i, {})[j] = v
                cols.setdefault(j, {})[i] = v
    rank = 0
    # eliminate unit pivots, cheapest first
    heap = [(len(c), j) for j, c in cols.items()]
    heapq.heapify(heap)
    while heap:
        _, j = heapq.heappop(heap)
        col = cols.get(j)
        if not col:
            continue
        best = None
        for i, v in col.items():
            if v in (1, -1):
                key = (len(rows[i]), i)
                if best is None or key < best[0]:
                    best = (key, i, v)
        if best is None:
            continue
        _, i, p = best
        rank += 1
        prow = rows.pop(i)
        del cols[j]
        for jj in prow:
            if jj != j:
                del cols[jj][i]
        for r, a in list(col.items()):
            if r == i:
                continue
            factor = a * p
            row = rows[r]
            del row[j]
            for jj, b in prow.items():
                if jj == j:
                    continue
                nv = row.get(jj, 0) - factor * b
                if nv:
                    row[jj] = nv
                    cols[jj][r] = nv
                else:
                    row.pop(jj, None)
                    cols[jj].pop(r, None)
            if not row:
                del rows[r]
        for jj in prow:
            if jj != j and jj in cols:
                if cols[jj]:
                    heapq.heappush(heap, (len(cols[jj]), jj))
                else:
                    del cols[jj]
    rest_cols = sorted(j for j, c in cols.items() if c)
    rest_rows = sorted(rows)
    if not rest_cols:
        return rank, []
    dense = [[rows[i].get(j, 0) for j in rest_cols] for i in rest_rows]
    divs = dense_smith(dense)
    rank += len(divs)
    return rank, [d for d in divs if d != 1]


def dense_smith(m: list) -> list:
    """Nonzero diagonal of the Smith normal form (as positive integers)."""
    m = [list(r) for r in m]
    out = []
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    t = 0
    while t < min(nrows, ncols):
        nz = [(abs(m[i][j]), i, j) for i in range(t, nrows) for j in range(t, ncols) if m[i][j]]
        if not nz:
            break
        _, pi, pj = min(nz)
        m[t], m[pi] = m[pi], m[t]
        for r in m:
            r[t], r[pj] = r[pj], r[t]
        while True:
            p = m[t][t]
            done = True
            for i in range(t + 1, nrows):
                q, rem = divmod(m[i][t], p)
                if q:
                    m[i] = [a - q * b for a, b in zip(m[i], m[t])]
                if rem:
                    done = False
            for j in range(t + 1, ncols):
                q, rem = divmod(m[t][j], p)
                if q:
                    for r in m:
                        r[j] -= q * r[t]
                if rem:
                    done = False
            if done:
                bad = next(
                    ((i, j) for i in range(t + 1, nrows) for j in range(t + 1, ncols) if m[i][j] % p),
                    None,
                )
                if bad is None:
                    break
                m[t] = [a + b for a, b in zip(m[t], m[bad[0]])]
                continue
            # move the smallest nonzero entry of row/column t into the pivot
            cands = [(abs(m[i][t]), i, t) for i in range(t, nrows) if m[i][t]]
            cands += [(abs(m[t][j]), t, j) for j in range(t, ncols) if m[t][j]]
            _, pi, pj = min(cands)
            m[t], m[pi] = m[pi], m[t]
            for r in m:
                r[t], r[pj] = r[pj], r[t]
        out.append(abs(m[t][t]))
        t += 1
    return out


# ---------------------------------------------------------------------------
# collapses


@dataclass
class CollapseCertificate:
    collapsed_to_point: bool
    steps: list = field(default_factory=list)  # (free face, coface) pairs
    remaining: int = 0


def collapse(complex_: SimplicialComplex) -> CollapseCertificate:
    """Greedy elementary collapses; deterministic (largest free faces first)."""
    simplices = set(complex_.simplices)
    if not simplices:
        return CollapseCertificate(False, [], 0)
    cofaces: dict = {s: set() for s in simplices}
    for s in simplices:
        if len(s) > 1:
            for i in range(len(s)):
                cofaces[s[:i] + s[i + 1:]].add(s)
    heap = [(-len(s), s) for s, c in cofaces.items() if len(c) == 1]
    heapq.heapify(heap)
    steps = []
    while heap:
        _, s = heapq.heappop(heap)
        if s not in cofaces or len(cofaces[s]) != 1:
            continue
        (t,) = cofaces[s]
        steps.append((s, t))
        for x in (t, s):
            del cofaces[x]
            if len(x) > 1:
                for i in range(len(x)):
                    f = x[:i] + x[i + 1:]
                    c = cofaces.get(f)
                    if c is not None:
                        c.discard(x)
                        if len(c) == 1:
                            heapq.heappush(heap, (-len(f), f))
    return CollapseCertificate(len(cofaces) == 1, steps, len(cofaces))


def collapses_to_point(complex_: SimplicialComplex) -> bool:
    return collapse(complex_).collapsed_to_point


def join_collapsible(a: SimplicialComplex, b: SimplicialComplex) -> bool:
    """A join collapses to a point once one nonempty factor does."""
    if a.is_empty:
        return collapses_to_point(b)
    if b.is_empty:
        return collapses_to_point(a)
    return collapses_to_point(a) or collapses_to_point(b)


# ---------------------------------------------------------------------------
# reference complexes


RP2_6 = (
    (0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 1, 5),
    (1, 2, 4), (2, 3, 5), (1, 3, 4), (2, 4, 5), (1, 3, 5),
)


def projective_plane() -> SimplicialComplex:
    """Minimal 6-vertex triangulation of the real projective plane."""
    return SimplicialComplex.from_maximal(RP2_6)


def hollow_simplex(n_vertices: int) -> SimplicialComplex:
    return SimplicialComplex.from_maximal(combinations(range(n_vertices), n_vertices - 1))
