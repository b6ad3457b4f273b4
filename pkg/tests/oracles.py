"""Independent reference computations used to freeze expected values.

Nothing here imports the package's geometry or homology code.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize


def min_max_power(centers, radii_sq, gram=None):
    """Float minimum over x of max_i (|x - c_i|^2 - r_i^2)."""
    c = np.asarray(centers, dtype=float)
    r = np.asarray(radii_sq, dtype=float)
    g = np.eye(c.shape[1]) if gram is None else np.asarray(gram, dtype=float)

    def powers(x):
        d = c - x
        return np.einsum("ij,jk,ik->i", d, g, d) - r

    x0 = c.mean(axis=0)
    # epigraph form: minimise t subject to power_i(x) <= t
    z0 = np.append(x0, powers(x0).max())
    cons = {"type": "ineq", "fun": lambda z: z[-1] - powers(z[:-1])}
    res = minimize(lambda z: z[-1], z0, constraints=[cons], method="SLSQP", options={"ftol": 1e-14, "maxiter": 500})
    return float(res.fun)


def _pair_meets(ci, cj, ri_sq, rj_sq, gram) -> bool:
    # exact: |ci - cj| < ri + rj  <=>  d2 - ri2 - rj2 < 2 ri rj
    n = len(ci)
    d = [Fraction(ci[k]) - Fraction(cj[k]) for k in range(n)]
    g = gram or [[int(a == b) for b in range(n)] for a in range(n)]
    d2 = sum(d[a] * Fraction(g[a][b]) * d[b] for a in range(n) for b in range(n))
    lhs = d2 - ri_sq - rj_sq
    return lhs < 0 or lhs * lhs < 4 * ri_sq * rj_sq


def nerve_oracle(centers, radii_sq, gram=None, max_size=4, margin=1e-9):
    """f-vector of the nerve of open balls, by brute force over cliques.

    Pairs are decided exactly. Larger subsets use the float minimum of the
    largest power; a value within ``margin`` of zero means the closed balls
    touch at a point, so the open balls miss.
    """
    n = len(centers)
    fc = [tuple(float(x) for x in p) for p in centers]
    adj = [set() for _ in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        if _pair_meets(centers[i], centers[j], radii_sq[i], radii_sq[j], gram):
            adj[i].add(j)
            adj[j].add(i)
    layers = [[(i,) for i in range(n)]]
    for size in range(2, max_size + 1):
        nxt = []
        for s in layers[-1]:
            for j in adj[s[-1]]:
                if j > s[-1] and all(j in adj[v] for v in s):
                    t = s + (j,)
                    if size == 2:
                        nxt.append(t)
                        continue
                    val = min_max_power([fc[v] for v in t], [radii_sq[v] for v in t], gram)
                    if val < -margin:
                        nxt.append(t)
        if not nxt:
            break
        layers.append(nxt)
    return [len(x) for x in layers]


def rational_betti(maximal):
    """Reduced rational Betti numbers of a simplicial complex via float ranks."""
    faces = set()
    for s in maximal:
        s = tuple(sorted(s))
        for k in range(1, len(s) + 1):
            faces.update(itertools.combinations(s, k))
    by_dim: dict = {}
    for f in faces:
        by_dim.setdefault(len(f) - 1, []).append(f)
    top = max(by_dim)
    index = {k: {f: i for i, f in enumerate(sorted(v))} for k, v in by_dim.items()}
    ranks = {0: 1 if faces else 0}  # augmentation
    for k in range(1, top + 1):
        m = np.zeros((len(index[k - 1]), len(index[k])))
        for f, j in index[k].items():
            for i in range(len(f)):
                m[index[k - 1][f[:i] + f[i + 1:]], j] = (-1) ** i
        ranks[k] = int(np.linalg.matrix_rank(m))
    return [len(index[k]) - ranks[k] - ranks.get(k + 1, 0) for k in range(top + 1)]


def tree_distance(a: str, b: str, depth_a=None, depth_b=None):
    """Root-path metric on node addresses with edge weights 2^-n."""
    def depth(addr):
        return sum(2.0 ** -n for n in range(1, len(addr) + 1))

    m = 0
    while m < min(len(a), len(b)) and a[m] == b[m]:
        m += 1
    common = depth(a[:m])
    return depth(a) + depth(b) - 2 * common
