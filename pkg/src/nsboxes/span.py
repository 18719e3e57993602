"""Exact span membership for sparse constraint rows.

Two layers:

* Most rows have the shape ``sum(S) - sum(T)`` for two cell sets ``S``, ``T``.
  Such a row is an edge between the "sum-set" nodes ``S`` and ``T``.  An edge
  whose endpoints are already connected is a telescoping sum of the edges on
  the path between them, so it is dependent and never reaches elimination.
* Everything else goes through sparse Gaussian elimination over the
  rationals, keyed by leading (largest) column.  No tolerance exists: entries
  are ints or Fractions.

A certificate is stored as a recipe and expanded on demand: either the
elimination multipliers (over premise rows) or a signed chain of edges, each
edge being a premise row or an earlier certified target.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction


def _exact_div(a, b):
    if isinstance(a, int) and isinstance(b, int) and a % b == 0:
        return a // b
    q = Fraction(a) / b
    return q.numerator if q.denominator == 1 else q


class _Forest:
    """Union-find plus the adjacency of the spanning-forest edges that were kept."""

    def __init__(self):
        self.parent: dict = {}
        self.adj: dict = {}

    def find(self, node):
        parent = self.parent
        root = node
        while parent.get(root, root) != root:
            root = parent[root]
        while node != root:
            nxt = parent.get(node, node)
            parent[node] = root
            node = nxt
        return root

    def connected(self, s, t) -> bool:
        return self.find(s) == self.find(t)

    def link(self, s, t, ref) -> None:
        self.parent[self.find(s)] = self.find(t)
        self.adj.setdefault(s, []).append((t, ref, 1))
        self.adj.setdefault(t, []).append((s, ref, -1))

    def path(self, s, t) -> list[tuple[int, object]]:
        """Signed edge refs whose oriented sum is ``S - T``."""
        prev = {s: None}
        queue = deque([s])
        while queue:
            node = queue.popleft()
            if node == t:
                break
            for nxt, ref, sign in self.adj.get(node, ()):
                if nxt not in prev:
                    prev[nxt] = (node, ref, sign)
                    queue.append(nxt)
        chain = []
        node = t
        while prev[node] is not None:
            node_from, ref, sign = prev[node]
            chain.append((sign, ref))
            node = node_from
        chain.reverse()
        return chain


class SpanEngine:
    def __init__(self, rows):
        self.rows = rows
        self.forest = _Forest()
        self.pivots: dict[int, tuple[dict, dict]] = {}
        self.targets = []
        self.target_edges: list = []
        self.recipes: list = []
        self.ids: dict = {}
        self.edges: list = []
        for j, row in enumerate(rows):
            edge = self._edge(row)
            self.edges.append(edge)
            if edge is not None:
                if self.forest.connected(*edge):
                    continue
                self.forest.link(*edge, ("row", j))
            self._insert(row, j)

    def _vector(self, row) -> dict:
        return dict(zip(row.indices, row.coeffs))

    def _reduce(self, vec: dict, combo: dict) -> dict:
        """Reduce ``vec`` in place; ``combo`` accumulates the pivot-row multipliers used."""
        pivots = self.pivots
        while vec:
            lead = max(vec)
            entry = pivots.get(lead)
            if entry is None:
                return vec
            prow, pcombo = entry
            k = vec[lead]
            for col, val in prow.items():
                w = vec.get(col, 0) - k * val
                if w:
                    vec[col] = w
                else:
                    vec.pop(col, None)
            for j, val in pcombo.items():
                w = combo.get(j, 0) + k * val
                if w:
                    combo[j] = w
                else:
                    combo.pop(j, None)
        return vec

    def _insert(self, row, j: int) -> bool:
        combo: dict = {}
        vec = self._reduce(self._vector(row), combo)
        if not vec:
            return False
        lead = max(vec)
        scale = vec[lead]
        # vec == rows[j] - sum(combo[i] * rows[i]); store it normalized to a leading 1
        prow = {c: _exact_div(v, scale) for c, v in vec.items()}
        pcombo = {i: _exact_div(-v, scale) for i, v in combo.items()}
        pcombo[j] = _exact_div(1, scale)
        self.pivots[lead] = (prow, pcombo)
        return True

    def _node(self, cells: tuple) -> int:
        return self.ids.setdefault(cells, len(self.ids))

    def _edge(self, constraint):
        sides = constraint.sides()
        if sides is None or not sides[0] or not sides[1]:
            return None
        return self._node(sides[0]), self._node(sides[1])

    def add_targets(self, targets):
        """Certify targets in order; return the first one outside the span, else None."""
        for k, target in enumerate(targets):
            self.targets.append(target)
            edge = self._edge(target)
            self.target_edges.append(edge)
            if edge is not None and self.forest.connected(*edge):
                self.recipes.append(("chain", self.forest.path(*edge)))
                continue
            combo: dict = {}
            rest = self._reduce(self._vector(target), combo)
            if rest:
                self.recipes.append(None)
                return target
            self.recipes.append(("elim", combo))
            if edge is not None:
                self.forest.link(*edge, ("target", k))
        return None

    def certificate(self, k: int) -> dict[int, object]:
        recipe = self.recipes[k]
        kind, body = recipe
        if kind == "elim":
            return dict(body)
        lam: dict[int, object] = {}
        for sign, (src, idx) in body:
            part = {idx: 1} if src == "row" else self.certificate(idx)
            for j, v in part.items():
                w = lam.get(j, 0) + sign * v
                if w:
                    lam[j] = w
                else:
                    lam.pop(j, None)
        return lam

    def verify_structure(self, k: int) -> bool:
        """Check a certificate without expanding chains into premise rows."""
        kind, body = self.recipes[k]
        if kind == "elim":
            acc: dict = {}
            for j, coef in body.items():
                for c, i in zip(self.rows[j].coeffs, self.rows[j].indices):
                    acc[i] = acc.get(i, 0) + coef * c
            got = {i: c for i, c in acc.items() if c != 0}
            return got == dict(zip(self.targets[k].indices, self.targets[k].coeffs))
        s, t = self.target_edges[k]
        node = s
        for sign, (src, idx) in body:
            if src == "target" and idx >= k:
                return False
            a, b = self.edges[idx] if src == "row" else self.target_edges[idx]
            if sign == 1 and a == node:
                node = b
            elif sign == -1 and b == node:
                node = a
            else:
                return False
        return node == t
