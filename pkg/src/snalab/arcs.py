"""Finite unions of arcs on the circle, with exact set algebra.

An ArcSet is stored as disjoint half-open pieces [l, r) with
0 <= l < r <= 1; an arc that crosses 0 is held as two pieces. The point of
this module is that union, intersection, complement and difference never
*compute* new endpoints: every endpoint of a result is a copy of an input
endpoint (or the constants 0.0/1.0). That makes identities like
complement(complement(A)) == A and the nesting of critical regions
I_{n+1} = I_{n+1} & I_n hold exactly in floats, no tolerance needed.
Only translate() does arithmetic (one addition per endpoint).
"""

from __future__ import annotations

import numpy as np


class ArcSet:
    __slots__ = ("ls", "rs")

    def __init__(self, ls=(), rs=()):
        pieces = [(float(l), float(r)) for l, r in zip(ls, rs) if l < r]
        for l, r in pieces:
            if not (0.0 <= l < r <= 1.0):
                raise ValueError(f"piece [{l}, {r}) outside [0, 1]")
        pieces.sort()
        merged: list[list[float]] = []
        for l, r in pieces:
            if merged and l <= merged[-1][1]:
                if r > merged[-1][1]:
                    merged[-1][1] = r
            else:
                merged.append([l, r])
        self.ls = tuple(p[0] for p in merged)
        self.rs = tuple(p[1] for p in merged)

    # -- constructors ------------------------------------------------------

    @classmethod
    def empty(cls) -> "ArcSet":
        return cls()

    @classmethod
    def full(cls) -> "ArcSet":
        return cls((0.0,), (1.0,))

    @classmethod
    def from_pairs(cls, pairs) -> "ArcSet":
        """Build from (start, end) circle arcs, each read counterclockwise
        from start to end. start == end gives the empty arc, not the full
        circle. Overlapping arcs are unioned."""
        ls, rs = [], []
        for a, b in pairs:
            a = float(np.mod(a, 1.0))
            b = float(np.mod(b, 1.0))
            if a == 1.0:
                a = 0.0
            if b == 1.0:
                b = 0.0
            if a < b:
                ls.append(a)
                rs.append(b)
            elif a > b:
                ls.append(a)
                rs.append(1.0)
                if b > 0.0:
                    ls.append(0.0)
                    rs.append(b)
        return cls(ls, rs)

    # -- set algebra (endpoint-copying) ------------------------------------

    def complement(self) -> "ArcSet":
        ls, rs = [], []
        prev = 0.0
        for l, r in zip(self.ls, self.rs):
            if prev < l:
                ls.append(prev)
                rs.append(l)
            prev = r
        if prev < 1.0:
            ls.append(prev)
            rs.append(1.0)
        return ArcSet(ls, rs)

    def intersect(self, other: "ArcSet") -> "ArcSet":
        ls, rs = [], []
        i = j = 0
        while i < len(self.ls) and j < len(other.ls):
            l = max(self.ls[i], other.ls[j])
            r = min(self.rs[i], other.rs[j])
            if l < r:
                ls.append(l)
                rs.append(r)
            if self.rs[i] <= other.rs[j]:
                i += 1
            else:
                j += 1
        return ArcSet(ls, rs)

    def union(self, other: "ArcSet") -> "ArcSet":
        return self.complement().intersect(other.complement()).complement()

    def minus(self, other: "ArcSet") -> "ArcSet":
        return self.intersect(other.complement())

    def __and__(self, other):
        return self.intersect(other)

    def __or__(self, other):
        return self.union(other)

    def __sub__(self, other):
        return self.minus(other)

    # -- geometry ----------------------------------------------------------

    def translate(self, s: float) -> "ArcSet":
        """Rotate the whole set by s. One addition per endpoint."""
        s = float(np.mod(s, 1.0))
        if s == 0.0 or s == 1.0:
            return ArcSet(self.ls, self.rs)
        ls, rs = [], []
        for l, r in zip(self.ls, self.rs):
            l2, r2 = l + s, r + s
            # the image of the joint 1 == 0 must be the same float s on
            # both sides, and (1.0 + s) - 1.0 is not always s; pin it
            r2w = s if r == 1.0 else r2 - 1.0
            if l2 >= 1.0:
                ls.append(l2 - 1.0)
                rs.append(r2w)
            elif r2 <= 1.0:
                ls.append(l2)
                rs.append(r2)
            else:
                ls.append(l2)
                rs.append(1.0)
                if r2w > 0.0:
                    ls.append(0.0)
                    rs.append(r2w)
        return ArcSet(ls, rs)

    def measure(self) -> float:
        return float(sum(r - l for l, r in zip(self.ls, self.rs)))

    def contains(self, x):
        """Membership test; scalar -> bool, array -> bool array."""
        if not self.ls:
            if np.ndim(x) == 0:
                return False
            return np.zeros(np.shape(x), dtype=bool)
        xs = np.mod(np.asarray(x, dtype=float), 1.0)
        xs = np.where(xs == 1.0, 0.0, xs)
        ls = np.asarray(self.ls)
        rs = np.asarray(self.rs)
        idx = np.searchsorted(ls, xs, side="right") - 1
        ok = idx >= 0
        safe = np.where(ok, idx, 0)
        inside = ok & (xs < rs[safe])
        if np.ndim(x) == 0:
            return bool(inside)
        return inside

    def components(self) -> list[tuple[float, float]]:
        """Connected components as (start, length), rejoining across 0.

        A piece ending at 1.0 and a piece starting at 0.0 are one circular
        component. The full circle reports [(0.0, 1.0)].
        """
        n = len(self.ls)
        if n == 0:
            return []
        if n == 1 and self.ls[0] == 0.0 and self.rs[0] == 1.0:
            return [(0.0, 1.0)]
        comps = [(l, r - l) for l, r in zip(self.ls, self.rs)]
        if n >= 2 and self.ls[0] == 0.0 and self.rs[-1] == 1.0:
            first = comps.pop(0)
            start, length = comps.pop()
            comps.append((start, length + first[1]))
        return comps

    @property
    def n_components(self) -> int:
        return len(self.components())

    def widths(self) -> list[float]:
        return [length for _, length in self.components()]

    @property
    def arcs(self) -> tuple[tuple[float, float], ...]:
        """(left, length) per component, the canonical outward form."""
        return tuple(self.components())

    def merge_gaps(self, eps: float) -> "ArcSet":
        """Close every gap strictly shorter than eps (wrap gap included)."""
        n = len(self.ls)
        if n == 0:
            return ArcSet()
        ls = list(self.ls)
        rs = list(self.rs)
        out_l, out_r = [ls[0]], [rs[0]]
        for i in range(1, n):
            if ls[i] - out_r[-1] < eps:
                out_r[-1] = rs[i]
            else:
                out_l.append(ls[i])
                out_r.append(rs[i])
        # wrap gap between the last piece and the first
        if len(out_l) >= 1 and (1.0 - out_r[-1]) + out_l[0] < eps:
            if len(out_l) == 1:
                return ArcSet.full()
            out_r[-1] = 1.0
            out_l[0] = 0.0
        return ArcSet(out_l, out_r)

    def subset_of(self, other: "ArcSet", tol: float = 0.0) -> bool:
        return self.minus(other).measure() <= tol

    # -- dunder ------------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ArcSet)
            and self.ls == other.ls
            and self.rs == other.rs
        )

    def __hash__(self):
        return hash((self.ls, self.rs))

    def __bool__(self) -> bool:
        return bool(self.ls)

    def __repr__(self) -> str:
        if not self.ls:
            return "ArcSet.empty()"
        inner = ", ".join(f"[{l:.6g},{r:.6g})" for l, r in zip(self.ls, self.rs))
        return f"ArcSet({inner})"
