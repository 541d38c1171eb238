"""Relations from the coupling examples: domination and paths in trees."""

from __future__ import annotations

from ..couplings import Relation, domination, equality, full
from .trees import vertex, vertex_index

__all__ = ["domination_relation", "paths_relation", "equality", "full"]


def domination_relation() -> Relation:
    return domination()


class _TreeCode:
    """What the first n tree-code bits say about a tree."""

    def __init__(self, u: str):
        self.u = u
        self.n = len(u)
        # every vertex of depth > horizon is unencoded, and so are all its descendants
        self.horizon = len(vertex(self.n - 1)) if self.n else -1
        self._ext: dict[str, bool] = {}

    def state(self, w: str):
        i = vertex_index(w)
        return self.u[i] if i < self.n else None

    def extendable(self, w: str) -> bool:
        """Some leafless tree may contain w with an infinite branch below it."""
        hit = self._ext.get(w)
        if hit is None:
            if self.state(w) == "0":
                hit = False
            elif len(w) > self.horizon:
                hit = True
            else:
                hit = self.extendable(w + "0") or self.extendable(w + "1")
            self._ext[w] = hit
        return hit

    def forced(self) -> set[str]:
        """Vertices encoded present, with all their ancestors."""
        out = {""}
        for i, b in enumerate(self.u):
            if b == "1":
                w = vertex(i)
                out.update(w[:j] for j in range(len(w) + 1))
        return out

    def consistent(self, extra: set[str] = frozenset()) -> bool:
        # a prefix-closed set of vertices lies in a leafless tree matching the
        # code iff each of them is extendable
        return all(self.extendable(w) for w in self.forced() | extra)


def paths_relation() -> Relation:
    """u = first n tree-code bits, v = first n steps of a path from the root.

    Related iff some leafless tree matching u contains the path v. Only codes
    of non-empty trees relate to anything, so the relation carries the
    support restriction "u is the code prefix of some non-empty tree".
    """

    def related(u: str, v: str) -> bool:
        if not u:
            return True
        code = _TreeCode(u)
        return code.consistent({v[:j] for j in range(len(v) + 1)})

    def row(u: str) -> list[str]:
        if not u:
            return [""]
        code = _TreeCode(u)
        if not code.consistent():
            return []
        n = len(u)
        out = []
        stack = [""]
        while stack:
            w = stack.pop()
            if len(w) == n:
                out.append(w)
                continue
            for b in "10":
                if code.extendable(w + b):
                    stack.append(w + b)
        return out

    def support(u: str) -> bool:
        return not u or _TreeCode(u).consistent()

    return Relation("paths", related, row, support)
