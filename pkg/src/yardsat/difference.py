"""Incremental longest-path labels for a growing difference-constraint system.

Arcs ``(x, y, l)`` mean ``t[y] >= t[x] + l``. Node 0 is the origin. ``fwd[x]``
is the longest path ``o -> x`` (the earliest feasible time of ``x``) and
``bwd[x]`` the longest path ``x -> o`` (so ``-bwd[x]`` is the latest time).
The system is consistent as long as ``fwd[x] + bwd[x] <= 0`` everywhere; a
positive cycle through a node connected to the origin both ways shows up as a
violation of that inequality. Every change is trailed so that a search can
roll back to any checkpoint.
"""

from __future__ import annotations

from collections import deque

NEG = float("-inf")


class DifferenceSystem:
    def __init__(self, n: int):
        self.n = n
        self.fwd: list[float] = [NEG] * n
        self.bwd: list[float] = [NEG] * n
        self.fwd[0] = 0
        self.bwd[0] = 0
        self.out: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        self.inc: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        self._arc_log: list[tuple[int, int]] = []
        self._trail: list[tuple[int, int, float]] = []  # (direction, node, old)
        self.propagations = 0

    # -- trail -----------------------------------------------------------

    def checkpoint(self) -> tuple[int, int]:
        return len(self._arc_log), len(self._trail)

    def rollback(self, mark: tuple[int, int]) -> None:
        arcs, trail = mark
        while len(self._trail) > trail:
            d, x, old = self._trail.pop()
            (self.fwd if d == 0 else self.bwd)[x] = old
        while len(self._arc_log) > arcs:
            x, y = self._arc_log.pop()
            self.out[x].pop()
            self.inc[y].pop()

    # -- queries ---------------------------------------------------------

    def earliest(self, x: int) -> float:
        return self.fwd[x]

    def latest(self, x: int) -> float:
        return -self.bwd[x]

    def satisfied(self, arcs) -> bool:
        """True if the current earliest labels already meet every arc."""
        f = self.fwd
        return all(f[a.head] >= f[a.tail] + a.length for a in arcs)

    def entailed(self, arcs) -> bool:
        """True if every arc is implied by the node windows [earliest, latest]."""
        f, b = self.fwd, self.bwd
        return all(f[a.head] >= -b[a.tail] + a.length for a in arcs)

    # -- updates ---------------------------------------------------------

    def add_arcs(self, arcs) -> bool:
        for a in arcs:
            if not self.add(a.tail, a.head, a.length):
                return False
        return True

    def add(self, x: int, y: int, length: int) -> bool:
        """Add an arc; returns False when the system became inconsistent.

        On False the caller must roll back to a checkpoint.
        """
        self.out[x].append((y, length))
        self.inc[y].append((x, length))
        self._arc_log.append((x, y))
        if self.fwd[x] + length > self.fwd[y]:
            if not self._push_forward(y, self.fwd[x] + length):
                return False
        if self.bwd[y] + length > self.bwd[x]:
            if not self._push_backward(x, self.bwd[y] + length):
                return False
        return True

    def _push_forward(self, start: int, value: float) -> bool:
        fwd, bwd, trail = self.fwd, self.bwd, self._trail
        trail.append((0, start, fwd[start]))
        fwd[start] = value
        queue = deque([start])
        budget = self.n * (len(self._arc_log) + 1)
        while queue:
            budget -= 1
            if budget < 0:  # positive cycle away from the origin
                return False
            x = queue.popleft()
            fx = fwd[x]
            if fx + bwd[x] > 0:
                return False
            self.propagations += 1
            for y, length in self.out[x]:
                if fx + length > fwd[y]:
                    trail.append((0, y, fwd[y]))
                    fwd[y] = fx + length
                    queue.append(y)
        return True

    def _push_backward(self, start: int, value: float) -> bool:
        fwd, bwd, trail = self.fwd, self.bwd, self._trail
        trail.append((1, start, bwd[start]))
        bwd[start] = value
        queue = deque([start])
        budget = self.n * (len(self._arc_log) + 1)
        while queue:
            budget -= 1
            if budget < 0:
                return False
            y = queue.popleft()
            by = bwd[y]
            if fwd[y] + by > 0:
                return False
            self.propagations += 1
            for x, length in self.inc[y]:
                if by + length > bwd[x]:
                    trail.append((1, x, bwd[x]))
                    bwd[x] = by + length
                    queue.append(x)
        return True
