"""Tagged partitions of [a, b] and their refinement.

A partition stores its nodes in ascending order, which is what every mesh
API expects; the composition engine traverses cells ascending from ``a``,
which realizes the descending-index composition convention (the cell
adjacent to ``a`` is applied innermost). ``cells_descending`` exposes the
other view for callers who want to read a composition outside-in.

Node arithmetic is endpoint-anchored (``a + k*h`` with the final node
forced to ``b``) rather than cumulative, so concatenation's exact endpoint
match is achievable and refinement never drifts.

Partitions are immutable values and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .rng import SplitMix64

__all__ = [
    "TagRule",
    "LEFT",
    "RIGHT",
    "MIDPOINT",
    "random_rule",
    "Partition",
    "uniform_partition",
    "concat",
    "refine_dyadic",
]


@dataclass(frozen=True)
class TagRule:
    """How the evaluation point inside each cell [lo, hi] is chosen.

    One of ``left``, ``right``, ``midpoint``, or ``random``; the random rule
    carries an explicit SplitMix64 seed so every draw is reproducible.
    """

    kind: str
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in ("left", "right", "midpoint", "random"):
            raise ValueError(f"unknown tag rule {self.kind!r}")
        if (self.kind == "random") != (self.seed is not None):
            raise ValueError("exactly the random rule carries a seed")


LEFT = TagRule("left")
RIGHT = TagRule("right")
MIDPOINT = TagRule("midpoint")


def random_rule(seed: int) -> TagRule:
    return TagRule("random", seed)


def _derive_tags(nodes: tuple[float, ...], rule: TagRule) -> tuple[float, ...]:
    if rule.kind == "left":
        return nodes[:-1]
    if rule.kind == "right":
        return nodes[1:]
    if rule.kind == "midpoint":
        return tuple(
            lo + 0.5 * (hi - lo) for lo, hi in zip(nodes[:-1], nodes[1:])
        )
    gen = SplitMix64(rule.seed)
    return tuple(
        lo + gen.next_float() * (hi - lo) for lo, hi in zip(nodes[:-1], nodes[1:])
    )


@dataclass(frozen=True)
class Partition:
    """A tagged mesh of [a, b].

    ``nodes`` are strictly increasing with ``nodes[0] == a`` and
    ``nodes[-1] == b`` exactly; ``tags[i]`` lies in cell
    ``[nodes[i], nodes[i+1]]`` inclusive. The empty partition (a == b,
    a single node, no cells) is the identity element for concatenation.
    """

    a: float
    b: float
    nodes: tuple[float, ...]
    tags: tuple[float, ...]
    rule: TagRule | None = None

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("endpoints must be finite")
        if self.a > self.b:
            raise ValueError(f"need a <= b, got a={self.a!r}, b={self.b!r}")
        nodes, tags = self.nodes, self.tags
        if len(nodes) < 1 or nodes[0] != self.a or nodes[-1] != self.b:
            raise ValueError("nodes must run exactly from a to b")
        if len(tags) != len(nodes) - 1:
            raise ValueError("need exactly one tag per cell")
        for lo, hi in zip(nodes[:-1], nodes[1:]):
            if not lo < hi:
                raise ValueError("nodes must be strictly increasing")
        for i, tag in enumerate(tags):
            if not (nodes[i] <= tag <= nodes[i + 1]):
                raise ValueError(
                    f"tag {tag!r} outside cell [{nodes[i]!r}, {nodes[i + 1]!r}]"
                )

    @classmethod
    def from_nodes(
        cls,
        nodes: tuple[float, ...] | list[float],
        tags: tuple[float, ...] | list[float],
        rule: TagRule | None = None,
    ) -> "Partition":
        nodes = tuple(float(x) for x in nodes)
        tags = tuple(float(x) for x in tags)
        return cls(nodes[0], nodes[-1], nodes, tags, rule)

    @property
    def n(self) -> int:
        """Cell count."""
        return len(self.nodes) - 1

    @property
    def widths(self) -> tuple[float, ...]:
        return tuple(hi - lo for lo, hi in zip(self.nodes[:-1], self.nodes[1:]))

    @property
    def mesh(self) -> float:
        """Mesh norm: the largest cell width (0 for the empty partition)."""
        return max(self.widths, default=0.0)

    def cells(self):
        """Yield (lo, hi, tag) ascending from a; the engine applies these in
        this order, innermost first."""
        for i in range(self.n):
            yield self.nodes[i], self.nodes[i + 1], self.tags[i]

    def cells_descending(self):
        """The composition written outside-in, highest cell first."""
        for i in reversed(range(self.n)):
            yield self.nodes[i], self.nodes[i + 1], self.tags[i]


def uniform_partition(a: float, b: float, n: int, rule: TagRule = LEFT) -> Partition:
    """n equal cells over [a, b] with tags drawn per ``rule``.

    ``n == 0`` is allowed only for the empty interval a == b, and an empty
    interval admits only n == 0.
    """
    if n < 0:
        raise ValueError("cell count must be non-negative")
    if a > b:
        raise ValueError(f"need a <= b, got a={a!r}, b={b!r}")
    if n == 0:
        if a < b:
            raise ValueError("n = 0 requires a == b")
        return Partition(a, b, (a,), (), rule)
    if a == b:
        raise ValueError("a == b requires n == 0")
    h = (b - a) / n
    nodes = (a,) + tuple(a + k * h for k in range(1, n)) + (b,)
    return Partition(a, b, nodes, _derive_tags(nodes, rule), rule)


def concat(p: Partition, r: Partition) -> Partition:
    """Join a partition of [a, b] with one of [b, c] into one of [a, c].

    The shared endpoint must match exactly; node and tag sequences are
    concatenated verbatim, so any composition over the result performs the
    same floating-point operations as composing the two halves in turn.
    """
    if p.b != r.a:
        raise ValueError(
            f"endpoint mismatch: left ends at {p.b!r}, right starts at {r.a!r}"
        )
    rule = p.rule if p.rule == r.rule else None
    return Partition(p.a, r.b, p.nodes + r.nodes[1:], p.tags + r.tags, rule)


def refine_dyadic(p: Partition) -> Partition:
    """Split every cell at its midpoint; tags are re-derived from the rule.

    Deterministic rules (left/right/midpoint) re-apply their formula. For
    random-rule or mixed partitions the original tag's relative position is
    mapped into both children (clamped into the cell), which keeps
    refinement deterministic without a fresh draw.
    """
    if p.n == 0:
        return p
    nodes: list[float] = [p.nodes[0]]
    tags: list[float] = []
    kind = p.rule.kind if p.rule is not None else None
    for i in range(p.n):
        lo, hi, tag = p.nodes[i], p.nodes[i + 1], p.tags[i]
        mid = lo + 0.5 * (hi - lo)
        for clo, chi in ((lo, mid), (mid, hi)):
            if kind == "left":
                ctag = clo
            elif kind == "right":
                ctag = chi
            elif kind == "midpoint":
                ctag = clo + 0.5 * (chi - clo)
            else:
                theta = (tag - lo) / (hi - lo)
                ctag = min(max(clo + theta * (chi - clo), clo), chi)
            nodes.append(chi)
            tags.append(ctag)
    return Partition(p.a, p.b, tuple(nodes), tuple(tags), p.rule)
