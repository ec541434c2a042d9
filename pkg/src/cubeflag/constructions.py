"""Lower-bound constructions: layered colourings and the two-halves family."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .colouring import BLUE, RED, CubeColouring, ForbiddenFamily, Mode, density, is_f_free
from .cube import SignedPermutation, edge_list, identity, layer


class Kind(str, Enum):
    VERTEX_LAYERED = "vertex-layered"
    EDGE_LAYERED = "edge-layered"
    TWO_HALVES = "two-halves"


@dataclass(frozen=True)
class ConstructionSpec:
    kind: Kind
    n: int
    k: int = 3
    z: int = 0
    z2: int = 0
    split: int = 0
    maps: tuple[SignedPermutation, SignedPermutation] | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.n < 1:
            raise ValueError("dimension must be positive")
        if self.kind is Kind.TWO_HALVES:
            if not (0 <= self.z < 3 and 0 <= self.z2 < 3):
                raise ValueError("two-halves residues must lie in {0, 1, 2}")
            if not 0 <= self.split < self.n:
                raise ValueError("split direction out of range")
            for g in self.maps or ():
                if g.n != self.n - 1:
                    raise ValueError("half relabellings act on n-1 directions")
        else:
            if self.k < 2:
                raise ValueError("layer period must be at least 2")
            if not 0 <= self.z < self.k:
                raise ValueError("residue must satisfy 0 <= z < k")


def _drop_bit(v: int, d: int) -> int:
    return ((v >> (d + 1)) << d) | (v & ((1 << d) - 1))


def build(spec: ConstructionSpec) -> CubeColouring:
    n = spec.n
    if spec.kind is Kind.VERTEX_LAYERED:
        word = tuple(RED if layer(v) % spec.k == spec.z else BLUE for v in range(1 << n))
        return CubeColouring(Mode.VERTEX, n, word)
    if spec.kind is Kind.EDGE_LAYERED:
        word = tuple(RED if layer(u) % spec.k == spec.z else BLUE for _, u, _ in edge_list(n))
        return CubeColouring(Mode.EDGE, n, word)
    maps = spec.maps or (identity(n - 1), identity(n - 1))
    zs = (spec.z, spec.z2)
    word = []
    for v in range(1 << n):
        half = v >> spec.split & 1
        local = maps[half](_drop_bit(v, spec.split))
        word.append(RED if layer(local) % 3 == zs[half] else BLUE)
    return CubeColouring(Mode.VERTEX, n, tuple(word))


def evaluate(c: CubeColouring, fam: ForbiddenFamily) -> tuple[Fraction, bool]:
    return density(c), is_f_free(c, fam)
