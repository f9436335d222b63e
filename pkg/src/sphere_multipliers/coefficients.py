"""Per-degree coefficient tables {c_{k,j}}, j = 1..d_k^m."""

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ShapeError
from .specialfns import harmonic_dim


@dataclass(frozen=True)
class CoefficientTable:
    """
    Real coefficients of a band-limited function in an orthonormal harmonic
    basis, one block per degree k = 0..K_max.
    """
    m: int
    blocks: tuple[np.ndarray, ...]

    @property
    def K_max(self) -> int:
        return len(self.blocks) - 1

    @property
    def size(self) -> int:
        return sum(len(block) for block in self.blocks)

    def flat(self) -> np.ndarray:
        """Degree-major concatenation of the blocks."""
        return np.concatenate(self.blocks)

    def degree_energies(self) -> np.ndarray:
        """E_k = sum_j |c_{k,j}|^2 for each degree."""
        return np.array([math.fsum(block * block) for block in self.blocks])

    def energy(self) -> float:
        return math.fsum(self.degree_energies())

    def scaled(self, factors: Sequence[float]) -> "CoefficientTable":
        """Multiply every coefficient of degree k by factors[k]."""
        factors = np.asarray(factors, dtype=float)
        if factors.shape[0] < len(self.blocks):
            raise ShapeError(f"need {len(self.blocks)} degree factors, got {factors.shape[0]}")
        return CoefficientTable(self.m, tuple(f * block for f, block in zip(factors, self.blocks)))

    def check_compatible(self, other: "CoefficientTable") -> None:
        if self.m != other.m or self.K_max != other.K_max:
            raise ShapeError(
                f"coefficient tables differ: (m={self.m}, K={self.K_max}) "
                f"vs (m={other.m}, K={other.K_max})"
            )

    def __add__(self, other: "CoefficientTable") -> "CoefficientTable":
        self.check_compatible(other)
        return CoefficientTable(self.m, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other: "CoefficientTable") -> "CoefficientTable":
        self.check_compatible(other)
        return CoefficientTable(self.m, tuple(a - b for a, b in zip(self.blocks, other.blocks)))


def coefficient_table(m: int, blocks: Iterable[Sequence[float]]) -> CoefficientTable:
    """Validate block lengths against d_k^m and build a table."""
    checked = []
    for k, block in enumerate(blocks):
        arr = np.asarray(block)
        if np.iscomplexobj(arr):
            raise DomainError(f"complex coefficients in degree {k}; only real harmonics are supported")
        arr = np.array(arr, dtype=float).ravel()
        expected = harmonic_dim(k, m)
        if arr.shape[0] != expected:
            raise ShapeError(f"degree {k} block has {arr.shape[0]} entries, expected d_{k}^{m} = {expected}")
        if not np.all(np.isfinite(arr)):
            raise DomainError(f"non-finite coefficient in degree {k}")
        checked.append(arr)
    if not checked:
        raise ShapeError("a coefficient table needs at least the degree-0 block")
    return CoefficientTable(m, tuple(checked))


def zeros(m: int, K_max: int) -> CoefficientTable:
    return CoefficientTable(m, tuple(np.zeros(harmonic_dim(k, m)) for k in range(K_max + 1)))


def unit(m: int, K_max: int, k: int, j: int) -> CoefficientTable:
    """The table of the single basis function Y_{k,j} (j is 1-based)."""
    table = zeros(m, K_max)
    if not 0 <= k <= K_max or not 1 <= j <= len(table.blocks[k]):
        raise DomainError(f"no basis function ({k}, {j}) below band limit {K_max}")
    table.blocks[k][j - 1] = 1.0
    return table


def from_flat(m: int, K_max: int, values: Sequence[float]) -> CoefficientTable:
    """Split a degree-major vector back into per-degree blocks."""
    values = np.asarray(values, dtype=float).ravel()
    sizes = [harmonic_dim(k, m) for k in range(K_max + 1)]
    if values.shape[0] != sum(sizes):
        raise ShapeError(f"expected {sum(sizes)} coefficients for K={K_max}, got {values.shape[0]}")
    offsets = np.cumsum([0] + sizes)
    return CoefficientTable(
        m, tuple(values[offsets[k]:offsets[k + 1]].copy() for k in range(K_max + 1))
    )
