"""Fundamental types: torus grid, rows, weighted point sets, energy triples.

Every quantity can be evaluated in one of two numeric modes:

* exact mode -- ``fractions.Fraction`` end to end, used to verify identities
  that hold as exact equalities;
* float mode -- binary64 (numpy where it helps), the fast path.

Grid points are stored as integer coordinate tuples and embedded as ``m/M``
on demand, so exact mode carries no representation error.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Optional, Sequence, Union

import numpy as np

Scalar = Union[int, float, Fraction]

__all__ = [
    "Scalar",
    "as_fraction",
    "as_float",
    "SymmetryError",
    "RowSumError",
    "TorusGrid",
    "Row",
    "WeightedPointSet",
    "GridWeights",
    "EnergyTriple",
    "TripleConstants",
    "canonical_triple",
    "discrepancy_triple",
    "triple_constants",
    "product_kernel",
]


def as_fraction(x: Scalar | str) -> Fraction:
    """Convert to an exact rational (floats convert to their exact binary value)."""
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


def as_float(x: Scalar) -> float:
    return float(x)


class SymmetryError(ValueError):
    """A potential failed its required symmetry at a sampled argument."""


class RowSumError(ValueError):
    """Grid row sums of a pair potential are not constant for the given M."""


@dataclass(frozen=True)
class TorusGrid:
    """The discretized torus (1/M){0,...,M-1}^d.

    ``M`` is the per-axis resolution, ``d`` the dimension.  Cells are integer
    tuples in {0,...,M-1}^d; ``embed`` maps a cell to its point m/M in [0,1)^d.
    """

    M: int
    d: int

    def __post_init__(self) -> None:
        if self.M < 1 or self.d < 1:
            raise ValueError(f"grid needs M >= 1 and d >= 1, got M={self.M}, d={self.d}")

    @property
    def size(self) -> int:
        return self.M**self.d

    def cells(self) -> Iterator[tuple[int, ...]]:
        """All cells in row-major order over (m_1, ..., m_d)."""
        return itertools.product(range(self.M), repeat=self.d)

    def index(self, cell: Sequence[int]) -> int:
        idx = 0
        for m in cell:
            idx = idx * self.M + m
        return idx

    def cell(self, index: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.d):
            index, m = divmod(index, self.M)
            out.append(m)
        return tuple(reversed(out))

    def embed(self, cell: Sequence[int], exact: bool = False) -> tuple[Scalar, ...]:
        if exact:
            return tuple(Fraction(m, self.M) for m in cell)
        return tuple(m / self.M for m in cell)

    def rows(self) -> Iterator["Row"]:
        """All d * M^(d-1) rows, grouped by axis."""
        for axis in range(self.d):
            for fixed in itertools.product(range(self.M), repeat=self.d - 1):
                yield Row(self, axis, fixed)

    def row_of(self, cell: Sequence[int], axis: int) -> "Row":
        fixed = tuple(m for k, m in enumerate(cell) if k != axis)
        return Row(self, axis, fixed)


@dataclass(frozen=True)
class Row:
    """A k-row: the M cells varying only in coordinate ``axis`` (0-based)."""

    grid: TorusGrid
    axis: int
    fixed: tuple[int, ...]

    def cells(self) -> Iterator[tuple[int, ...]]:
        for m in range(self.grid.M):
            yield self.fixed[: self.axis] + (m,) + self.fixed[self.axis :]

    def __len__(self) -> int:
        return self.grid.M


def _validate_coordinate(x: Scalar) -> None:
    if not (0 <= x < 1):
        raise ValueError(f"coordinate {x!r} outside [0, 1)")


class WeightedPointSet:
    """Finite points in [0,1)^d with real (possibly negative) weights.

    Duplicate points are merged by summing their weights at construction.
    When the set is supported on a grid, ``grid`` and integer ``cells`` are
    kept so exact evaluators can work on indices instead of coordinates.
    """

    def __init__(
        self,
        d: int,
        points: Sequence[Sequence[Scalar]],
        weights: Optional[Sequence[Scalar]] = None,
        *,
        grid: Optional[TorusGrid] = None,
        cells: Optional[Sequence[Sequence[int]]] = None,
    ):
        if d < 1:
            raise ValueError("dimension must be >= 1")
        if weights is None:
            weights = [1] * len(points)
        if len(weights) != len(points):
            raise ValueError("points and weights differ in length")
        merged: dict[tuple[Scalar, ...], Scalar] = {}
        cell_of: dict[tuple[Scalar, ...], tuple[int, ...]] = {}
        for i, p in enumerate(points):
            p = tuple(p)
            if len(p) != d:
                raise ValueError(f"point {p!r} has dimension {len(p)}, expected {d}")
            for x in p:
                _validate_coordinate(x)
            merged[p] = merged.get(p, 0) + weights[i]
            if cells is not None:
                cell_of[p] = tuple(cells[i])
        self.d = d
        self.points: tuple[tuple[Scalar, ...], ...] = tuple(merged.keys())
        self.weights: tuple[Scalar, ...] = tuple(merged.values())
        self.grid = grid
        self.cells = tuple(cell_of[p] for p in self.points) if cells is not None else None
        self._coords_float: Optional[np.ndarray] = None

    @classmethod
    def on_grid(
        cls,
        grid: TorusGrid,
        cells: Sequence[Sequence[int]],
        weights: Optional[Sequence[Scalar]] = None,
    ) -> "WeightedPointSet":
        pts = [grid.embed(c, exact=True) for c in cells]
        return cls(grid.d, pts, weights, grid=grid, cells=[tuple(c) for c in cells])

    def __len__(self) -> int:
        return len(self.points)

    def total_weight(self) -> Scalar:
        return sum(self.weights)

    def coords_float(self) -> np.ndarray:
        if self._coords_float is None:
            self._coords_float = np.array(
                [[float(x) for x in p] for p in self.points], dtype=float
            ).reshape(len(self.points), self.d)
        return self._coords_float

    def weights_float(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights], dtype=float)


class GridWeights:
    """A weight function w: G -> R stored densely in row-major cell order."""

    def __init__(self, grid: TorusGrid, values: Sequence[Scalar]):
        values = tuple(values)
        if len(values) != grid.size:
            raise ValueError(f"expected {grid.size} weights for the grid, got {len(values)}")
        self.grid = grid
        self.values = values

    @classmethod
    def constant(cls, grid: TorusGrid, r: Scalar) -> "GridWeights":
        """The weight w_r with w_r(x) = r/M everywhere."""
        if isinstance(r, float):
            v: Scalar = r / grid.M
        else:
            v = Fraction(r) / grid.M
        return cls(grid, [v] * grid.size)

    @classmethod
    def indicator(cls, grid: TorusGrid, cells: Sequence[Sequence[int]]) -> "GridWeights":
        values = [0] * grid.size
        for c in cells:
            values[grid.index(c)] += 1
        return cls(grid, values)

    @classmethod
    def from_point_set(cls, X: WeightedPointSet) -> "GridWeights":
        if X.grid is None or X.cells is None:
            raise ValueError("point set is not grid-supported")
        values: list[Scalar] = [0] * X.grid.size
        for c, w in zip(X.cells, X.weights):
            values[X.grid.index(c)] += w
        return cls(X.grid, values)

    def value_at(self, cell: Sequence[int]) -> Scalar:
        return self.values[self.grid.index(cell)]

    def total(self) -> Scalar:
        return sum(self.values)

    def as_array(self) -> np.ndarray:
        """Weights as a float array of shape (M,)*d."""
        g = self.grid
        return np.array([float(v) for v in self.values], dtype=float).reshape((g.M,) * g.d)

    def row_sum(self, row: Row) -> Scalar:
        return sum(self.value_at(c) for c in row.cells())

    def shifted(self, offset: Sequence[int]) -> "GridWeights":
        """Cyclic shift x -> x + offset/M of the support."""
        g = self.grid
        out: list[Scalar] = [0] * g.size
        for cell in g.cells():
            target = tuple((m + o) % g.M for m, o in zip(cell, offset))
            out[g.index(target)] = self.values[g.index(cell)]
        return GridWeights(g, out)

    def to_point_set(self, include_zeros: bool = False) -> WeightedPointSet:
        cells, weights = [], []
        for cell in self.grid.cells():
            w = self.value_at(cell)
            if include_zeros or w != 0:
                cells.append(cell)
                weights.append(w)
        return WeightedPointSet.on_grid(self.grid, cells, weights)


class EnergyTriple:
    """A pair potential plus the boundary/pair terms derived from it.

    The triple is determined by the symmetric two-argument potential
    ``eta_p``; ``eta(s) = eta_p(s, 0)`` and

    * ``eta_e1(s) = eta(0) - eta(s)`` (interaction with the box boundary),
    * ``eta_e2(s, t) = eta(0) - eta(s) - eta(t) + eta_p(s, t)``.

    Canonically constructed triples come from a single function ``eta`` with
    ``eta(s) = eta(1-s)`` via ``eta_p(s, t) = eta(|s - t|)``; they admit a
    spectral decomposition on the grid.  Sample tables over a grid of
    resolution M are memoized per (M, mode).
    """

    def __init__(
        self,
        eta_p: Callable[[Scalar, Scalar], Scalar],
        *,
        canonical_eta: Optional[Callable[[Scalar], Scalar]] = None,
        name: str = "",
    ):
        self._eta_p = eta_p
        self._canonical_eta = canonical_eta
        self.name = name
        self._tables: dict = {}

    @property
    def canonical(self) -> bool:
        return self._canonical_eta is not None

    def eta_p(self, s: Scalar, t: Scalar) -> Scalar:
        return self._eta_p(s, t)

    def eta(self, s: Scalar) -> Scalar:
        if self._canonical_eta is not None:
            return self._canonical_eta(s)
        return self._eta_p(s, 0)

    def eta_e1(self, s: Scalar) -> Scalar:
        return self.eta(0) - self.eta(s)

    def eta_e2(self, s: Scalar, t: Scalar) -> Scalar:
        return self.eta(0) - self.eta(s) - self.eta(t) + self._eta_p(s, t)

    # -- grid sample tables ------------------------------------------------

    def _check_symmetry(self, M: int, exact: bool) -> None:
        """Reject a claimed-canonical eta that fails eta(s) = eta(1-s) on grid samples."""
        eta = self._canonical_eta
        assert eta is not None
        for m in range(1, M):
            s = Fraction(m, M) if exact else m / M
            s1 = Fraction(M - m, M) if exact else (M - m) / M
            a, b = eta(s), eta(s1)
            ok = (a == b) if exact else abs(a - b) <= 1e-12 * (1 + abs(a))
            if not ok:
                raise SymmetryError(
                    f"eta({m}/{M}) = {a!r} but eta({M - m}/{M}) = {b!r}; "
                    "canonical construction requires eta(s) = eta(1-s)"
                )

    def eta_vector(self, M: int, exact: bool = False):
        """Samples eta(m/M), m = 0..M-1 (list of Fractions or float ndarray)."""
        key = ("vec", M, exact)
        if key not in self._tables:
            if self.canonical:
                self._check_symmetry(M, exact)
            if exact:
                vec = [as_fraction(self.eta(Fraction(m, M))) for m in range(M)]
                self._tables[key] = vec
            else:
                self._tables[key] = np.array([float(self.eta(m / M)) for m in range(M)])
        return self._tables[key]

    def pair_table(self, M: int, exact: bool = False):
        """M x M samples eta_p(m/M, n/M) (nested lists of Fractions, or ndarray)."""
        key = ("pair", M, exact)
        if key not in self._tables:
            if self.canonical:
                vec = self.eta_vector(M, exact)
                if exact:
                    tab = [[vec[abs(m - n)] for n in range(M)] for m in range(M)]
                else:
                    idx = np.abs(np.arange(M)[:, None] - np.arange(M)[None, :])
                    tab = vec[idx]
            elif exact:
                tab = [
                    [as_fraction(self._eta_p(Fraction(m, M), Fraction(n, M))) for n in range(M)]
                    for m in range(M)
                ]
            else:
                tab = np.array(
                    [[float(self._eta_p(m / M, n / M)) for n in range(M)] for m in range(M)]
                )
            self._tables[key] = tab
        return self._tables[key]

    def eta_e1_vector(self, M: int, exact: bool = False):
        key = ("e1", M, exact)
        if key not in self._tables:
            vec = self.eta_vector(M, exact)
            eta0 = vec[0]
            if exact:
                self._tables[key] = [eta0 - v for v in vec]
            else:
                self._tables[key] = eta0 - vec
        return self._tables[key]

    def eta_e2_table(self, M: int, exact: bool = False):
        key = ("e2", M, exact)
        if key not in self._tables:
            vec = self.eta_vector(M, exact)
            pair = self.pair_table(M, exact)
            eta0 = vec[0]
            if exact:
                tab = [
                    [eta0 - vec[m] - vec[n] + pair[m][n] for n in range(M)] for m in range(M)
                ]
            else:
                tab = eta0 - vec[:, None] - vec[None, :] + pair
            self._tables[key] = tab
        return self._tables[key]


def canonical_triple(eta: Callable[[Scalar], Scalar], name: str = "") -> EnergyTriple:
    """Build the triple with eta_p(s, t) = eta(|s - t|).

    ``eta`` must satisfy eta(s) = eta(1-s); this is checked on the grid
    samples s = m/M whenever a sample table for resolution M is built, and a
    violation raises :class:`SymmetryError` naming the offending sample.
    """

    def eta_p(s: Scalar, t: Scalar) -> Scalar:
        return eta(abs(s - t))

    return EnergyTriple(eta_p, canonical_eta=eta, name=name)


def _l2_eta(s: Scalar) -> Scalar:
    return Fraction(1, 2) - s + s * s


_DISCREPANCY_TRIPLE = canonical_triple(_l2_eta, name="l2-periodic")


def discrepancy_triple() -> EnergyTriple:
    """The triple of the periodic/extreme L2-discrepancy: eta(s) = 1/2 - s + s^2."""
    return _DISCREPANCY_TRIPLE


@dataclass(frozen=True)
class TripleConstants:
    """Row-sum constant T(M), diagonal sum Delta(M) and eta(0) of a triple."""

    T: Scalar
    Delta: Scalar
    eta0: Scalar


def triple_constants(triple: EnergyTriple, M: int, exact: bool = True) -> TripleConstants:
    """Compute T(M) and Delta(M), verifying that the row sums are m-independent.

    Raises :class:`RowSumError` naming two differing rows when the pair
    potential is not an energy triple at this resolution.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    tab = triple.pair_table(M, exact)
    sums = [sum(tab[m][n] for n in range(M)) for m in range(M)]
    ref = sums[0]
    for m, s in enumerate(sums):
        ok = (s == ref) if exact else abs(s - ref) <= 1e-12 * (1 + abs(ref))
        if not ok:
            raise RowSumError(
                f"row sums differ: row 0 gives {ref!r}, row {m} gives {s!r}; "
                f"not an energy triple for M={M}"
            )
    delta = sum(tab[m][m] for m in range(M))
    eta0 = tab[0][0]
    return TripleConstants(T=ref, Delta=delta, eta0=eta0)


_KERNEL_KINDS = ("periodic", "extreme-pair", "extreme-boundary")


def product_kernel(
    triple: EnergyTriple,
    x: Sequence[Scalar],
    y: Optional[Sequence[Scalar]],
    kind: str = "periodic",
) -> Scalar:
    """d-fold product potential between points (or point and boundary).

    ``periodic`` multiplies eta_p over coordinates, ``extreme-pair``
    multiplies eta_e2, and ``extreme-boundary`` multiplies eta_e1 over the
    coordinates of ``x`` alone.
    """
    if kind not in _KERNEL_KINDS:
        raise ValueError(f"unknown kernel kind {kind!r}; expected one of {_KERNEL_KINDS}")
    if kind == "extreme-boundary":
        out: Scalar = 1
        for s in x:
            out = out * triple.eta_e1(s)
        return out
    if y is None or len(x) != len(y):
        raise ValueError("x and y must have the same dimension")
    out = 1
    for s, t in zip(x, y):
        out = out * (triple.eta_p(s, t) if kind == "periodic" else triple.eta_e2(s, t))
    return out
