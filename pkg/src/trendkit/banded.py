"""Difference operators and banded symmetric positive-definite solves.

Every filter in the package reduces to linear algebra with first/second
difference operators and narrow-banded SPD systems, so both live here:

* :class:`DiffOperator` applies the (-1, 1) or (1, -2, 1) stencils and
  their transposes in O(n) without materializing the matrix.
* :class:`BandedSymMatrix` stores an SPD matrix by its lower diagonals
  and solves against it with a band Cholesky factorization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import NotPositiveDefiniteError

_STENCILS = {1: (-1.0, 1.0), 2: (1.0, -2.0, 1.0)}

# DiffOperator.to_dense refuses above this size; large-n code must stay matrix-free.
_DENSE_LIMIT = 64


@dataclass(frozen=True)
class DiffOperator:
    """Discrete difference operator of order 1 or 2 on signals of length n.

    Order 1 maps x to consecutive differences x[i+1] - x[i] (n-1 rows);
    order 2 maps x to second differences x[i] - 2 x[i+1] + x[i+2]
    (n-2 rows). Order 1 annihilates constants, order 2 annihilates
    affine sequences.
    """

    order: int
    n: int

    def __post_init__(self):
        if self.order not in _STENCILS:
            raise ValueError(f"order must be 1 or 2, got {self.order}")
        if self.n <= self.order:
            raise ValueError(
                f"signal length {self.n} too small for order {self.order}; "
                f"need at least {self.order + 1} samples"
            )

    @property
    def rows(self) -> int:
        return self.n - self.order

    @property
    def stencil(self) -> tuple:
        return _STENCILS[self.order]

    def apply(self, v) -> np.ndarray:
        """Compute D v for a length-n vector v."""
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n,):
            raise ValueError(f"expected vector of length {self.n}, got shape {v.shape}")
        if self.order == 1:
            return v[1:] - v[:-1]
        return v[:-2] - 2.0 * v[1:-1] + v[2:]

    def apply_transpose(self, u) -> np.ndarray:
        """Compute D^T u for a vector u of length n-order."""
        u = np.asarray(u, dtype=float)
        m = self.rows
        if u.shape != (m,):
            raise ValueError(f"expected vector of length {m}, got shape {u.shape}")
        out = np.zeros(self.n)
        for offset, coeff in enumerate(self.stencil):
            out[offset:offset + m] += coeff * u
        return out

    def to_sparse(self) -> scipy.sparse.csr_matrix:
        """CSR form of the operator (O(n) storage)."""
        diags = [np.full(self.rows, c) for c in self.stencil]
        offsets = list(range(len(self.stencil)))
        return scipy.sparse.diags(
            diags, offsets, shape=(self.rows, self.n), format="csr"
        )

    def to_dense(self) -> np.ndarray:
        """Dense matrix, for small-problem oracles only."""
        if self.n > _DENSE_LIMIT:
            raise ValueError(f"refusing to densify a {self.rows}x{self.n} operator")
        return self.to_sparse().toarray()


def diff_operator(order: int, n: int) -> DiffOperator:
    """Build the order-1 or order-2 difference operator for length-n signals."""
    return DiffOperator(order=order, n=n)


@dataclass(frozen=True)
class BandedSymMatrix:
    """Symmetric banded matrix stored by its lower diagonals.

    ``bands`` has shape (bandwidth + 1, n): row 0 is the main diagonal,
    row k holds the k-th sub-diagonal in entries [0, n-k) with zero
    padding at the end (the layout scipy's banded Cholesky expects).
    """

    n: int
    bandwidth: int
    bands: np.ndarray

    def __post_init__(self):
        bands = np.asarray(self.bands, dtype=float)
        if bands.shape != (self.bandwidth + 1, self.n):
            raise ValueError(
                f"bands shape {bands.shape} inconsistent with "
                f"n={self.n}, bandwidth={self.bandwidth}"
            )
        if self.bandwidth > max(self.n - 1, 0):
            raise ValueError(
                f"bandwidth {self.bandwidth} exceeds size {self.n} of the matrix"
            )
        object.__setattr__(self, "bands", bands)

    def matvec(self, v) -> np.ndarray:
        """Compute A v in O(n * bandwidth)."""
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n,):
            raise ValueError(f"expected vector of length {self.n}, got shape {v.shape}")
        out = self.bands[0] * v
        for k in range(1, self.bandwidth + 1):
            d = self.bands[k, : self.n - k]
            out[k:] += d * v[:-k]
            out[:-k] += d * v[k:]
        return out

    def add_diagonal(self, d) -> "BandedSymMatrix":
        """Return A + diag(d) with the same band structure."""
        d = np.asarray(d, dtype=float)
        bands = self.bands.copy()
        bands[0] += d
        return BandedSymMatrix(self.n, self.bandwidth, bands)

    def to_dense(self) -> np.ndarray:
        """Dense matrix, for small-problem oracles only."""
        if self.n > _DENSE_LIMIT:
            raise ValueError(f"refusing to densify a {self.n}x{self.n} banded matrix")
        out = np.diag(self.bands[0])
        for k in range(1, self.bandwidth + 1):
            d = self.bands[k, : self.n - k]
            out += np.diag(d, -k) + np.diag(d, k)
        return out

    @classmethod
    def from_sparse(cls, A, bandwidth: int) -> "BandedSymMatrix":
        """Extract the lower bands of a symmetric scipy sparse matrix."""
        n = A.shape[0]
        bandwidth = min(bandwidth, n - 1)
        bands = np.zeros((bandwidth + 1, n))
        for k in range(bandwidth + 1):
            bands[k, : n - k] = A.diagonal(-k)
        return cls(n=n, bandwidth=bandwidth, bands=bands)


def gram_banded(op: DiffOperator) -> BandedSymMatrix:
    """Banded representation of D D^T (tridiagonal for order 1, pentadiagonal for 2)."""
    m = op.rows
    stencil = op.stencil
    width = min(len(stencil) - 1, m - 1)
    bands = np.zeros((width + 1, m))
    for k in range(width + 1):
        # inner product of a stencil row with itself shifted by k columns
        val = sum(stencil[j] * stencil[j + k] for j in range(len(stencil) - k))
        bands[k, : m - k] = val
    return BandedSymMatrix(n=m, bandwidth=width, bands=bands)


def band_solve(A: BandedSymMatrix, b) -> np.ndarray:
    """Solve A x = b by band Cholesky (A must be positive definite)."""
    b = np.asarray(b, dtype=float)
    if b.shape != (A.n,):
        raise ValueError(f"rhs length {b.shape} does not match matrix size {A.n}")
    try:
        return scipy.linalg.solveh_banded(A.bands, b, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(
            f"band Cholesky failed on a {A.n}x{A.n} system: {exc}"
        ) from exc
