"""The selection problem tuple ``(A, B, C, k, r)``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, RankDeficiencyError
from .linalg import as_matrix, numeric_rank


@dataclass(frozen=True)
class GcrssProblem:
    """Target ``A`` (n×d), column source ``B`` (n×d_B), row source ``C`` (n_C×d).

    ``k`` columns of ``B`` and ``r`` rows of ``C`` are to be selected. ``C``
    may have zero rows, which is the column-only problem.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    k: int
    r: int = 0
    validate: bool = True

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        B = as_matrix(self.B, "B")
        C = np.asarray(self.C, dtype=np.float64)
        if C.size == 0:
            C = np.zeros((0, A.shape[1]))
        C = as_matrix(C, "C")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "r", int(self.r))
        if B.shape[0] != A.shape[0]:
            raise InvalidInputError(f"B has {B.shape[0]} rows, A has {A.shape[0]}")
        if C.shape[1] != A.shape[1]:
            raise InvalidInputError(f"C has {C.shape[1]} columns, A has {A.shape[1]}")
        if self.k < 0 or self.r < 0:
            raise InvalidInputError("k and r must be nonnegative")
        if self.k > B.shape[1] or self.r > C.shape[0]:
            raise InvalidInputError("k or r exceeds the number of available indices")
        if self.validate:
            if self.k > numeric_rank(B):
                raise RankDeficiencyError(f"k={self.k} exceeds rank(B)={numeric_rank(B)}")
            if self.r > numeric_rank(C):
                raise RankDeficiencyError(f"r={self.r} exceeds rank(C)={numeric_rank(C)}")

    @classmethod
    def column_only(cls, A, B, k: int, validate: bool = True) -> GcrssProblem:
        A = as_matrix(A, "A")
        return cls(A, B, np.zeros((0, A.shape[1])), k, 0, validate)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def d(self) -> int:
        return self.A.shape[1]

    @property
    def d_B(self) -> int:
        return self.B.shape[1]

    @property
    def n_C(self) -> int:
        return self.C.shape[0]

    def transposed(self) -> GcrssProblem:
        """``(Aᵀ, Cᵀ, Bᵀ, r, k)``: the roles of rows and columns swapped."""
        return GcrssProblem(self.A.T, self.C.T, self.B.T, self.r, self.k, self.validate)

    def with_orders(self, k: int, r: int) -> GcrssProblem:
        return GcrssProblem(self.A, self.B, self.C, k, r, self.validate)
