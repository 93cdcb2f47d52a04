from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from apps.grid.models import Domain


def _second_difference(n: int, h: float) -> sp.csr_matrix:
    return sp.diags(
        [-np.ones(n - 1), 2.0 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1], format="csr"
    ) / (h * h)


@lru_cache(maxsize=32)
def local_stiffness(domain: Domain) -> sp.csr_matrix:
    """
    Second-order stencil of -Laplace with zero exterior values, scaled by the
    cell measure so that f^T A f approximates int |grad f|^2.
    """
    if domain.dim == 1:
        (n,), (h,) = domain.n_interior, domain.h
        stiff = _second_difference(n, h)
    else:
        (n0, n1), (h0, h1) = domain.n_interior, domain.h
        stiff = sp.kron(_second_difference(n0, h0), sp.identity(n1)) + sp.kron(
            sp.identity(n0), _second_difference(n1, h1)
        )
    return (domain.cell_measure * stiff).tocsr()
