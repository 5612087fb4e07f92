"""Pure-numpy fallback for the compiled stepping kernels.

Same call signatures as the Cython module; all operations are in place.
"""

import numpy as np


def apply_rank_one(psi, row, col):
    psi *= row[:, None]
    psi *= col[None, :]


def apply_field(psi, field):
    psi *= field


def apply_mask_rank_one(psi, row, col):
    psi *= row[:, None]
    psi *= col[None, :]


def norm_sq(psi):
    return float(np.sum(psi.real**2 + psi.imag**2))


def overlap(a, b):
    return complex(np.vdot(a, b))
