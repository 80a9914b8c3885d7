# %% [markdown]
# # Blocked GEMM against the triple loop
#
# The blocked kernel packs A and B into contiguous panels and runs an
# `m_t x n_t` register micro-kernel over them. Both kernels accumulate the
# same products in the same order, so their outputs match bit for bit.

# %%
import time

import numpy as np

from ftgemm import blocked_gemm, naive_gemm, random_matrix
from ftgemm.select import DEFAULT_CATALOG, ShapeClass, classify_shape, instantiate

n = 512
A, B = random_matrix(n, n, 1), random_matrix(n, n, 2)
C = np.zeros((n, n), np.float32)

# %% [markdown]
# The first call compiles the kernel (or loads it from the numba cache).

# %%
p = DEFAULT_CATALOG[classify_shape(n, n, n)]
blocked_gemm(A, B, C.copy(), p)
naive_gemm(A[:8, :8].copy(), B[:8, :8].copy(), np.zeros((8, 8), np.float32))

# %%
t0 = time.perf_counter()
fast = blocked_gemm(A, B, C.copy(), p)
t_blocked = time.perf_counter() - t0
t0 = time.perf_counter()
slow = naive_gemm(A, B, C.copy())
t_naive = time.perf_counter() - t0
print(f"blocked {t_blocked:.3f}s  naive {t_naive:.3f}s  speedup {t_naive / t_blocked:.1f}x")
print("bitwise equal:", np.array_equal(fast, slow))

# %% [markdown]
# `instantiate` returns a callable bound to one tiling. Catalog tilings get a
# kernel with the tile extents baked in as constants.

# %%
k = instantiate(DEFAULT_CATALOG[ShapeClass.MEDIUM])
print(k.specialized, np.array_equal(k(A, B, C.copy()), fast))
