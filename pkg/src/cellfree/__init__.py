"""Cell-free massive MIMO downlink simulator.

Robust MMSE precoding with generalized loading, CB/ZF/MMSE baselines,
uniform and max-min power allocation, and a seeded Monte Carlo harness
for BER, sum-rate and per-user-rate experiments.
"""

import os

# The working set is many small dense solves; multi-threaded BLAS thrashes
# badly on them and breaks bit-reproducibility across parallelism settings.
# Parallelism belongs at the trial level instead.
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")
try:
    import threadpoolctl

    threadpoolctl.threadpool_limits(1, "blas")
except ImportError:  # env vars above still cover fresh interpreters
    pass

__version__ = "0.1.0"
