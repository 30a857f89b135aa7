"""Backend selection for the hot kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy twin in ``_pykernels``.  Setting ``L1AE_PURE_PYTHON=1`` forces the
fallback.
"""

import functools
import os

import numpy as np

from . import _pykernels
from ._pykernels import (  # noqa: F401
    LIMIT,
    OPTIMAL,
    RULE_BLAND,
    RULE_DANTZIG,
    UNBOUNDED,
)

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

if _ckernels is not None and not os.environ.get("L1AE_PURE_PYTHON"):
    _impl = _ckernels
    BACKEND = "cython"
else:
    _impl = _pykernels
    BACKEND = "python"


def available_backends():
    names = ["python"]
    if _ckernels is not None:
        names.insert(0, "cython")
    return names


def get_backend(name=None):
    """Return the kernel module called ``name`` (default: the active one)."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built")
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


@functools.lru_cache(maxsize=64)
def _schedule(n):
    # circle method: element 0 fixed, the rest rotate; a dummy pads odd n
    size = n + (n % 2)
    players = list(range(size))
    rounds = []
    for _ in range(size - 1):
        pairs = []
        for i in range(size // 2):
            p, q = players[i], players[size - 1 - i]
            if p < n and q < n:
                pairs.append((min(p, q), max(p, q)))
        pairs.sort()
        rounds.append(pairs)
        players = [players[0], players[-1]] + players[1:-1]
    # the dummy sits out exactly once per round, so all rounds are n // 2 wide
    out = np.array(rounds, dtype=np.int64)
    out.setflags(write=False)
    return out


def round_robin_schedule(n):
    """All index pairs of ``range(n)`` grouped into rounds of disjoint pairs."""
    if n < 2:
        return np.zeros((0, 1, 2), dtype=np.int64)
    return _schedule(int(n))


def jacobi_eigh(S, tol=1e-15, max_sweeps=60, backend=None):
    impl = get_backend(backend)
    return impl.jacobi_eigh(S, round_robin_schedule(np.shape(S)[0]), tol, max_sweeps)


def simplex_iterate(*args, backend=None):
    return get_backend(backend).simplex_iterate(*args)
