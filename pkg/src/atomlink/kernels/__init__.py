"""Hot-loop kernels: compiled extension with a pure-numpy fallback.

Two inner loops dominate every large run: the capture-trial search (tens of
millions of Bernoulli trials per campaign) and the sequential-elimination
Bell measurement (millions of collapse-and-detect walks per confusion-matrix
estimate). Both are implemented twice with identical semantics:

* ``_native`` — Cython, drawing uniforms straight from the numpy bit
  generator's C interface;
* ``pure`` — vectorized numpy, used when the extension is missing or when
  ``ATOMLINK_PURE=1`` is set.

Both backends consume randomness under the same fixed protocol (see
``pure``), so a given seed produces bit-identical results either way.
"""

import os

from . import pure

_FORCE_PURE = os.environ.get("ATOMLINK_PURE", "") in ("1", "true", "yes")

if _FORCE_PURE:
    _impl = pure
    _backend_name = "pure"
else:
    try:
        from . import _native as _impl

        _backend_name = "native"
    except ImportError:
        _impl = pure
        _backend_name = "pure"

capture_search = _impl.capture_search
bell_measure = _impl.bell_measure
bell_measure_batch = _impl.bell_measure_batch

# Tracing records every trial; it exists only in the pure backend but follows
# the same randomness protocol, so its trials match what the fast path did.
capture_search_trace = pure.capture_search_trace

CAPTURE_BLOCK = pure.CAPTURE_BLOCK
DRAWS_PER_TRIAL = pure.DRAWS_PER_TRIAL
DRAWS_PER_MEASURE = pure.DRAWS_PER_MEASURE


def backend() -> str:
    """Name of the selected backend: 'native' or 'pure'."""
    return _backend_name


def load_backend(name: str):
    """Explicitly fetch a backend module ('pure' or 'native') for comparisons."""
    if name == "pure":
        return pure
    if name == "native":
        from . import _native

        return _native
    raise ValueError(f"unknown backend {name!r}")
