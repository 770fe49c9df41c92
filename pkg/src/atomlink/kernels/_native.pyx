#cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Same semantics and randomness protocol as `atomlink.kernels.pure` (see its
docstring); uniforms come from the numpy bit generator's C interface, so a
given Generator state yields the exact draws the pure backend would see.
"""

from libc.math cimport sqrt
from libc.string cimport memcpy
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport random_standard_uniform

import numpy as np

CAPTURE_BLOCK = 1024
DRAWS_PER_TRIAL = 5
DRAWS_PER_MEASURE = 6

cdef int _BLOCK = 1024
cdef int _C = 2
cdef int _D = 3
cdef double _FORCE_EPS = 1e-15


cdef bitgen_t *_bitgen(rng) except NULL:
    capsule = rng.bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("rng does not expose a BitGenerator capsule")
    return <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")


def capture_search(rng, double s, double eta_joint, double eta_single,
                   double eps, long max_trials):
    """See pure.capture_search."""
    if max_trials < 1:
        raise ValueError("max_trials must be >= 1")
    cdef bitgen_t *bg = _bitgen(rng)
    cdef double[::1] buf = np.empty(_BLOCK * 5, dtype=np.float64)
    cdef long done = 0
    cdef int block, t, i
    cdef int found = 0
    cdef bint arr0 = 0, arr1 = 0, ab0 = 0, ab1 = 0, her0 = 0, her1 = 0
    cdef bint both
    cdef double load

    with rng.bit_generator.lock:
        while done < max_trials and not found:
            block = <int> min(<long> _BLOCK, max_trials - done)
            with nogil:
                for i in range(block * 5):
                    buf[i] = random_standard_uniform(bg)
                for t in range(block):
                    arr0 = buf[5 * t] < s
                    arr1 = buf[5 * t + 1] < s
                    both = arr0 and arr1
                    load = buf[5 * t + 2]
                    if both:
                        ab0 = load < eta_joint
                        ab1 = ab0
                    else:
                        ab0 = arr0 and (load < eta_single)
                        ab1 = arr1 and (load < eta_single)
                    her0 = ab0 or (buf[5 * t + 3] < eps)
                    her1 = ab1 or (buf[5 * t + 4] < eps)
                    if her0 and her1:
                        found = 1
                        done += t + 1
                        break
                else:
                    done += block
    return (found != 0, done, arr0 != 0, arr1 != 0, ab0 != 0, ab1 != 0,
            her0 != 0, her1 != 0)


cdef void _mat66(const double complex *u, const double complex *src,
                 double complex *dst) noexcept nogil:
    """dst = u @ src for 6x6 complex matrices (row-major)."""
    cdef int i, j, k
    cdef double complex acc
    for i in range(6):
        for j in range(6):
            acc = 0
            for k in range(6):
                acc = acc + u[6 * i + k] * src[6 * k + j]
            dst[6 * i + j] = acc


cdef double _mass_row(const double complex *st, int row) noexcept nogil:
    cdef int j
    cdef double m = 0.0
    for j in range(6):
        m += st[6 * row + j].real * st[6 * row + j].real \
             + st[6 * row + j].imag * st[6 * row + j].imag
    return m


cdef int _collapse(double complex *st, int step, bint inside, double p) noexcept nogil:
    """Project onto (or out of) the step's probe rows and renormalize.

    Returns 0 on success, -1 if the requested branch is empty.
    """
    cdef double branch = p if inside else 1.0 - p
    cdef int r, j
    cdef bint probed
    cdef double norm = 0.0
    cdef double scale
    if branch < _FORCE_EPS:
        return -1
    for r in range(6):
        probed = (r == _C) or (step == 1 and r == _D)
        if probed != inside:
            for j in range(6):
                st[6 * r + j] = 0
    for r in range(36):
        norm += st[r].real * st[r].real + st[r].imag * st[r].imag
    if norm <= 0.0:
        return -1
    scale = 1.0 / sqrt(norm)
    for r in range(36):
        st[r] = st[r] * scale
    return 0


cdef double _probe_mass(const double complex *st, int step) noexcept nogil:
    cdef double m = _mass_row(st, _C)
    if step == 1:
        m += _mass_row(st, _D)
    return m


cdef int _run_one(const double complex *amps, const double complex *pulses,
                  double eps, const double *u, int forced,
                  double complex *st, double complex *tmp,
                  double *log_p, signed char *log_in, signed char *log_det,
                  int *n_steps, int *true_out, int *rep_out) noexcept nogil:
    """Single elimination walk. u is 6 draws (ignored when forced >= 0).

    pulses layout: [shelve, unshelve, swap_ac, swap_bd], each 36 entries.
    Returns 0 on success, -1 on an empty forced/collapse branch.
    """
    cdef int step
    cdef double p
    cdef bint inside, missed, detected
    cdef int in_seen = 0
    cdef int true_v = 1, rep_v = 1       # exhaustion outcome A-
    cdef int step_outcome

    _mat66(pulses, amps, st)             # shelve_d
    n_steps[0] = 0
    for step in range(3):
        if step == 1:
            _mat66(pulses + 36, st, tmp)             # unshelve_d
            memcpy(st, tmp, 36 * sizeof(double complex))
        elif step == 2:
            _mat66(pulses + 72, st, tmp)             # swap_ac
            _mat66(pulses + 108, tmp, st)            # swap_bd
            _mat66(pulses, st, tmp)                  # shelve_d
            memcpy(st, tmp, 36 * sizeof(double complex))
        p = _probe_mass(st, step)

        if forced >= 0:
            if forced == 0:
                inside = step == 0
            elif forced == 2:
                inside = step == 1
            elif forced == 3:
                inside = step == 2
            else:
                inside = 0
            missed = 0
        else:
            inside = u[2 * step] < p
            missed = u[2 * step + 1] < eps

        if _collapse(st, step, inside, p) != 0:
            return -1
        detected = inside and not missed

        log_p[step] = p
        log_in[step] = 1 if inside else 0
        log_det[step] = 1 if detected else 0
        n_steps[0] = step + 1

        step_outcome = 0 if step == 0 else (2 if step == 1 else 3)
        if inside and not in_seen:
            true_v = step_outcome
            in_seen = 1
        if detected:
            rep_v = step_outcome
            break

    true_out[0] = true_v
    rep_out[0] = rep_v
    return 0


def bell_measure(rng, amps, pulses, double eps, int forced=-1):
    """See pure.bell_measure."""
    cdef const double complex[:, ::1] a = np.ascontiguousarray(amps, dtype=np.complex128)
    cdef const double complex[:, :, ::1] pu = np.ascontiguousarray(pulses, dtype=np.complex128)
    if a.shape[0] != 6 or a.shape[1] != 6 or pu.shape[0] != 4:
        raise ValueError("expected a (6,6) state and (4,6,6) pulses")

    cdef double u[6]
    cdef double complex st[36]
    cdef double complex tmp[36]
    cdef double log_p[3]
    cdef signed char log_in[3]
    cdef signed char log_det[3]
    cdef int n_steps = 0, true_v = 0, rep_v = 0, rc
    cdef bitgen_t *bg
    cdef int i

    if forced < 0:
        bg = _bitgen(rng)
        with rng.bit_generator.lock:
            for i in range(6):
                u[i] = random_standard_uniform(bg)
    elif forced > 3:
        raise ValueError("forced outcome must be in 0..3")

    rc = _run_one(&a[0, 0], &pu[0, 0, 0], eps, u, forced, st, tmp,
                  log_p, log_in, log_det, &n_steps, &true_v, &rep_v)
    if rc != 0:
        if forced >= 0:
            raise ValueError(
                f"forced outcome {forced} needs a zero-probability branch"
            )
        raise ValueError("collapse onto an empty branch; state outside contract")

    out = np.empty((6, 6), dtype=np.complex128)
    cdef double complex[:, ::1] ov = out
    memcpy(&ov[0, 0], st, 36 * sizeof(double complex))
    log = [
        (i, log_p[i], log_in[i] != 0, log_det[i] != 0) for i in range(n_steps)
    ]
    return true_v, rep_v, out, log


def bell_measure_batch(rng, amps, pulses, double eps, long n):
    """See pure.bell_measure_batch."""
    cdef const double complex[:, ::1] a = np.ascontiguousarray(amps, dtype=np.complex128)
    cdef const double complex[:, :, ::1] pu = np.ascontiguousarray(pulses, dtype=np.complex128)
    if a.shape[0] != 6 or a.shape[1] != 6 or pu.shape[0] != 4:
        raise ValueError("expected a (6,6) state and (4,6,6) pulses")
    true_arr = np.empty(n, dtype=np.uint8)
    rep_arr = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] tv = true_arr
    cdef unsigned char[::1] rv = rep_arr

    cdef double u[6]
    cdef double complex st[36]
    cdef double complex tmp[36]
    cdef double log_p[3]
    cdef signed char log_in[3]
    cdef signed char log_det[3]
    cdef int n_steps = 0, true_v = 0, rep_v = 0
    cdef long i
    cdef int j, rc = 0
    cdef bitgen_t *bg = _bitgen(rng)

    with rng.bit_generator.lock:
        with nogil:
            for i in range(n):
                for j in range(6):
                    u[j] = random_standard_uniform(bg)
                if _run_one(&a[0, 0], &pu[0, 0, 0], eps, u, -1, st, tmp,
                            log_p, log_in, log_det,
                            &n_steps, &true_v, &rep_v) != 0:
                    rc = -1
                    break
                tv[i] = <unsigned char> true_v
                rv[i] = <unsigned char> rep_v
    if rc != 0:
        raise ValueError("collapse onto an empty branch; state outside contract")
    return true_arr, rep_arr
