"""Hot loops for halting-probability accumulation.

Two interchangeable backends operate on CSR triples (indptr, indices, data):
a numba ``@njit`` kernel and a pure numpy/scipy loop. The numba path is used
when numba imports cleanly, unless ``QFA_LAB_NO_NUMBA=1`` is set in the
environment at import time.
"""
import os

import numpy as np
import scipy.sparse as sp

ENV_FLAG = "QFA_LAB_NO_NUMBA"

# slack for the per-step conservation and monotonicity assertions
CONSERVATION_TOL = 1e-9
MONOTONE_ABS_SLACK = 1e-15
MONOTONE_REL_SLACK = 1e-12

# violation codes returned by the kernels
OK = 0
VIOLATION_CONSERVATION = 1
VIOLATION_MONOTONE = 2

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False


def numba_enabled() -> bool:
    return HAVE_NUMBA and os.environ.get(ENV_FLAG, "").strip().lower() not in ("1", "true", "yes")


USE_NUMBA = numba_enabled()


def _accumulate_numpy(n_ptr, n_idx, n_dat, a_ptr, a_idx, a_dat, r_ptr, r_idx, r_dat,
                      psi, tol, max_steps):
    dim = psi.shape[0]
    N = sp.csr_matrix((n_dat, n_idx, n_ptr), shape=(len(n_ptr) - 1, dim))
    A = sp.csr_matrix((a_dat, a_idx, a_ptr), shape=(len(a_ptr) - 1, dim))
    R = sp.csr_matrix((r_dat, r_idx, r_ptr), shape=(len(r_ptr) - 1, dim))
    psi = np.array(psi, dtype=np.complex128)
    norm0 = float(np.vdot(psi, psi).real)
    residual = norm0
    p_acc = 0.0
    p_rej = 0.0
    steps = 0
    bad_step = -1
    bad_kind = OK
    while residual >= tol and steps < max_steps:
        acc = A @ psi
        rej = R @ psi
        psi = N @ psi
        p_acc += float(np.vdot(acc, acc).real)
        p_rej += float(np.vdot(rej, rej).real)
        new_residual = float(np.vdot(psi, psi).real)
        steps += 1
        if bad_kind == OK:
            if abs(p_acc + p_rej + new_residual - norm0) > CONSERVATION_TOL * max(1.0, norm0):
                bad_step, bad_kind = steps, VIOLATION_CONSERVATION
            elif new_residual > residual * (1.0 + MONOTONE_REL_SLACK) + MONOTONE_ABS_SLACK:
                bad_step, bad_kind = steps, VIOLATION_MONOTONE
        residual = new_residual
    return p_acc, p_rej, residual, steps, bad_step, bad_kind


if HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _csr_matvec(indptr, indices, data, x, out):
        for row in range(indptr.shape[0] - 1):
            s = 0j
            for k in range(indptr[row], indptr[row + 1]):
                s += data[k] * x[indices[k]]
            out[row] = s

    @numba.njit(cache=True, nogil=True)
    def _sqnorm(x):
        s = 0.0
        for i in range(x.shape[0]):
            s += x[i].real * x[i].real + x[i].imag * x[i].imag
        return s

    @numba.njit(cache=True, nogil=True)
    def _accumulate_numba(n_ptr, n_idx, n_dat, a_ptr, a_idx, a_dat, r_ptr, r_idx, r_dat,
                          psi0, tol, max_steps):
        psi = psi0.copy()
        nxt = np.empty(n_ptr.shape[0] - 1, dtype=np.complex128)
        acc = np.empty(a_ptr.shape[0] - 1, dtype=np.complex128)
        rej = np.empty(r_ptr.shape[0] - 1, dtype=np.complex128)
        norm0 = _sqnorm(psi)
        residual = norm0
        p_acc = 0.0
        p_rej = 0.0
        steps = 0
        bad_step = -1
        bad_kind = 0
        scale = max(1.0, norm0)
        while residual >= tol and steps < max_steps:
            _csr_matvec(a_ptr, a_idx, a_dat, psi, acc)
            _csr_matvec(r_ptr, r_idx, r_dat, psi, rej)
            _csr_matvec(n_ptr, n_idx, n_dat, psi, nxt)
            p_acc += _sqnorm(acc)
            p_rej += _sqnorm(rej)
            psi, nxt = nxt, psi
            new_residual = _sqnorm(psi)
            steps += 1
            if bad_kind == 0:
                if abs(p_acc + p_rej + new_residual - norm0) > 1e-9 * scale:
                    bad_step = steps
                    bad_kind = 1
                elif new_residual > residual * (1.0 + 1e-12) + 1e-15:
                    bad_step = steps
                    bad_kind = 2
            residual = new_residual
        return p_acc, p_rej, residual, steps, bad_step, bad_kind

else:  # pragma: no cover
    _accumulate_numba = None


def _csr_parts(m, dim):
    m = sp.csr_matrix(m, dtype=np.complex128)
    if m.shape[1] != dim:
        raise ValueError(f"map has {m.shape[1]} columns, state has {dim}")
    return (m.indptr.astype(np.int64), m.indices.astype(np.int64),
            np.ascontiguousarray(m.data, dtype=np.complex128))


def accumulate(nonhalt, accept, reject, psi0, tol, max_steps, backend=None):
    """Run the accumulation loop on the selected backend.

    ``backend`` is ``"numba"``, ``"numpy"`` or ``None`` (use the module default).
    Returns ``(p_acc, p_rej, residual, steps, bad_step, bad_kind)``.
    """
    psi0 = np.ascontiguousarray(psi0, dtype=np.complex128)
    dim = psi0.shape[0]
    args = (*_csr_parts(nonhalt, dim), *_csr_parts(accept, dim), *_csr_parts(reject, dim))
    if backend is None:
        backend = "numba" if USE_NUMBA else "numpy"
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not importable")
        out = _accumulate_numba(*args, psi0, float(tol), int(max_steps))
    elif backend == "numpy":
        out = _accumulate_numpy(*args, psi0, float(tol), int(max_steps))
    else:
        raise ValueError(f"unknown backend {backend!r}")
    p_acc, p_rej, residual, steps, bad_step, bad_kind = out
    return float(p_acc), float(p_rej), float(residual), int(steps), int(bad_step), int(bad_kind)
