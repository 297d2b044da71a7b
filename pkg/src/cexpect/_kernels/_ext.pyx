# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled record-scan kernel. Mirrors fallback.scan_records bit for bit."""

BACKEND = "ext"


def scan_records(
    double[:, ::1] block,
    double[::1] max_val,
    long long[::1] depth,
    double[:, ::1] last3,
    long long[::1] used,
    unsigned char[::1] done,
    long long target_depth,
):
    """Advance record state over one block of draws (see fallback docstring)."""
    cdef Py_ssize_t m = block.shape[0]
    cdef Py_ssize_t width = block.shape[1]
    cdef Py_ssize_t r, j
    cdef double x, cur
    cdef long long d
    cdef bint finished

    for r in range(m):
        cur = max_val[r]
        d = depth[r]
        finished = False
        for j in range(width):
            x = block[r, j]
            if x > cur:
                last3[r, 2] = last3[r, 1]
                last3[r, 1] = last3[r, 0]
                last3[r, 0] = x
                cur = x
                d += 1
                if d == target_depth:
                    finished = True
                    done[r] = 1
                    used[r] += j + 1
                    break
        max_val[r] = cur
        depth[r] = d
        if not finished:
            used[r] += width
