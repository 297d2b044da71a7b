"""Pure-numpy record-scan kernel (fallback backend).

Scans a block of draws per active sequence, maintaining running-max record
state.  Record positions inside the block are found vectorized (running max
against the carried maximum); only the rare record events themselves run
through a Python loop, so the fallback stays usable at production sample
sizes.  Produces bit-identical state updates to the compiled backend.
"""

import numpy as np

BACKEND = "fallback"


def scan_records(block, max_val, depth, last3, used, done, target_depth):
    """Advance record state over one block of draws.

    block        (m, B) draws for the m active sequences
    max_val      (m,)   running maximum (last record value) per sequence
    depth        (m,)   records found so far per sequence
    last3        (m, 3) record values at depths d, d-1, d-2 (newest first)
    used         (m,)   draws consumed so far per sequence
    done         (m,)   set True when depth reaches target_depth

    A sequence that reaches target_depth mid-block stops consuming draws at
    that position; the rest of its row is discarded.  All arrays are updated
    in place.
    """
    m, width = block.shape
    running = np.maximum.accumulate(block, axis=1)
    before = np.empty_like(block)
    before[:, 0] = max_val
    np.maximum(running[:, :-1], max_val[:, None], out=before[:, 1:])
    events = np.argwhere(block > before)  # row-major: in-row order preserved

    finished = np.zeros(m, dtype=bool)
    for r, j in events:
        if finished[r]:
            continue
        x = block[r, j]
        last3[r, 2] = last3[r, 1]
        last3[r, 1] = last3[r, 0]
        last3[r, 0] = x
        max_val[r] = x
        depth[r] += 1
        if depth[r] == target_depth:
            finished[r] = True
            done[r] = True
            used[r] += j + 1
    used[~finished] += width
