"""Compiled inner loops for reservoir k-NN search and bucketed ascent.

All kernels release the GIL so callers can fan candidate ranges out over a
thread pool. Every candidate is processed independently and written to its
own output slot, which keeps results identical for any worker count.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _before(da, ia, db, ib):
    return da < db or (da == db and ia < ib)


@njit(cache=True, nogil=True)
def _sift_down(hd, hi, size, pos):
    # max-heap on (distance, id)
    while True:
        left = 2 * pos + 1
        if left >= size:
            return
        big = left
        right = left + 1
        if right < size and _before(hd[left], hi[left], hd[right], hi[right]):
            big = right
        if _before(hd[pos], hi[pos], hd[big], hi[big]):
            hd[pos], hd[big] = hd[big], hd[pos]
            hi[pos], hi[big] = hi[big], hi[pos]
            pos = big
        else:
            return


@njit(cache=True, nogil=True)
def knn_in_pool(pool_pts, pool_ids, x, k, exclude, out_ids, out_d2):
    """k nearest pool points to ``x`` ordered by (squared distance, id).

    Writes into ``out_ids``/``out_d2`` and returns how many were found.
    A pool entry whose id equals ``exclude`` is skipped.
    """
    d = x.shape[0]
    size = 0
    for i in range(pool_ids.shape[0]):
        pid = pool_ids[i]
        if pid == exclude:
            continue
        s = 0.0
        for j in range(d):
            diff = pool_pts[i, j] - x[j]
            s += diff * diff
        if size < k:
            # sift up
            pos = size
            size += 1
            out_d2[pos] = s
            out_ids[pos] = pid
            while pos > 0:
                parent = (pos - 1) // 2
                if _before(out_d2[parent], out_ids[parent], out_d2[pos], out_ids[pos]):
                    out_d2[parent], out_d2[pos] = out_d2[pos], out_d2[parent]
                    out_ids[parent], out_ids[pos] = out_ids[pos], out_ids[parent]
                    pos = parent
                else:
                    break
        elif _before(s, pid, out_d2[0], out_ids[0]):
            out_d2[0] = s
            out_ids[0] = pid
            _sift_down(out_d2, out_ids, size, 0)
    # heap sort in place: repeatedly move the max to the end
    end = size
    while end > 1:
        end -= 1
        out_d2[0], out_d2[end] = out_d2[end], out_d2[0]
        out_ids[0], out_ids[end] = out_ids[end], out_ids[0]
        _sift_down(out_d2, out_ids, end, 0)
    return size


@njit(cache=True, nogil=True)
def mean_knn_distance_range(start, stop, points, point_bucket, res_ptr,
                            res_pts, res_ids, k, out):
    """Mean distance from each sample point to its k bucketed neighbors, self excluded."""
    ids = np.empty(k, np.int64)
    d2 = np.empty(k, np.float64)
    for i in range(start, stop):
        b = point_bucket[i]
        lo = res_ptr[b]
        hi = res_ptr[b + 1]
        found = knn_in_pool(res_pts[lo:hi], res_ids[lo:hi], points[i], k, i, ids, d2)
        acc = 0.0
        for t in range(found):
            acc += np.sqrt(d2[t])
        out[i] = acc / found if found > 0 else 0.0


@njit(cache=True, nogil=True)
def _vote(ids, count, point_bucket, current):
    # majority bucket among the first ``count`` neighbor ids; keep ``current``
    # when it is one of the tied winners, otherwise the lowest bucket id wins
    buckets = np.empty(count, np.int64)
    for t in range(count):
        buckets[t] = point_bucket[ids[t]]
    buckets.sort()
    best_bucket = buckets[0]
    best_count = 0
    current_count = 0
    t = 0
    while t < count:
        u = t
        while u < count and buckets[u] == buckets[t]:
            u += 1
        c = u - t
        if buckets[t] == current:
            current_count = c
        if c > best_count:
            best_count = c
            best_bucket = buckets[t]
        t = u
    if current_count == best_count:
        return current
    return best_bucket


@njit(cache=True, nogil=True)
def ascend_range(start, stop, cands, start_bucket, points, point_bucket,
                 res_ptr, res_pts, res_ids, k1, k2, eps1, jmax,
                 out_x, out_iters, out_conv, trace, trace_len):
    """Bucketed nearest-neighbor mean shift for candidates ``start..stop``.

    Each candidate searches the reservoir of its current bucket, shifts to
    the mean of its ``k1`` nearest reservoir points, then moves to the
    bucket holding the majority of its ``k2`` nearest reservoir points.
    """
    d = cands.shape[1]
    kk = max(k1, k2)
    ids = np.empty(kk, np.int64)
    d2 = np.empty(kk, np.float64)
    x = np.empty(d, np.float64)
    xn = np.empty(d, np.float64)
    record = trace.shape[1] > 0
    for c in range(start, stop):
        for j in range(d):
            x[j] = cands[c, j]
        b = start_bucket[c]
        if record:
            trace[c, 0] = b
            trace_len[c] = 1
        lo = res_ptr[b]
        hi = res_ptr[b + 1]
        found = knn_in_pool(res_pts[lo:hi], res_ids[lo:hi], x, kk, -1, ids, d2)
        it = 0
        conv = False
        while True:
            kn = min(k1, found)
            for j in range(d):
                xn[j] = 0.0
            for t in range(kn):
                row = ids[t]
                for j in range(d):
                    xn[j] += points[row, j]
            for j in range(d):
                xn[j] = xn[j] / kn
            s = 0.0
            for j in range(d):
                diff = xn[j] - x[j]
                s += diff * diff
                x[j] = xn[j]
            it += 1
            if np.sqrt(s) <= eps1:
                conv = True
                break
            if it >= jmax:
                break
            found = knn_in_pool(res_pts[lo:hi], res_ids[lo:hi], x, kk, -1, ids, d2)
            nb = _vote(ids, min(k2, found), point_bucket, b)
            if nb != b:
                b = nb
                if record:
                    trace[c, trace_len[c]] = b
                    trace_len[c] += 1
                lo = res_ptr[b]
                hi = res_ptr[b + 1]
                found = knn_in_pool(res_pts[lo:hi], res_ids[lo:hi], x, kk, -1, ids, d2)
        for j in range(d):
            out_x[c, j] = x[j]
        out_iters[c] = it
        out_conv[c] = conv



@njit(cache=True, nogil=True)
def eps_components(pts, eps2):
    """Label points by frontier expansion over the "within eps2" relation.

    Seeds are taken in index order; labels follow discovery order.
    """
    n = pts.shape[0]
    d = pts.shape[1]
    labels = np.full(n, -1, np.int64)
    rem = np.arange(n)
    nrem = n
    queue = np.empty(n, np.int64)
    seed = 0
    label = 0
    while nrem > 0:
        while labels[seed] >= 0:
            seed += 1
        labels[seed] = label
        for t in range(nrem):
            if rem[t] == seed:
                nrem -= 1
                rem[t] = rem[nrem]
                break
        head = 0
        tail = 1
        queue[0] = seed
        while head < tail:
            pc = queue[head]
            head += 1
            t = 0
            while t < nrem:
                q = rem[t]
                s = 0.0
                for j in range(d):
                    diff = pts[q, j] - pts[pc, j]
                    s += diff * diff
                if np.sqrt(s) <= eps2:
                    labels[q] = label
                    queue[tail] = q
                    tail += 1
                    nrem -= 1
                    rem[t] = rem[nrem]
                else:
                    t += 1
        label += 1
    return labels


@njit(cache=True, nogil=True)
def cross_pair_codes(a_pts, a_lab, b_pts, b_lab, nb_labels, eps2):
    """Codes ``la * nb_labels + lb`` for every (a, b) pair within eps2, with counts."""
    d = a_pts.shape[1]
    # small unsorted code list; consecutive hits usually share a code
    buf_codes = np.empty(16, np.int64)
    buf_counts = np.empty(16, np.int64)
    used = 0
    last = -1
    for i in range(a_pts.shape[0]):
        for k in range(b_pts.shape[0]):
            s = 0.0
            for j in range(d):
                diff = a_pts[i, j] - b_pts[k, j]
                s += diff * diff
            if np.sqrt(s) <= eps2:
                code = a_lab[i] * nb_labels + b_lab[k]
                hit = -1
                if last >= 0 and buf_codes[last] == code:
                    hit = last
                for u in range(used if hit < 0 else 0):
                    if buf_codes[u] == code:
                        hit = u
                        break
                if hit < 0:
                    if used == buf_codes.shape[0]:
                        nc = np.empty(used * 2, np.int64)
                        nn = np.empty(used * 2, np.int64)
                        nc[:used] = buf_codes[:used]
                        nn[:used] = buf_counts[:used]
                        buf_codes = nc
                        buf_counts = nn
                    buf_codes[used] = code
                    buf_counts[used] = 1
                    last = used
                    used += 1
                else:
                    buf_counts[hit] += 1
                    last = hit
    return buf_codes[:used].copy(), buf_counts[:used].copy()
