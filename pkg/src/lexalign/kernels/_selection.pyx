# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled top-k selection kernel. Semantics mirror _selection_py exactly:
sorted insertion by (score descending, id ascending), -inf candidates
(exclusions / empty slots) are skipped and never counted."""

from libc.math cimport INFINITY


def update_topk(double[:, ::1] scores, long long base_id,
                double[:, ::1] top_scores, long long[:, ::1] top_ids,
                long long[::1] counts):
    cdef Py_ssize_t q = scores.shape[0]
    cdef Py_ssize_t m = scores.shape[1]
    cdef Py_ssize_t k = top_scores.shape[1]
    cdef Py_ssize_t i, j, pos, shift, cnt
    cdef double s, worst
    cdef long long wid

    for i in range(q):
        cnt = counts[i]
        for j in range(m):
            s = scores[i, j]
            if s == -INFINITY:
                continue
            wid = base_id + j
            if cnt == k:
                worst = top_scores[i, k - 1]
                if s < worst or (s == worst and wid > top_ids[i, k - 1]):
                    continue
            pos = cnt
            while pos > 0 and (s > top_scores[i, pos - 1] or
                               (s == top_scores[i, pos - 1] and
                                wid < top_ids[i, pos - 1])):
                pos -= 1
            if pos == k:
                continue
            if cnt < k:
                cnt += 1
            for shift in range(cnt - 1, pos, -1):
                top_scores[i, shift] = top_scores[i, shift - 1]
                top_ids[i, shift] = top_ids[i, shift - 1]
            top_scores[i, pos] = s
            top_ids[i, pos] = wid
        counts[i] = cnt
