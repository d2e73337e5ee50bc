# distutils: language = c++
# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Same contracts and bit-identical results as ``_pykernels``.

Sites live in an ``unordered_map`` keyed by coordinates packed into 64 bits
relative to the first input site (``64 // d`` bits per axis). When a site
falls outside the packable range the kernel raises ``OverflowError`` and the
caller reruns on the Python path.
"""
import numpy as np

from libc.stdint cimport int8_t, int64_t, uint64_t
from libcpp.pair cimport pair
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector
from libcpp.algorithm cimport sort
from cython.operator cimport dereference as deref

from .errors import BudgetExceeded
from .scheme import neighbour_offsets

NAME = "cython"

cdef enum:
    MAX_D = 16
    OK = 0
    OVER_BUDGET = 1
    OUT_OF_RANGE = 2

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double SCALE = 2.220446049250313e-16  # 2**-52


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double cvalue(uint64_t sh, const int64_t* c, int d) noexcept nogil:
    cdef uint64_t h = sh
    cdef int k
    for k in range(d):
        h = mix64((h ^ <uint64_t>c[k]) + GOLDEN)
    return (<double>(h >> 12) + 0.5) * SCALE


cdef struct Packer:
    int d
    int bits
    int64_t lim
    int64_t base[MAX_D]


cdef inline int pack(const Packer* p, const int64_t* c, uint64_t* key) noexcept nogil:
    cdef int k
    cdef int64_t r
    cdef uint64_t out = 0
    if p.d == 1:
        key[0] = <uint64_t>c[0]
        return OK
    for k in range(p.d):
        r = c[k] - p.base[k]
        if r < -p.lim or r >= p.lim:
            return OUT_OF_RANGE
        out |= (<uint64_t>(r + p.lim)) << (p.bits * k)
    key[0] = out
    return OK


cdef int make_packer(Packer* p, const int64_t* base, int d) noexcept nogil:
    cdef int k
    if d > MAX_D:
        return OUT_OF_RANGE
    p.d = d
    p.bits = 64 // d
    p.lim = (<int64_t>1) << (p.bits - 1) if p.bits < 64 else 0
    for k in range(d):
        p.base[k] = base[k]
    return OK


cdef int seed_sites(const Packer* p, uint64_t sh, const int64_t* X, int64_t n,
                    vector[int64_t]& coords, vector[double]& vals,
                    unordered_map[uint64_t, int64_t]& index) noexcept nogil:
    cdef int64_t i
    cdef int k, d = p.d
    cdef uint64_t key
    for i in range(n):
        if pack(p, X + i * d, &key) != OK:
            return OUT_OF_RANGE
        if index.count(key):
            continue
        index[key] = <int64_t>vals.size()
        for k in range(d):
            coords.push_back(X[i * d + k])
        vals.push_back(cvalue(sh, X + i * d, d))
    return OK


cdef int bfs(const Packer* p, uint64_t sh, const int64_t* nbr, int64_t n_nbr, int64_t budget,
             vector[int64_t]& coords, vector[double]& vals,
             unordered_map[uint64_t, int64_t]& index, int64_t* explored) noexcept nogil:
    cdef int d = p.d
    cdef int k
    cdef int64_t head = 0, j
    cdef int64_t y[MAX_D]
    cdef int64_t z[MAX_D]
    cdef double vy, vz
    cdef uint64_t key
    if <int64_t>vals.size() > budget:
        return OVER_BUDGET
    while head < <int64_t>vals.size():
        for k in range(d):
            y[k] = coords[head * d + k]
        vy = vals[head]
        for j in range(n_nbr):
            for k in range(d):
                z[k] = y[k] + nbr[j * d + k]
            explored[0] += 1
            if pack(p, z, &key) != OK:
                vz = cvalue(sh, z, d)
                if vz < vy:
                    return OUT_OF_RANGE
                continue
            if index.count(key):
                continue
            vz = cvalue(sh, z, d)
            if vz < vy:
                index[key] = <int64_t>vals.size()
                for k in range(d):
                    coords.push_back(z[k])
                vals.push_back(vz)
                if <int64_t>vals.size() > budget:
                    return OVER_BUDGET
        head += 1
    return OK


cdef inline bint lex_less(const int64_t* a, const int64_t* b, int d) noexcept nogil:
    cdef int k
    for k in range(d):
        if a[k] != b[k]:
            return a[k] < b[k]
    return False


cdef void arrival_order(int d, vector[int64_t]& coords, vector[double]& vals,
                        vector[pair[double, int64_t]]& order) noexcept nogil:
    cdef int64_t m = vals.size(), i, a, b, lo
    cdef pair[double, int64_t] tmp
    order.resize(m)
    for i in range(m):
        order[i] = pair[double, int64_t](vals[i], i)
    sort(order.begin(), order.end())
    # equal marks: reorder the run lexicographically by coordinates (insertion sort)
    i = 0
    while i < m:
        lo = i
        while i + 1 < m and order[i + 1].first == order[lo].first:
            i += 1
        if i > lo:
            for a in range(lo + 1, i + 1):
                tmp = order[a]
                b = a - 1
                while b >= lo and lex_less(&coords[tmp.second * d], &coords[order[b].second * d], d):
                    order[b + 1] = order[b]
                    b -= 1
                order[b + 1] = tmp
        i += 1


cdef inline bint in_table(const int64_t* table, int64_t n, int64_t w) noexcept nogil:
    cdef int64_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if table[mid] < w:
            lo = mid + 1
        else:
            hi = mid
    return lo < n and table[lo] == w


cdef void park_sparse(const Packer* p, vector[int64_t]& coords, vector[double]& vals,
                      unordered_map[uint64_t, int64_t]& index,
                      const int64_t* offs, int64_t n_offs, const int64_t* table, int64_t n_table,
                      bint use_table, vector[int8_t]& state,
                      vector[pair[double, int64_t]]& order) noexcept nogil:
    cdef int d = p.d
    cdef int64_t m = vals.size(), t, i, j, w
    cdef int k
    cdef int64_t z[MAX_D]
    cdef uint64_t key
    cdef bint ok
    cdef unordered_map[uint64_t, int64_t].iterator it
    arrival_order(d, coords, vals, order)
    state.assign(m, 0)
    for t in range(m):
        i = order[t].second
        ok = True
        w = 0
        for j in range(n_offs):
            for k in range(d):
                z[k] = coords[i * d + k] + offs[j * d + k]
            if pack(p, z, &key) != OK:
                continue
            it = index.find(key)
            if it == index.end() or state[<size_t>deref(it).second] == 0:
                continue
            if use_table:
                w |= (<int64_t>1) << j
            else:
                ok = False
                break
        if use_table:
            ok = in_table(table, n_table, w)
        if ok:
            state[i] = 1


def field_values(uint64_t seed, const int64_t[:, ::1] coords):
    cdef int64_t n = coords.shape[0], i
    cdef int d = coords.shape[1]
    out = np.empty(n, dtype=np.float64)
    if n == 0:
        return out
    cdef double[::1] o = out
    cdef uint64_t sh = mix64(seed + GOLDEN)
    with nogil:
        for i in range(n):
            o[i] = cvalue(sh, &coords[i, 0], d)
    return out


def armour_bfs(uint64_t seed, X, int nu, int64_t budget):
    cdef const int64_t[:, ::1] xv = np.ascontiguousarray(X, dtype=np.int64)
    cdef int d = xv.shape[1]
    cdef int64_t n = xv.shape[0], explored = 0
    cdef const int64_t[:, ::1] nb = np.ascontiguousarray(neighbour_offsets(d, nu))
    cdef Packer p
    cdef vector[int64_t] coords
    cdef vector[double] vals
    cdef unordered_map[uint64_t, int64_t] index
    cdef uint64_t sh = mix64(seed + GOLDEN)
    cdef int status
    if make_packer(&p, &xv[0, 0], d) != OK:
        raise OverflowError("dimension too large for the compiled kernel")
    with nogil:
        status = seed_sites(&p, sh, &xv[0, 0], n, coords, vals, index)
        if status == OK:
            status = bfs(&p, sh, &nb[0, 0], nb.shape[0], budget, coords, vals, index, &explored)
    if status == OVER_BUDGET:
        raise BudgetExceeded(vals.size(), budget, seed)
    if status == OUT_OF_RANGE:
        raise OverflowError("armour left the packable coordinate range")
    m = vals.size()
    out_c = np.empty((m, d), dtype=np.int64)
    out_v = np.empty(m, dtype=np.float64)
    cdef int64_t[:, ::1] oc = out_c
    cdef double[::1] ov = out_v
    cdef int64_t i
    cdef int k
    for i in range(<int64_t>m):
        ov[i] = vals[i]
        for k in range(d):
            oc[i, k] = coords[i * d + k]
    return out_c, out_v, explored


def park_grid(int8_t[::1] grid, const int64_t[::1] order, const int64_t[::1] offsets,
              const int64_t[::1] table, bint use_table):
    cdef int64_t n = order.shape[0], n_offs = offsets.shape[0], n_table = table.shape[0]
    cdef int64_t t, i, j, w
    cdef bint ok
    with nogil:
        for t in range(n):
            i = order[t]
            if use_table:
                w = 0
                for j in range(n_offs):
                    if grid[i + offsets[j]]:
                        w |= (<int64_t>1) << j
                ok = in_table(&table[0], n_table, w) if n_table else False
            else:
                ok = True
                for j in range(n_offs):
                    if grid[i + offsets[j]]:
                        ok = False
                        break
            if ok:
                grid[i] = 1


def perfect_batch(uint64_t seed0, int64_t replicas, W, int nu, offsets, table,
                  bint use_table, int64_t budget):
    cdef const int64_t[:, ::1] wv = np.ascontiguousarray(W, dtype=np.int64)
    cdef int d = wv.shape[1]
    cdef int64_t k = wv.shape[0]
    cdef const int64_t[:, ::1] nb = np.ascontiguousarray(neighbour_offsets(d, nu))
    offs_arr = np.ascontiguousarray(offsets, dtype=np.int64).reshape(-1, d)
    cdef const int64_t[:, ::1] ofv = offs_arr
    table_arr = np.ascontiguousarray(table, dtype=np.int64)
    cdef int64_t n_table = table_arr.size if use_table else 0
    if table_arr.size == 0:
        table_arr = np.zeros(1, dtype=np.int64)
    cdef const int64_t[::1] tv = table_arr
    cdef int64_t n_offs = ofv.shape[0]
    cdef const int64_t* offs_ptr = &ofv[0, 0] if n_offs else NULL

    spins = np.zeros((replicas, k), dtype=np.int8)
    sizes = np.zeros(replicas, dtype=np.int64)
    radii = np.zeros(replicas, dtype=np.int64)
    explored = np.zeros(replicas, dtype=np.int64)
    cdef int8_t[:, ::1] sp = spins
    cdef int64_t[::1] sz = sizes, rd = radii, ex = explored

    cdef Packer p
    cdef vector[int64_t] coords
    cdef vector[double] vals
    cdef vector[int8_t] state
    cdef vector[pair[double, int64_t]] order
    cdef unordered_map[uint64_t, int64_t] index
    cdef uint64_t sh
    cdef int64_t r, i, a, e, dist, best, rad, diff
    cdef int status = OK, q
    cdef uint64_t seed = seed0
    if make_packer(&p, &wv[0, 0], d) != OK:
        raise OverflowError("dimension too large for the compiled kernel")
    with nogil:
        for r in range(replicas):
            seed = seed0 + <uint64_t>r
            sh = mix64(seed + GOLDEN)
            coords.clear()
            vals.clear()
            index.clear()
            e = 0
            status = seed_sites(&p, sh, &wv[0, 0], k, coords, vals, index)
            if status == OK:
                status = bfs(&p, sh, &nb[0, 0], nb.shape[0], budget, coords, vals, index, &e)
            if status != OK:
                break
            park_sparse(&p, coords, vals, index, offs_ptr, n_offs, &tv[0], n_table,
                        use_table, state, order)
            for i in range(k):
                sp[r, i] = state[i]
            sz[r] = vals.size()
            ex[r] = e
            rad = 0
            for a in range(k, <int64_t>vals.size()):
                best = -1
                for i in range(k):
                    dist = 0
                    for q in range(d):
                        diff = coords[a * d + q] - wv[i, q]
                        if diff < 0:
                            diff = -diff
                        if diff > dist:
                            dist = diff
                    if best < 0 or dist < best:
                        best = dist
                if best > rad:
                    rad = best
            rd[r] = rad
    if status == OVER_BUDGET:
        raise BudgetExceeded(vals.size(), budget, seed)
    if status == OUT_OF_RANGE:
        raise OverflowError("armour left the packable coordinate range")
    return spins, sizes, radii, explored


def box_batch(uint64_t seed0, int64_t replicas, int d, int64_t n, int nu, offsets, table,
              bint use_table, int ambient, keep):
    cdef int64_t side = 2 * n + 1, padded = side + 2 * nu
    cdef int64_t nsites = side ** d, cells = padded ** d
    strides_arr = padded ** np.arange(d - 1, -1, -1, dtype=np.int64)
    axes = np.meshgrid(*([np.arange(-n, n + 1, dtype=np.int64)] * d), indexing="ij")
    coords_arr = np.ascontiguousarray(np.stack([a.ravel() for a in axes], axis=1))
    flat_arr = np.ascontiguousarray((coords_arr + n + nu) @ strides_arr)
    offs_arr = np.ascontiguousarray(np.asarray(offsets, dtype=np.int64).reshape(-1, d) @ strides_arr)
    table_arr = np.ascontiguousarray(table, dtype=np.int64)
    cdef int64_t n_table = table_arr.size if use_table else 0
    if table_arr.size == 0:
        table_arr = np.zeros(1, dtype=np.int64)
    keep_arr = np.ascontiguousarray(keep, dtype=np.int64)
    if keep_arr.size and (keep_arr.min() < 0 or keep_arr.max() >= nsites):
        raise IndexError("keep index outside the box")
    cdef const int64_t[:, ::1] cv = coords_arr
    cdef const int64_t[::1] fv = flat_arr, ov = offs_arr, tv = table_arr, kv = keep_arr
    cdef int64_t n_offs = ov.shape[0], n_keep = kv.shape[0]
    counts = np.zeros(replicas, dtype=np.int64)
    kept = np.zeros((replicas, n_keep), dtype=np.int8)
    cdef int64_t[::1] cnt = counts
    cdef int8_t[:, ::1] kp = kept
    cdef vector[int8_t] grid
    cdef vector[pair[double, int64_t]] order
    cdef int64_t r, i, t, j, w, c, g
    cdef uint64_t sh
    cdef bint ok
    order.resize(nsites)
    with nogil:
        for r in range(replicas):
            sh = mix64(seed0 + <uint64_t>r + GOLDEN)
            for i in range(nsites):
                order[i] = pair[double, int64_t](cvalue(sh, &cv[i, 0], d), i)
            # pairs sort by (mark, row-major index) and row-major index order is lexicographic
            sort(order.begin(), order.end())
            grid.assign(cells, <int8_t>ambient)
            for i in range(nsites):
                grid[fv[i]] = 0
            c = 0
            for t in range(nsites):
                g = fv[order[t].second]
                if use_table:
                    w = 0
                    for j in range(n_offs):
                        if grid[g + ov[j]]:
                            w |= (<int64_t>1) << j
                    ok = in_table(&tv[0], n_table, w)
                else:
                    ok = True
                    for j in range(n_offs):
                        if grid[g + ov[j]]:
                            ok = False
                            break
                if ok:
                    grid[g] = 1
                    c += 1
            cnt[r] = c
            for j in range(n_keep):
                kp[r, j] = grid[fv[kv[j]]]
    return counts, kept
