"""Compiled event loop behind :func:`gradsync.simengine.run_scenario`.

Everything here works on flat arrays prepared by the Python side. Events are
``(time, seq, kind, a, b, payload)`` tuples in a binary heap; ``seq`` is
assigned at scheduling time so equal-time events fire in scheduling order.
"""

import heapq

import numpy as np
from numba import njit

from .estimate_layer import advance_estimate, direct_anchor_value
from .gcs import fast_condition

SAMPLE = 0
SEND_DIRECT = 1
DELIVER_DIRECT = 2
EMIT_BEACON = 3
DELIVER_BEACON = 4
DELIVER_EXCHANGE = 5
ALG_TICK = 6

DELAY_FIXED_MAX = 0
DELAY_FIXED_MIN = 1
DELAY_SEEDED_UNIFORM = 2
DELAY_ALTERNATING = 3

TAG_DELAY = 1
TAG_ETA = 2
TAG_LOSS = 3

WINDOW = 4

# integer counters returned in ``counts``
C_EVENTS = 0
C_DIRECT_SENT = 1
C_DIRECT_DELIVERED = 2
C_DIRECT_STALE = 3
C_EXCH_SENT = 4
C_EXCH_APPLIED = 5
C_EXCH_STALE = 6
C_EXCH_HELD = 7
C_EXCH_DROPPED = 8
C_SOUND_CHECKS = 9
C_SOUND_VIOL = 10
C_VALID_VIOL = 11
C_STALE_VIOL = 12
C_FAST_ENTRIES = 13
C_FAST_ENTRIES_WARM = 14
C_TICKS = 15
C_BEACONS = 16
C_RECEPTIONS = 17
C_LOST = 18
C_INFLIGHT_DIRECT = 19
C_INFLIGHT_EXCH = 20
C_STATUS = 21
C_HELD_APPLIED = 22
C_FAST_TICKS_WARM = 23
C_VALID_CHECKS = 24
N_COUNTS = 25

F_MAX_ERR_RATIO = 0
F_MAX_STALENESS_RATIO = 1
F_MAX_RATE_DEV = 2
N_FLOATS = 3


@njit(cache=True)
def _mix(z):
    z = z + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def hash_uniform(seed, tag, a, b, c):
    """Deterministic uniform draw in [0, 1) keyed by five non-negative integers."""
    h = _mix(np.uint64(seed))
    h = _mix(h ^ np.uint64(tag))
    h = _mix(h ^ np.uint64(a))
    h = _mix(h ^ np.uint64(b))
    h = _mix(h ^ np.uint64(c))
    return (h >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def delay_value(kind, seed, link_key, msg_index, beta_min, beta_max):
    if kind == DELAY_FIXED_MAX:
        return beta_max
    if kind == DELAY_FIXED_MIN:
        return beta_min
    if kind == DELAY_ALTERNATING:
        return beta_max if msg_index % 2 == 0 else beta_min
    u = hash_uniform(seed, TAG_DELAY, link_key, msg_index, 0)
    d = beta_min + u * (beta_max - beta_min)
    return min(max(d, beta_min), beta_max)


@njit(cache=True)
def _hw(seg_start, seg_rate, seg_cum, nseg, u, t):
    row = seg_start[u, : nseg[u]]
    i = np.searchsorted(row, t, side="right") - 1
    if i < 0:
        i = 0
    return seg_cum[u, i] + seg_rate[u, i] * (t - seg_start[u, i])


@njit(cache=True)
def _hw_inv(seg_start, seg_rate, seg_cum, nseg, u, h):
    row = seg_cum[u, : nseg[u]]
    i = np.searchsorted(row, h, side="right") - 1
    if i < 0:
        i = 0
    return seg_start[u, i] + (h - seg_cum[u, i]) / seg_rate[u, i]


@njit(cache=True)
def run_kernel(
    n, duration, sample_period, n_samples, tick, mu, r_max, ru, delta_t, delta_b,
    seed, delay_kind, loss_prob, warmup, max_events, s_max, tol, eager,
    seg_start, seg_rate, seg_cum, nseg,
    link_bmin, link_bmax, link_key,
    adj_ptr, adj_node, adj_link, slot_direct_rec,
    rec_reader, rec_remote, rec_kind, rec_eps, rec_kappa, rec_link,
    rec_recv_slot, rec_hop1, rec_hop2, rec_stale_bound,
    node_rec_ptr, node_rec_idx,
    xsend_ptr, xsend_idx, xrecv_ptr, xrecv_idx,
    out_l, out_h, out_mode,
):
    n_links = link_bmin.shape[0]
    n_rec = rec_reader.shape[0]
    n_slots = adj_node.shape[0]
    counts = np.zeros(N_COUNTS, dtype=np.int64)
    fl = np.zeros(N_FLOATS, dtype=np.float64)

    slot_origin = np.empty(n_slots, dtype=np.int64)
    for x in range(n):
        for j in range(adj_ptr[x], adj_ptr[x + 1]):
            slot_origin[j] = x

    l_ref = np.zeros(n)
    h_ref = np.zeros(n)
    t_ref = np.zeros(n)
    mode = np.zeros(n, dtype=np.int64)
    tick_pending = np.zeros(n, dtype=np.bool_)
    tick_k = np.zeros(n, dtype=np.int64)
    prev_sample_l = np.zeros(n)

    rec_valid = np.zeros(n_rec, dtype=np.bool_)
    rec_anchor_h = np.zeros(n_rec)
    rec_anchor_v = np.zeros(n_rec)
    rec_anchor_t = np.zeros(n_rec)
    rec_last = np.full(n_rec, -1, dtype=np.int64)
    held_id = np.full((n_rec, WINDOW), -1, dtype=np.int64)
    held_l = np.zeros((n_rec, WINDOW))
    held_pos = np.zeros(n_rec, dtype=np.int64)

    ring_id = np.full((n_slots, WINDOW), -1, dtype=np.int64)
    ring_h = np.zeros((n_slots, WINDOW))
    ring_t = np.zeros((n_slots, WINDOW))
    ring_pos = np.zeros(n_slots, dtype=np.int64)

    link_count = np.zeros(n_links, dtype=np.int64)

    max_deg_rec = 1
    for u in range(n):
        max_deg_rec = max(max_deg_rec, node_rec_ptr[u + 1] - node_rec_ptr[u])
    v_est = np.zeros(max_deg_rec)
    v_eps = np.zeros(max_deg_rec)
    v_kap = np.zeros(max_deg_rec)

    heap = [(0.0, 0, 0, 0, 0, 0.0)]
    heap.pop()
    seq = 0

    heapq.heappush(heap, (0.0, seq, SAMPLE, 0, 0, 0.0))
    seq += 1
    for u in range(n):
        heapq.heappush(heap, (0.0, seq, SEND_DIRECT, u, 0, 0.0))
        seq += 1
    for u in range(n):
        heapq.heappush(heap, (0.0, seq, EMIT_BEACON, u, 0, 0.0))
        seq += 1
    if eager:
        # tick at every boundary; the lazy default skips ticks that cannot change the mode
        for u in range(n):
            seq = _notify(heap, seq, u, 0.0, tick, duration, tick_pending, tick_k,
                          seg_start, seg_rate, seg_cum, nseg)

    while len(heap) > 0:
        if heap[0][0] > duration:
            break
        ev = heapq.heappop(heap)
        t = ev[0]
        kind = ev[2]
        a = ev[3]
        b = ev[4]
        payload = ev[5]
        counts[C_EVENTS] += 1
        if counts[C_EVENTS] > max_events:
            counts[C_STATUS] = 1
            break

        if kind == SAMPLE:
            for u in range(n):
                h = _hw(seg_start, seg_rate, seg_cum, nseg, u, t)
                rate = 1.0 + mu if mode[u] == 1 else 1.0
                lu = l_ref[u] + rate * (h - h_ref[u])
                out_l[b, u] = lu
                out_h[b, u] = h
                out_mode[b, u] = mode[u]
                counts[C_VALID_CHECKS] += 1
                if lu < t - tol:
                    counts[C_VALID_VIOL] += 1
                if b > 0:
                    dt = t - (b - 1) * sample_period
                    dl = lu - prev_sample_l[u]
                    if dl < dt - tol or dl > r_max * dt + tol:
                        counts[C_VALID_VIOL] += 1
                prev_sample_l[u] = lu
            for r in range(n_rec):
                if not rec_valid[r]:
                    continue
                w = rec_reader[r]
                v = rec_remote[r]
                hw_ = _hw(seg_start, seg_rate, seg_cum, nseg, w, t)
                est = advance_estimate(rec_anchor_v[r], rec_anchor_h[r], hw_)
                hv = _hw(seg_start, seg_rate, seg_cum, nseg, v, t)
                rv = 1.0 + mu if mode[v] == 1 else 1.0
                lv = l_ref[v] + rv * (hv - h_ref[v])
                err = abs(est - lv)
                counts[C_SOUND_CHECKS] += 1
                if err > rec_eps[r] + tol:
                    counts[C_SOUND_VIOL] += 1
                ratio = err / rec_eps[r]
                if ratio > fl[F_MAX_ERR_RATIO]:
                    fl[F_MAX_ERR_RATIO] = ratio
                age = t - rec_anchor_t[r]
                sr = age / rec_stale_bound[r]
                if sr > fl[F_MAX_STALENESS_RATIO]:
                    fl[F_MAX_STALENESS_RATIO] = sr
                if age > rec_stale_bound[r] + tol:
                    counts[C_STALE_VIOL] += 1
            if b + 1 < n_samples:
                heapq.heappush(heap, ((b + 1) * sample_period, seq, SAMPLE, 0, b + 1, 0.0))
                seq += 1

        elif kind == SEND_DIRECT:
            u = a
            h = _hw(seg_start, seg_rate, seg_cum, nseg, u, t)
            rate = 1.0 + mu if mode[u] == 1 else 1.0
            lu = l_ref[u] + rate * (h - h_ref[u])
            for j in range(adj_ptr[u], adj_ptr[u + 1]):
                ln = adj_link[j]
                idx = link_count[ln]
                link_count[ln] += 1
                counts[C_DIRECT_SENT] += 1
                if loss_prob > 0.0 and hash_uniform(seed, TAG_LOSS, link_key[ln], idx, 0) < loss_prob:
                    counts[C_LOST] += 1
                    continue
                d = delay_value(delay_kind, seed, link_key[ln], idx, link_bmin[ln], link_bmax[ln])
                heapq.heappush(heap, (t + d, seq, DELIVER_DIRECT, slot_direct_rec[j], b, lu))
                seq += 1
            tn = _hw_inv(seg_start, seg_rate, seg_cum, nseg, u, (b + 1) * delta_t)
            if tn <= duration:
                heapq.heappush(heap, (max(tn, t), seq, SEND_DIRECT, u, b + 1, 0.0))
                seq += 1

        elif kind == DELIVER_DIRECT:
            r = a
            counts[C_DIRECT_DELIVERED] += 1
            if b <= rec_last[r]:
                counts[C_DIRECT_STALE] += 1
                continue
            w = rec_reader[r]
            ln = rec_link[r]
            rec_anchor_h[r] = _hw(seg_start, seg_rate, seg_cum, nseg, w, t)
            rec_anchor_v[r] = direct_anchor_value(payload, link_bmin[ln], link_bmax[ln], r_max)
            rec_anchor_t[r] = t
            rec_last[r] = b
            rec_valid[r] = True
            seq = _notify(heap, seq, w, t, tick, duration, tick_pending, tick_k,
                          seg_start, seg_rate, seg_cum, nseg)

        elif kind == EMIT_BEACON:
            x = a
            counts[C_BEACONS] += 1
            for j in range(adj_ptr[x], adj_ptr[x + 1]):
                v = adj_node[j]
                eta = ru * hash_uniform(seed, TAG_ETA, x, b, v)
                heapq.heappush(heap, (t + eta, seq, DELIVER_BEACON, j, b, 0.0))
                seq += 1
            tn = _hw_inv(seg_start, seg_rate, seg_cum, nseg, x, (b + 1) * delta_b)
            if tn <= duration:
                heapq.heappush(heap, (max(tn, t), seq, EMIT_BEACON, x, b + 1, 0.0))
                seq += 1

        elif kind == DELIVER_BEACON:
            j = a
            v = adj_node[j]
            counts[C_RECEPTIONS] += 1
            h = _hw(seg_start, seg_rate, seg_cum, nseg, v, t)
            rate = 1.0 + mu if mode[v] == 1 else 1.0
            lv = l_ref[v] + rate * (h - h_ref[v])
            p = ring_pos[j]
            ring_id[j, p] = b
            ring_h[j, p] = h
            ring_t[j, p] = t
            ring_pos[j] = (p + 1) % WINDOW
            for q in range(xsend_ptr[j], xsend_ptr[j + 1]):
                r = xsend_idx[q]
                l1 = rec_hop1[r]
                l2 = rec_hop2[r]
                counts[C_EXCH_SENT] += 1
                i1 = link_count[l1]
                link_count[l1] += 1
                i2 = link_count[l2]
                link_count[l2] += 1
                if loss_prob > 0.0 and (
                    hash_uniform(seed, TAG_LOSS, link_key[l1], i1, 0) < loss_prob
                    or hash_uniform(seed, TAG_LOSS, link_key[l2], i2, 0) < loss_prob
                ):
                    counts[C_LOST] += 1
                    continue
                d1 = delay_value(delay_kind, seed, link_key[l1], i1, link_bmin[l1], link_bmax[l1])
                d2 = delay_value(delay_kind, seed, link_key[l2], i2, link_bmin[l2], link_bmax[l2])
                heapq.heappush(heap, (t + d1 + d2, seq, DELIVER_EXCHANGE, r, b, lv))
                seq += 1
            # exchanges that overtook this reception
            touched = False
            for q in range(xrecv_ptr[j], xrecv_ptr[j + 1]):
                r = xrecv_idx[q]
                for k in range(WINDOW):
                    if held_id[r, k] == b:
                        held_id[r, k] = -1
                        if b > rec_last[r]:
                            rec_anchor_h[r] = h
                            rec_anchor_v[r] = held_l[r, k]
                            rec_anchor_t[r] = t
                            rec_last[r] = b
                            rec_valid[r] = True
                            counts[C_HELD_APPLIED] += 1
                            touched = True
            if touched:
                seq = _notify(heap, seq, v, t, tick, duration, tick_pending, tick_k,
                              seg_start, seg_rate, seg_cum, nseg)

        elif kind == DELIVER_EXCHANGE:
            r = a
            if b <= rec_last[r]:
                counts[C_EXCH_STALE] += 1
                continue
            js = rec_recv_slot[r]
            found = -1
            newest = -1
            for k in range(WINDOW):
                if ring_id[js, k] == b:
                    found = k
                if ring_id[js, k] > newest:
                    newest = ring_id[js, k]
            if found >= 0:
                rec_anchor_h[r] = ring_h[js, found]
                rec_anchor_v[r] = payload
                rec_anchor_t[r] = ring_t[js, found]
                rec_last[r] = b
                rec_valid[r] = True
                counts[C_EXCH_APPLIED] += 1
                seq = _notify(heap, seq, rec_reader[r], t, tick, duration, tick_pending, tick_k,
                              seg_start, seg_rate, seg_cum, nseg)
            elif b > newest:
                p = held_pos[r]
                held_id[r, p] = b
                held_l[r, p] = payload
                held_pos[r] = (p + 1) % WINDOW
                counts[C_EXCH_HELD] += 1
            else:
                counts[C_EXCH_DROPPED] += 1

        elif kind == ALG_TICK:
            u = a
            if not tick_pending[u] or tick_k[u] != b:
                continue
            counts[C_TICKS] += 1
            h_tick = b * tick
            rate = 1.0 + mu if mode[u] == 1 else 1.0
            dh = h_tick - h_ref[u]
            l_new = l_ref[u] + rate * dh
            counts[C_VALID_CHECKS] += 1
            if dh > 0.0:
                dev = abs((l_new - l_ref[u]) / dh - rate)
                if dev > fl[F_MAX_RATE_DEV]:
                    fl[F_MAX_RATE_DEV] = dev
                if dev > tol:
                    counts[C_VALID_VIOL] += 1
            if l_new < l_ref[u] or l_new - l_ref[u] < (t - t_ref[u]) - tol or l_new < t - tol:
                counts[C_VALID_VIOL] += 1
            l_ref[u] = l_new
            h_ref[u] = h_tick
            t_ref[u] = t

            cnt = 0
            for q in range(node_rec_ptr[u], node_rec_ptr[u + 1]):
                r = node_rec_idx[q]
                if not rec_valid[r]:
                    continue
                est = advance_estimate(rec_anchor_v[r], rec_anchor_h[r], h_tick)
                v = rec_remote[r]
                hv = _hw(seg_start, seg_rate, seg_cum, nseg, v, t)
                rv = 1.0 + mu if mode[v] == 1 else 1.0
                lv = l_ref[v] + rv * (hv - h_ref[v])
                err = abs(est - lv)
                counts[C_SOUND_CHECKS] += 1
                if err > rec_eps[r] + tol:
                    counts[C_SOUND_VIOL] += 1
                if err / rec_eps[r] > fl[F_MAX_ERR_RATIO]:
                    fl[F_MAX_ERR_RATIO] = err / rec_eps[r]
                v_est[cnt] = est
                v_eps[cnt] = rec_eps[r]
                v_kap[cnt] = rec_kappa[r]
                cnt += 1
            fast = fast_condition(l_new, v_est, v_eps, v_kap, cnt, s_max)
            if fast:
                if mode[u] == 0:
                    counts[C_FAST_ENTRIES] += 1
                    if t >= warmup:
                        counts[C_FAST_ENTRIES_WARM] += 1
                if t >= warmup:
                    counts[C_FAST_TICKS_WARM] += 1
                mode[u] = 1
            else:
                mode[u] = 0
            if fast or eager:
                tn = _hw_inv(seg_start, seg_rate, seg_cum, nseg, u, (b + 1) * tick)
                if tn <= duration:
                    tick_k[u] = b + 1
                    heapq.heappush(heap, (max(tn, t), seq, ALG_TICK, u, b + 1, 0.0))
                    seq += 1
                else:
                    tick_pending[u] = False
            else:
                tick_pending[u] = False

    for e in heap:
        if e[2] == DELIVER_DIRECT:
            counts[C_INFLIGHT_DIRECT] += 1
        elif e[2] == DELIVER_EXCHANGE:
            counts[C_INFLIGHT_EXCH] += 1
    return counts, fl


@njit(cache=True)
def _notify(heap, seq, u, t, tick, duration, tick_pending, tick_k,
            seg_start, seg_rate, seg_cum, nseg):
    """Schedule ``u``'s next tick after an estimate of ``u`` changed."""
    if tick_pending[u]:
        return seq
    h = _hw(seg_start, seg_rate, seg_cum, nseg, u, t)
    k = np.int64(np.floor(h / tick)) + 1
    while k * tick <= h:
        k += 1
    tn = _hw_inv(seg_start, seg_rate, seg_cum, nseg, u, k * tick)
    if tn > duration:
        return seq
    tick_pending[u] = True
    tick_k[u] = k
    heapq.heappush(heap, (max(tn, t), seq, ALG_TICK, u, k, 0.0))
    return seq + 1
