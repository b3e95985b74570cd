"""Hot numeric loops: the cycle-level event kernel, sampling, Pareto masks.

Every kernel is written as explicit loops over flat int64/float64 arrays so
numba can compile it; when numba is missing, or SDFPROBE_NO_NUMBA=1 is set,
the plain interpreted body (or a vectorized numpy twin) runs instead.  The
active variants are exported as sim_kernel / sample_signal / pareto_mask;
the _py/_jit variants stay importable for cross-checking and benchmarks.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and os.environ.get("SDFPROBE_NO_NUMBA", "") != "1"

# statement / record op codes shared with the encoder
OP_READ = 0
OP_COMPUTE = 1
OP_WRITE = 2
OP_DELAY = 3
OP_START = 4
OP_STOP = 5
OP_NOP = 6

# kernel exit codes
ST_OK = 0
ST_DEADLOCK = 1
ST_BUDGET = 2
ST_STEPS = 3
ST_TOKEN_BOUNDS = 5
ST_NO_PROGRESS = 6

# stop condition kinds
STOP_ITERATIONS = 0
STOP_MEASURED = 1
STOP_CYCLES = 2
STOP_ALL_ITERATIONS = 3

_INF = 2**62
_UNBOUNDED_CAP = 2**60
_MINSTD_MOD = 2147483647


def _sim_kernel_impl(
    prog_op,
    prog_arg,
    prog_cyc,
    prog_fire,
    tile_base,
    tile_len,
    ch_init,
    ch_cap,
    ch_prod,
    ch_cons,
    ch_rwords,
    ch_wwords,
    ch_rextra,
    ch_wextra,
    ch_shared,
    ch_graph,
    act_best,
    act_avg,
    act_worst,
    act_mode,
    act_seed,
    act_graph,
    act_q,
    n_graphs,
    policy,
    grant_overhead,
    cpw,
    wpg,
    poll_interval,
    poll_words,
    stop_kind,
    stop_graph,
    stop_n,
    required_stops,
    run_seed,
    budget,
    max_steps,
):
    T = tile_base.shape[0]
    A = act_q.shape[0]

    tokens = ch_init.copy()
    firings = np.zeros(A, np.int64)
    occ = np.zeros(A, np.int64)
    iters = np.zeros(n_graphs, np.int64)

    # per-tile runtime state: 0 at-statement, 1 wait-grant, 2 poll-wait, 3 transfer
    pc = np.zeros(T, np.int64)
    tstate = np.zeros(T, np.int64)
    ttime = np.zeros(T, np.int64)
    stmt_start = np.zeros(T, np.int64)
    words_left = np.zeros(T, np.int64)
    cur_extra = np.zeros(T, np.int64)
    cur_poll = np.zeros(T, np.int64)
    req_time = np.zeros(T, np.int64)
    req_words = np.zeros(T, np.int64)
    req_poll = np.zeros(T, np.int64)
    pend_fire = np.full(T, -1, np.int64)
    blocked = np.zeros(T, np.int64)
    blocked_kind = np.zeros(T, np.int64)
    blocked_ch = np.full(T, -1, np.int64)

    rec = np.empty((256, 5), np.int64)
    nrec = 0
    trig = np.empty((64, 4), np.int64)
    ntrig = 0
    bus = np.empty((256, 2), np.int64)
    nbus = 0
    pt = np.empty((16, 5), np.int64)  # pending triggers: kind, block, tile, emit, seq
    npt = 0
    seq = 0

    bus_free = 0
    last_grant = T - 1
    fsm_measuring = 0
    fsm_stops = 0
    fsm_completed = 0

    status = -1
    end_cycle = 0
    last_t = 0
    steps = 0

    while status < 0:
        steps += 1
        if steps > max_steps:
            status = ST_STEPS
            end_cycle = last_t
            break

        # earliest self-event over tiles, then the earliest possible bus grant
        tmin = _INF
        for i in range(T):
            if tile_len[i] > 0 and tstate[i] != 1 and ttime[i] < tmin:
                tmin = ttime[i]
        req_min = _INF
        for i in range(T):
            if tstate[i] == 1 and req_time[i] < req_min:
                req_min = req_time[i]
        if req_min < _INF:
            g = bus_free if bus_free > req_min else req_min
            if g < tmin:
                tmin = g
        if tmin >= _INF:
            status = ST_OK
            end_cycle = last_t
            break
        if stop_kind == STOP_CYCLES and tmin >= stop_n:
            status = ST_OK
            end_cycle = stop_n
            break
        if tmin > budget:
            status = ST_BUDGET
            end_cycle = tmin
            break
        last_t = tmin

        # tile events at tmin, ascending tile index
        for i in range(T):
            if status >= 0:
                break
            if tile_len[i] == 0 or tstate[i] == 1 or ttime[i] != tmin:
                continue
            now = tmin

            # a completed firing is booked at the tile's next wake, which is
            # exactly the completing statement's end cycle
            if pend_fire[i] >= 0:
                a_fired = pend_fire[i]
                pend_fire[i] = -1
                firings[a_fired] += 1
                gi = act_graph[a_fired]
                k = _INF
                for x in range(A):
                    if act_graph[x] == gi:
                        kk = firings[x] // act_q[x]
                        if kk < k:
                            k = kk
                if k > iters[gi]:
                    iters[gi] = k
                    if stop_kind == STOP_ITERATIONS and gi == stop_graph and k >= stop_n:
                        status = ST_OK
                        end_cycle = now
                        break
                    if stop_kind == STOP_ALL_ITERATIONS:
                        done = True
                        for gg in range(n_graphs):
                            if iters[gg] < stop_n:
                                done = False
                                break
                        if done:
                            status = ST_OK
                            end_cycle = now
                            break

            if tstate[i] == 3:
                # bus transfer (or zero-cost local pseudo-transfer) finished
                idx = tile_base[i] + pc[i]
                op = prog_op[idx]
                c = prog_arg[idx]
                is_read = op == OP_READ
                do_commit = False
                if cur_poll[i] == 1:
                    if is_read:
                        ok = tokens[c] >= ch_cons[c]
                    else:
                        ok = ch_cap[c] - tokens[c] >= ch_prod[c]
                    if ok:
                        blocked[i] = 0
                        total = ch_rwords[c] if is_read else ch_wwords[c]
                        words_left[i] = total
                        cur_extra[i] = ch_rextra[c] if is_read else ch_wextra[c]
                        if total > 0:
                            tstate[i] = 1
                            req_time[i] = now
                            req_words[i] = total if total < wpg else wpg
                            req_poll[i] = 0
                        else:
                            req_words[i] = 0
                            cur_poll[i] = 0
                            ttime[i] = now
                    else:
                        blocked[i] = 1
                        blocked_kind[i] = 1 if is_read else 2
                        blocked_ch[i] = c
                        tstate[i] = 2
                        ttime[i] = now + poll_interval
                else:
                    words_left[i] -= req_words[i]
                    if words_left[i] > 0:
                        tstate[i] = 1
                        req_time[i] = now
                        req_words[i] = words_left[i] if words_left[i] < wpg else wpg
                        req_poll[i] = 0
                    else:
                        do_commit = True
                if do_commit:
                    if is_read:
                        tokens[c] -= ch_cons[c]
                    else:
                        tokens[c] += ch_prod[c]
                    if tokens[c] < 0 or tokens[c] > ch_cap[c]:
                        status = ST_TOKEN_BOUNDS
                        end_cycle = now
                        break
                    for j in range(T):
                        blocked[j] = 0
                    if nrec == rec.shape[0]:
                        tmp = np.empty((rec.shape[0] * 2, 5), np.int64)
                        tmp[: rec.shape[0]] = rec
                        rec = tmp
                    rec[nrec, 0] = i
                    rec[nrec, 1] = op
                    rec[nrec, 2] = c
                    rec[nrec, 3] = stmt_start[i]
                    rec[nrec, 4] = now
                    nrec += 1
                    if prog_fire[idx] >= 0:
                        pend_fire[i] = prog_fire[idx]
                    pc[i] = (pc[i] + 1) % tile_len[i]
                    tstate[i] = 0
                    ttime[i] = now
                continue

            if tstate[i] == 2:
                # poll tick: shared channels poll over the bus, private ones locally
                idx = tile_base[i] + pc[i]
                op = prog_op[idx]
                c = prog_arg[idx]
                if ch_shared[c] == 1:
                    tstate[i] = 1
                    req_time[i] = now
                    req_words[i] = poll_words
                    req_poll[i] = 1
                else:
                    if op == OP_READ:
                        ok = tokens[c] >= ch_cons[c]
                    else:
                        ok = ch_cap[c] - tokens[c] >= ch_prod[c]
                    if ok:
                        blocked[i] = 0
                        words_left[i] = 0
                        req_words[i] = 0
                        cur_poll[i] = 0
                        tstate[i] = 3
                        ttime[i] = now
                    else:
                        ttime[i] = now + poll_interval
                continue

            # tstate == 0: run statements until the tile blocks or time advances
            guard = 64 * tile_len[i] + 1024
            while status < 0:
                guard -= 1
                if guard <= 0:
                    status = ST_NO_PROGRESS
                    end_cycle = now
                    break
                idx = tile_base[i] + pc[i]
                op = prog_op[idx]
                if op == OP_DELAY or op == OP_NOP:
                    dur = prog_cyc[idx]
                    if nrec == rec.shape[0]:
                        tmp = np.empty((rec.shape[0] * 2, 5), np.int64)
                        tmp[: rec.shape[0]] = rec
                        rec = tmp
                    rec[nrec, 0] = i
                    rec[nrec, 1] = op
                    rec[nrec, 2] = -1
                    rec[nrec, 3] = now
                    rec[nrec, 4] = now + dur
                    nrec += 1
                    pc[i] = (pc[i] + 1) % tile_len[i]
                    if dur > 0:
                        ttime[i] = now + dur
                        break
                elif op == OP_COMPUTE:
                    a = prog_arg[idx]
                    if act_mode[a] == 0:
                        dur = int(np.rint(act_avg[a]))
                    else:
                        # self-contained MINSTD draw: identical under numba and
                        # CPython, keyed by (run seed, actor, occurrence index)
                        s = (
                            run_seed % _MINSTD_MOD
                            + act_seed[a] % _MINSTD_MOD
                            + a * 15485863
                            + occ[a] * 2654435761
                        ) % _MINSTD_MOD
                        if s <= 0:
                            s = s + _MINSTD_MOD - 1
                        s = (s * 48271) % _MINSTD_MOD
                        s = (s * 48271) % _MINSTD_MOD
                        u = (s - 1.0) / (_MINSTD_MOD - 1.0)
                        lo = act_best[a]
                        mid = act_avg[a]
                        hi = act_worst[a]
                        if hi <= lo:
                            dur = int(np.rint(mid))
                        else:
                            fc = (mid - lo) / (hi - lo)
                            if u < fc:
                                x = lo + np.sqrt(u * (hi - lo) * (mid - lo))
                            else:
                                x = hi - np.sqrt((1.0 - u) * (hi - lo) * (hi - mid))
                            dur = int(np.rint(x))
                            lo_i = int(np.ceil(lo))
                            hi_i = int(np.floor(hi))
                            if lo_i <= hi_i:
                                if dur < lo_i:
                                    dur = lo_i
                                if dur > hi_i:
                                    dur = hi_i
                            else:
                                dur = int(np.rint(mid))
                    occ[a] += 1
                    if nrec == rec.shape[0]:
                        tmp = np.empty((rec.shape[0] * 2, 5), np.int64)
                        tmp[: rec.shape[0]] = rec
                        rec = tmp
                    rec[nrec, 0] = i
                    rec[nrec, 1] = OP_COMPUTE
                    rec[nrec, 2] = a
                    rec[nrec, 3] = now
                    rec[nrec, 4] = now + dur
                    nrec += 1
                    if prog_fire[idx] >= 0:
                        pend_fire[i] = prog_fire[idx]
                    pc[i] = (pc[i] + 1) % tile_len[i]
                    ttime[i] = now + dur
                    break
                elif op == OP_START or op == OP_STOP:
                    dur = prog_cyc[idx]
                    # a start signals at its end cycle, a stop at its begin
                    # cycle, so the stopwatch spans exactly the block between
                    emit = now + dur if op == OP_START else now
                    if npt == pt.shape[0]:
                        tmp = np.empty((pt.shape[0] * 2, 5), np.int64)
                        tmp[: pt.shape[0]] = pt
                        pt = tmp
                    pt[npt, 0] = 0 if op == OP_START else 1
                    pt[npt, 1] = prog_arg[idx]
                    pt[npt, 2] = i
                    pt[npt, 3] = emit
                    pt[npt, 4] = seq
                    npt += 1
                    seq += 1
                    if nrec == rec.shape[0]:
                        tmp = np.empty((rec.shape[0] * 2, 5), np.int64)
                        tmp[: rec.shape[0]] = rec
                        rec = tmp
                    rec[nrec, 0] = i
                    rec[nrec, 1] = op
                    rec[nrec, 2] = prog_arg[idx]
                    rec[nrec, 3] = now
                    rec[nrec, 4] = now + dur
                    nrec += 1
                    pc[i] = (pc[i] + 1) % tile_len[i]
                    if dur > 0:
                        ttime[i] = now + dur
                        break
                else:
                    # read or write: first touch issues a poll; private
                    # channels are checked locally and transfer in zero cycles
                    c = prog_arg[idx]
                    stmt_start[i] = now
                    if ch_shared[c] == 1:
                        tstate[i] = 1
                        req_time[i] = now
                        req_words[i] = poll_words
                        req_poll[i] = 1
                        break
                    if op == OP_READ:
                        ok = tokens[c] >= ch_cons[c]
                    else:
                        ok = ch_cap[c] - tokens[c] >= ch_prod[c]
                    if ok:
                        words_left[i] = 0
                        req_words[i] = 0
                        cur_poll[i] = 0
                        tstate[i] = 3
                        ttime[i] = now
                    else:
                        blocked[i] = 1
                        blocked_kind[i] = 1 if op == OP_READ else 2
                        blocked_ch[i] = c
                        tstate[i] = 2
                        ttime[i] = now + poll_interval
                    break

        # grants at tmin: requests issued this batch compete immediately
        while status < 0:
            req_min = _INF
            for i in range(T):
                if tstate[i] == 1 and req_time[i] < req_min:
                    req_min = req_time[i]
            if req_min >= _INF:
                break
            g = bus_free if bus_free > req_min else req_min
            if g > tmin:
                break
            winner = -1
            if policy == 1:
                for i in range(T):
                    if tstate[i] == 1 and req_time[i] <= g:
                        winner = i
                        break
            else:
                for k in range(1, T + 1):
                    i = (last_grant + k) % T
                    if tstate[i] == 1 and req_time[i] <= g:
                        winner = i
                        break
            dur = grant_overhead + req_words[winner] * cpw
            if req_poll[winner] == 0 and words_left[winner] == req_words[winner]:
                dur += cur_extra[winner]
            if nbus == bus.shape[0]:
                tmp = np.empty((bus.shape[0] * 2, 2), np.int64)
                tmp[: bus.shape[0]] = bus
                bus = tmp
            bus[nbus, 0] = g
            bus[nbus, 1] = g + dur
            nbus += 1
            bus_free = g + dur
            last_grant = winner
            cur_poll[winner] = req_poll[winner]
            tstate[winner] = 3
            ttime[winner] = g + dur

        # release triggers whose emit cycle has been reached, in
        # (cycle, tile, issue order); drives the measured-stop state machine
        while npt > 0 and status < 0:
            best = -1
            for p in range(npt):
                if pt[p, 3] <= tmin:
                    if best < 0:
                        best = p
                    elif pt[p, 3] < pt[best, 3] or (
                        pt[p, 3] == pt[best, 3]
                        and (
                            pt[p, 2] < pt[best, 2]
                            or (pt[p, 2] == pt[best, 2] and pt[p, 4] < pt[best, 4])
                        )
                    ):
                        best = p
            if best < 0:
                break
            kind = pt[best, 0]
            block = pt[best, 1]
            tl = pt[best, 2]
            emit = pt[best, 3]
            pt[best, :] = pt[npt - 1, :]
            npt -= 1
            if ntrig == trig.shape[0]:
                tmp = np.empty((trig.shape[0] * 2, 4), np.int64)
                tmp[: trig.shape[0]] = trig
                trig = tmp
            trig[ntrig, 0] = kind
            trig[ntrig, 1] = block
            trig[ntrig, 2] = tl
            trig[ntrig, 3] = emit
            ntrig += 1
            if stop_kind == STOP_MEASURED:
                if kind == 0:
                    if fsm_measuring == 0:
                        fsm_measuring = 1
                        fsm_stops = 0
                else:
                    if fsm_measuring == 1:
                        fsm_stops += 1
                        if fsm_stops >= required_stops:
                            fsm_completed += 1
                            fsm_measuring = 0
                            if fsm_completed >= stop_n:
                                status = ST_OK
                                end_cycle = emit

        # deadlock: every tile with work has seen its guard fail and no
        # transfer is in flight, so no token count can ever change again
        if status < 0:
            alive = 0
            stuck = 0
            for i in range(T):
                if tile_len[i] > 0:
                    alive += 1
                    if blocked[i] == 1:
                        stuck += 1
            if alive > 0 and stuck == alive:
                status = ST_DEADLOCK
                end_cycle = tmin

    # drain leftover triggers (emitted by statements already issued)
    while npt > 0:
        best = 0
        for p in range(1, npt):
            if pt[p, 3] < pt[best, 3] or (
                pt[p, 3] == pt[best, 3]
                and (
                    pt[p, 2] < pt[best, 2]
                    or (pt[p, 2] == pt[best, 2] and pt[p, 4] < pt[best, 4])
                )
            ):
                best = p
        if ntrig == trig.shape[0]:
            tmp = np.empty((trig.shape[0] * 2, 4), np.int64)
            tmp[: trig.shape[0]] = trig
            trig = tmp
        trig[ntrig, 0] = pt[best, 0]
        trig[ntrig, 1] = pt[best, 1]
        trig[ntrig, 2] = pt[best, 2]
        trig[ntrig, 3] = pt[best, 3]
        ntrig += 1
        pt[best, :] = pt[npt - 1, :]
        npt -= 1

    return (
        status,
        end_cycle,
        rec[:nrec].copy(),
        trig[:ntrig].copy(),
        bus[:nbus].copy(),
        tokens,
        firings,
        iters,
        blocked_kind,
        blocked_ch,
    )


def _pareto_mask_loop(lat, pw):
    n = lat.shape[0]
    keep = np.ones(n, np.bool_)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if (
                lat[j] <= lat[i]
                and pw[j] <= pw[i]
                and (lat[j] < lat[i] or pw[j] < pw[i])
            ):
                keep[i] = False
                break
    return keep


def _pareto_mask_np(lat, pw):
    le = (lat[None, :] <= lat[:, None]) & (pw[None, :] <= pw[:, None])
    strict = (lat[None, :] < lat[:, None]) | (pw[None, :] < pw[:, None])
    return ~(le & strict).any(axis=1)


def _sample_signal_loop(breaks, watts, instants):
    out = np.empty(instants.shape[0], np.float64)
    last = watts.shape[0] - 1
    for k in range(instants.shape[0]):
        idx = np.searchsorted(breaks, instants[k], side="right") - 1
        if idx < 0:
            idx = 0
        if idx > last:
            idx = last
        out[k] = watts[idx]
    return out


def _sample_signal_np(breaks, watts, instants):
    idx = np.searchsorted(breaks, instants, side="right") - 1
    return watts[np.clip(idx, 0, watts.shape[0] - 1)]


_sim_kernel_py = _sim_kernel_impl
if HAS_NUMBA:
    _sim_kernel_jit = njit(cache=True)(_sim_kernel_impl)
    _pareto_mask_jit = njit(cache=True)(_pareto_mask_loop)
    _sample_signal_jit = njit(cache=True)(_sample_signal_loop)
else:  # pragma: no cover
    _sim_kernel_jit = None
    _pareto_mask_jit = None
    _sample_signal_jit = None

sim_kernel = _sim_kernel_jit if USE_NUMBA else _sim_kernel_py
pareto_mask = _pareto_mask_jit if USE_NUMBA else _pareto_mask_np
sample_signal = _sample_signal_jit if USE_NUMBA else _sample_signal_np
