"""Compiled inner loops for the recall dynamics.

Every entry point takes an explicit integer seed and reseeds numba's
generator on entry, so a call is a pure function of its arguments.
Cluster data arrive in the flat CSR layout of ``ModelArrays``, packed
internally as ``arr = (mem_ptr, mem_idx, deg, row_ptr, nz_ptr, nz_col, nz_val)``.

Two per-call caches keep the inner loop cheap without changing results:

* ``syn`` holds each cluster's noiseless constraint sums, recomputed only
  when ``dirty[l]`` is set. Writing a neuron marks every cluster that
  contains it, found through the reverse map ``(nb_ptr, nb)``.
* ``msg`` holds each constraint's last message and ``acc`` each member
  slot's signed message total. Messages are integers, so patching
  ``acc`` for the rows whose message changed is exact.
"""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _uniform(half_width):
    if half_width > 0.0:
        return half_width * (2.0 * np.random.random() - 1.0)
    return 0.0


@njit(cache=True, inline="always")
def _constraint_message(h, psi):
    if h >= psi:
        return 1
    if h >= -psi:
        return 0
    return -1


@njit(cache=True, inline="always")
def _noisy_message(h, psi, nu):
    # Draw noise only when some value in [-nu, nu] could change the message;
    # otherwise the outcome is fixed and the draw is skipped.
    if h + nu < psi and h - nu >= -psi:
        return 0
    if h - nu >= psi:
        return 1
    if h + nu < -psi:
        return -1
    return _constraint_message(h + _uniform(nu), psi)


@njit(cache=True, inline="always")
def _noisy_step(a, phi, upsilon):
    """Sign of feedback ``a`` plus noise when it reaches phi in magnitude, else 0.

    The draw is skipped when every value in [-upsilon, upsilon] gives the same answer.
    """
    if a + upsilon < phi and a - upsilon > -phi:
        return 0
    if a - upsilon >= phi:
        return 1
    if a + upsilon <= -phi:
        return -1
    g = a + _uniform(upsilon)
    if g >= phi:
        return 1
    if g <= -phi:
        return -1
    return 0


@njit(cache=True)
def _new_cache(n, mem_ptr, mem_idx, rows):
    L = mem_ptr.size - 1
    nb_ptr = np.zeros(n + 1, dtype=np.int64)
    for k in range(mem_ptr[-1]):
        nb_ptr[mem_idx[k] + 1] += 1
    nb_ptr = np.cumsum(nb_ptr)
    fill = nb_ptr[:-1].copy()
    nb = np.zeros(mem_ptr[-1], dtype=np.int64)
    for l in range(L):
        for k in range(mem_ptr[l], mem_ptr[l + 1]):
            nb[fill[mem_idx[k]]] = l
            fill[mem_idx[k]] += 1
    return (np.zeros(rows, dtype=np.float64), np.ones(L, dtype=np.bool_), nb_ptr, nb,
            np.zeros(rows, dtype=np.int64), np.zeros(mem_ptr[-1], dtype=np.float64))


@njit(cache=True, inline="always")
def _write(state, gid, value, cache):
    dirty, nb_ptr, nb = cache[1], cache[2], cache[3]
    state[gid] = value
    for c in range(nb_ptr[gid], nb_ptr[gid + 1]):
        dirty[nb[c]] = True


@njit(cache=True, inline="always")
def _sums(l, state, arr, cache):
    """Make ``syn`` hold cluster ``l``'s noiseless constraint sums."""
    mem_ptr, mem_idx, _, row_ptr, nz_ptr, nz_col, nz_val = arr
    syn, dirty = cache[0], cache[1]
    if dirty[l]:
        base = mem_ptr[l]
        for r in range(row_ptr[l], row_ptr[l + 1]):
            h = 0.0
            for e in range(nz_ptr[r], nz_ptr[r + 1]):
                h += nz_val[e] * state[mem_idx[base + nz_col[e]]]
            syn[r] = h
        dirty[l] = False


@njit(cache=True, inline="always")
def forward(l, state, psi, nu, arr, cache):
    """Noisy constraint pass over cluster ``l``; updates ``msg``/``acc``, returns #firing."""
    mem_ptr, _, _, row_ptr, nz_ptr, nz_col, nz_val = arr
    syn, msg, acc = cache[0], cache[4], cache[5]
    _sums(l, state, arr, cache)
    base = mem_ptr[l]
    fired = 0
    for r in range(row_ptr[l], row_ptr[l + 1]):
        m = _noisy_message(syn[r], psi, nu)
        if m != msg[r]:
            delta = m - msg[r]
            for e in range(nz_ptr[r], nz_ptr[r + 1]):
                if nz_val[e] > 0:
                    acc[base + nz_col[e]] += delta
                else:
                    acc[base + nz_col[e]] -= delta
            msg[r] = m
        if m != 0:
            fired += 1
    return fired


@njit(cache=True, inline="always")
def satisfied(l, state, psi, nu, arr, cache):
    return forward(l, state, psi, nu, arr, cache) == 0


@njit(cache=True, inline="always")
def correct_round(l, state, psi, phi, nu, upsilon, Q, arr, cache):
    """One forward/backward round of intra-cluster correction.

    Returns (constraints fired, pattern neurons changed).
    """
    mem_ptr, mem_idx, deg = arr[0], arr[1], arr[2]
    acc = cache[5]
    fired = forward(l, state, psi, nu, arr, cache)
    changed = 0
    for k in range(mem_ptr[l], mem_ptr[l + 1]):
        step = _noisy_step(acc[k] / deg[k], phi, upsilon)
        if step != 0:
            gid = mem_idx[k]
            old = state[gid]
            new = old - step
            if new < 0:
                new = 0
            elif new > Q - 1:
                new = Q - 1
            if new != old:
                _write(state, gid, new, cache)
                changed += 1
    return fired, changed


@njit(cache=True, inline="always")
def _zero_syndrome(l, state, arr, cache):
    row_ptr, syn = arr[3], cache[0]
    _sums(l, state, arr, cache)
    for r in range(row_ptr[l], row_ptr[l + 1]):
        if abs(syn[r]) > 1e-12:
            return False
    return True


@njit(cache=True)
def _noiseless_clean(l, state, psi, arr, cache):
    row_ptr, syn = arr[3], cache[0]
    _sums(l, state, arr, cache)
    for r in range(row_ptr[l], row_ptr[l + 1]):
        if _constraint_message(syn[r], psi) != 0:
            return False
    return True


@njit(cache=True)
def _correct(l, state, psi, phi, nu, upsilon, Q, t_max, arr, cache):
    # Stop early only when the remaining rounds provably change nothing:
    # noiseless dynamics that stalled, or a zero syndrome under safe thresholds.
    noiseless = nu == 0.0 and upsilon == 0.0
    safe = psi > nu and phi > upsilon
    for _ in range(t_max):
        fired, changed = correct_round(l, state, psi, phi, nu, upsilon, Q, arr, cache)
        if changed == 0:
            if noiseless:
                break
            if safe and _zero_syndrome(l, state, arr, cache):
                break


@njit(cache=True)
def _setup(state, seed, mem_ptr, mem_idx, deg, row_ptr, nz_ptr, nz_col, nz_val):
    np.random.seed(seed)
    arr = (mem_ptr, mem_idx, deg, row_ptr, nz_ptr, nz_col, nz_val)
    cache = _new_cache(state.size, mem_ptr, mem_idx, row_ptr[-1])
    return arr, cache


@njit(cache=True)
def intra_cluster(l, state, psi, phi, nu, upsilon, Q, t_max, seed,
                  mem_ptr, mem_idx, deg, row_ptr, nz_ptr, nz_col, nz_val):
    arr, cache = _setup(state, seed, mem_ptr, mem_idx, deg, row_ptr, nz_ptr, nz_col, nz_val)
    _correct(l, state, psi, phi, nu, upsilon, Q, t_max, arr, cache)
    return _noiseless_clean(l, state, psi, arr, cache)


@njit(cache=True)
def check_cluster(l, state, psi, nu, seed, mem_ptr, mem_idx, deg, row_ptr, nz_ptr, nz_col, nz_val):
    arr, cache = _setup(state, seed, mem_ptr, mem_idx, deg, row_ptr, nz_ptr, nz_col, nz_val)
    return satisfied(l, state, psi, nu, arr, cache)


@njit(cache=True)
def peel(state, psi, phi, nu, upsilon, Q, t_max, T_max, seed,
         mem_ptr, mem_idx, deg, row_ptr, nz_ptr, nz_col, nz_val, flags, sat_counts):
    """Round-robin cluster correction with reversion.

    ``state`` is updated in place. ``flags`` receives each cluster's last
    satisfaction verdict and ``sat_counts[t]`` the number of satisfied
    clusters at the end of round ``t`` (entry 0 is the initial count).
    Returns (working rounds, success).
    """
    arr, cache = _setup(state, seed, mem_ptr, mem_idx, deg, row_ptr, nz_ptr, nz_col, nz_val)
    L = mem_ptr.size - 1
    snap = np.zeros(state.size, dtype=np.int64)
    noiseless = nu == 0.0 and upsilon == 0.0

    for l in range(L):
        flags[l] = satisfied(l, state, psi, nu, arr, cache)
    sat_counts[0] = np.sum(flags)
    if sat_counts[0] == L:
        return 0, True

    rounds = 0
    while rounds < T_max:
        rounds += 1
        moved = False
        for l in range(L):
            if satisfied(l, state, psi, nu, arr, cache):
                flags[l] = True
                continue
            lo, hi = mem_ptr[l], mem_ptr[l + 1]
            for k in range(lo, hi):
                snap[k - lo] = state[mem_idx[k]]
            _correct(l, state, psi, phi, nu, upsilon, Q, t_max, arr, cache)
            ok = satisfied(l, state, psi, nu, arr, cache)
            flags[l] = ok
            if ok:
                for k in range(lo, hi):
                    if snap[k - lo] != state[mem_idx[k]]:
                        moved = True
                        break
            else:
                for k in range(lo, hi):
                    if state[mem_idx[k]] != snap[k - lo]:
                        _write(state, mem_idx[k], snap[k - lo], cache)
        sat_counts[rounds] = np.sum(flags)
        if sat_counts[rounds] == L:
            # every cluster passed its check, confirm on the final state
            clean = True
            for l in range(L):
                if not satisfied(l, state, psi, nu, arr, cache):
                    flags[l] = False
                    clean = False
            if clean:
                return rounds, True
        elif noiseless and not moved:
            # deterministic dynamics with no accepted change: stuck for good
            for t in range(rounds + 1, T_max + 1):
                sat_counts[t] = sat_counts[rounds]
            return T_max, False
    return rounds, False


@njit(cache=True)
def audit_fixed_point(state, psi, phi, nu, upsilon, Q, rounds, seed,
                      mem_ptr, mem_idx, deg, row_ptr, nz_ptr, nz_col, nz_val):
    """Force a check plus one correction round on every cluster, ``rounds`` times.

    Sums are recomputed on every pass so the audit never leans on the cache.
    Returns (total constraint firings, total pattern-neuron changes).
    """
    arr, cache = _setup(state, seed, mem_ptr, mem_idx, deg, row_ptr, nz_ptr, nz_col, nz_val)
    dirty = cache[1]
    L = mem_ptr.size - 1
    firings = 0
    changes = 0
    for _ in range(rounds):
        for l in range(L):
            dirty[l] = True
            firings += forward(l, state, psi, nu, arr, cache)
            dirty[l] = True
            f, c = correct_round(l, state, psi, phi, nu, upsilon, Q, arr, cache)
            firings += f
            changes += c
    return firings, changes


@njit(cache=True)
def pci_trials(l, patterns, errors, psi, phi, nu, upsilon, Q, t_max, trials, seed,
               mem_ptr, mem_idx, deg, row_ptr, nz_ptr, nz_col, nz_val):
    """Corrupt ``errors`` random members of cluster ``l`` by +-1 and count full corrections."""
    state = np.zeros(patterns.shape[1], dtype=np.int64)
    arr, cache = _setup(state, seed, mem_ptr, mem_idx, deg, row_ptr, nz_ptr, nz_col, nz_val)
    dirty = cache[1]
    lo, hi = mem_ptr[l], mem_ptr[l + 1]
    size = hi - lo
    slots = np.arange(size)
    wins = 0
    for t in range(trials):
        x = patterns[t % patterns.shape[0]]
        for k in range(lo, hi):
            state[mem_idx[k]] = x[mem_idx[k]]
        dirty[l] = True
        # partial Fisher-Yates picks the corrupted slots
        for a in range(errors):
            b = a + np.random.randint(size - a)
            tmp = slots[a]
            slots[a] = slots[b]
            slots[b] = tmp
            gid = mem_idx[lo + slots[a]]
            s = 1 if np.random.random() < 0.5 else -1
            if state[gid] + s < 0 or state[gid] + s > Q - 1:
                s = -s
            state[gid] += s
        _correct(l, state, psi, phi, nu, upsilon, Q, t_max, arr, cache)
        ok = True
        for k in range(lo, hi):
            if state[mem_idx[k]] != x[mem_idx[k]]:
                ok = False
                break
        if ok:
            wins += 1
    return wins
