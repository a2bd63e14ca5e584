"""Plain-Python recall used as an oracle for the compiled kernels."""

import numpy as np

from noisymem.recall import constraint_update, pattern_update


def forward(W, x, psi, nu, rng):
    return [constraint_update(float(W[i] @ x) + (rng.uniform(-nu, nu) if nu else 0.0), psi)
            for i in range(W.shape[0])]


def correct(W, x, psi, phi, nu, upsilon, Q, t_max, rng):
    x = x.copy()
    sign = np.sign(W)
    deg = np.count_nonzero(W, axis=0)
    for _ in range(t_max):
        y = np.array(forward(W, x, psi, nu, rng))
        g = (sign.T @ y) / deg
        if upsilon:
            g = g + rng.uniform(-upsilon, upsilon, size=g.size)
        x = np.array([pattern_update(int(a), float(b), phi, Q) for a, b in zip(x, g)])
    return x


def peel(model, state, psi, phi, nu, upsilon, t_max, T_max, rng, on_cluster=None):
    """Round-robin correction with reversion; returns (state, success).

    ``on_cluster(l, before, after, ok)`` sees each processed cluster.
    """
    x = state.copy()

    def ok(c):
        return not any(forward(c.W, x[c.member_ids], psi, nu, rng))

    for _ in range(T_max):
        for l, c in enumerate(model.clusters):
            if ok(c):
                continue
            before = x[c.member_ids].copy()
            x[c.member_ids] = correct(c.W, before, psi, phi, nu, upsilon, model.Q, t_max, rng)
            good = ok(c)
            if not good:
                x[c.member_ids] = before
            if on_cluster is not None:
                on_cluster(l, before, x[c.member_ids].copy(), good)
        if all(ok(c) for c in model.clusters):
            return x, True
    return x, False
