"""Pure-Python versions of the compiled kernels in ``_ckernels.pyx``.

Same signatures, same operation order, so results agree with the compiled
path to rounding. Used when the extension is not built or when
``LATENTODE_PURE=1`` is set.
"""

import math


def _soft(z, lam):
    if z > lam:
        return z - lam
    if z < -lam:
        return z + lam
    return 0.0


def cd_gram(gram, xty, lam, coef, max_iter, tol):
    """Cyclic coordinate descent on 0.5*c'Gc - b'c + lam*|c|_1, in place.

    Returns ``(n_sweeps, converged)``.
    """
    p = gram.shape[0]
    G = gram.tolist()
    b = xty.tolist()
    c = coef.tolist()
    q = [0.0] * p
    for j in range(p):
        if c[j] != 0.0:
            for i in range(p):
                q[i] += G[i][j] * c[j]

    sweep = 0
    converged = False
    while sweep < max_iter:
        sweep += 1
        max_delta = 0.0
        max_coef = 0.0
        for j in range(p):
            gjj = G[j][j]
            if gjj <= 0.0:
                continue
            old = c[j]
            g = b[j] - q[j] + gjj * old
            new = _soft(g, lam) / gjj
            delta = new - old
            if delta != 0.0:
                c[j] = new
                col = G[j]  # symmetric
                for i in range(p):
                    q[i] += col[i] * delta
                if abs(delta) > max_delta:
                    max_delta = abs(delta)
            if abs(new) > max_coef:
                max_coef = abs(new)
        if max_delta < tol * (max_coef if max_coef > 1.0 else 1.0):
            converged = True
            for j in range(p):
                if G[j][j] <= 0.0:
                    continue
                g = b[j] - q[j]
                if c[j] == 0.0:
                    bad = abs(g) > lam + tol
                elif c[j] > 0.0:
                    bad = abs(g - lam) > tol
                else:
                    bad = abs(g + lam) > tol
                if bad:
                    converged = False
                    break
            if converged:
                break
    coef[:] = c
    return sweep, converged


def _poly_rhs(s, expo, coefs, icpt, order):
    mono = []
    for row in expo:
        v = 1.0
        for k, e in enumerate(row):
            for _ in range(e):
                v *= s[k]
        mono.append(v)
    out = [0.0] * len(s)
    for h, (crow, c0) in enumerate(zip(coefs, icpt)):
        base = h * order
        for k in range(order - 1):
            out[base + k] = s[base + k + 1]
        acc = c0
        for ci, mi in zip(crow, mono):
            acc += ci * mi
        out[base + order - 1] = acc
    return out


def rk4_poly(expo, coefs, icpt, order, x0, dt, n_steps, out):
    """Integrate the companion system, writing channel values per step.

    ``out[k, h]`` receives channel ``h`` after ``k + 1`` steps. Returns the
    number of finite steps written (``n_steps`` when nothing diverged).
    """
    E = expo.tolist()
    C = coefs.tolist()
    c0 = icpt.tolist()
    s = [float(v) for v in x0]
    m = len(s)
    n_eq = len(C)
    half = 0.5 * dt
    sixth = dt / 6.0
    for step in range(n_steps):
        k1 = _poly_rhs(s, E, C, c0, order)
        k2 = _poly_rhs([s[i] + half * k1[i] for i in range(m)], E, C, c0, order)
        k3 = _poly_rhs([s[i] + half * k2[i] for i in range(m)], E, C, c0, order)
        k4 = _poly_rhs([s[i] + dt * k3[i] for i in range(m)], E, C, c0, order)
        s = [s[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
             for i in range(m)]
        if not all(math.isfinite(v) for v in s):
            return step
        for h in range(n_eq):
            out[step, h] = s[h * order]
    return n_steps

