"""Compare the compiled kernels with the pure-Python fallback.

Workloads mirror real use: a full warm-started lambda path on the Gram
matrix of a Lorenz degree-3 dictionary, and a 200-step cubic forecast.

    python benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import time

import numpy as np

from latentode import _fallback
from latentode.dictionary import build_features, enumerate_monomials, exponent_matrix
from latentode.differentiation import differentiate
from latentode.dynamics import integrate, make_system
from latentode.lasso import LassoConfig, lambda_path, standardize

try:
    from latentode import _ckernels
except ImportError:
    _ckernels = None


def lasso_workload():
    ts = integrate(make_system("lorenz"), [1.0, 1.0, 1.0], 0.01, 4999)
    stacks = {c: differentiate(ts.channel(c), 0.01, 1) for c in "xyz"}
    F = build_features(stacks, 1, 3, target="y")
    X_std, _, _ = standardize(F.X)
    keep = np.any(X_std != 0, axis=0)
    X_std = X_std[:, keep]
    y = F.y - F.y.mean()
    y = y / y.std()
    n = X_std.shape[0]
    gram = np.ascontiguousarray(X_std.T @ X_std / n)
    xty = np.ascontiguousarray(X_std.T @ y / n)
    return gram, xty, lambda_path(X_std, y, LassoConfig())


def run_path(impl, gram, xty, path, cfg):
    c = np.zeros(len(xty))
    sweeps = 0
    for lam in path:
        s, _ = impl.cd_gram(gram, xty, float(lam), c, cfg.max_iter, cfg.tol)
        sweeps += s
    return c, sweeps


def forecast_workload():
    ms = enumerate_monomials(3, 3)
    expo = exponent_matrix(ms)
    rng = np.random.default_rng(0)
    coefs = np.ascontiguousarray(0.05 * rng.standard_normal((1, len(ms))))
    coefs[0, 1] = -1.0
    return expo, coefs, np.zeros(1), np.array([0.5, 0.0, -0.2])


def timed(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    impls = [("python", _fallback)]
    if _ckernels is not None:
        impls.insert(0, ("cython", _ckernels))
    else:
        print("compiled extension not built; timing the fallback only")

    cfg = LassoConfig()
    gram, xty, path = lasso_workload()
    expo, coefs, icpt, x0 = forecast_workload()
    print(f"lasso path: {len(xty)} columns, {len(path)} lambdas; "
          f"forecast: {expo.shape[0]} monomials, 200 steps")
    print(f"{'backend':<8}  {'lasso path (s)':>15}  {'sweeps':>7}  {'forecast (s)':>13}")

    results = {}
    for name, impl in impls:
        t_cd, (c, sweeps) = timed(lambda: run_path(impl, gram, xty, path, cfg), args.repeat)

        def fc():
            out = np.zeros((200, 1))
            impl.rk4_poly(expo, coefs, icpt, 3, x0, 0.01, 200, out)
            return out

        t_rk, out = timed(fc, args.repeat)
        results[name] = (t_cd, t_rk, c, out)
        print(f"{name:<8}  {t_cd:>15.4f}  {sweeps:>7}  {t_rk:>13.5f}")

    if len(results) == 2:
        (cd_c, rk_c, c1, o1), (cd_p, rk_p, c2, o2) = results["cython"], results["python"]
        same = np.array_equal(c1, c2) and np.array_equal(o1, o2)
        print(f"speedup: lasso path x{cd_p / cd_c:.0f}, forecast x{rk_p / rk_c:.0f}; "
              f"outputs identical: {same}")


if __name__ == "__main__":
    main()
