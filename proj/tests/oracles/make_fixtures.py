# SPDX-License-Identifier: Apache-2.0
#
# Offline oracle runs for the solver-equivalence tests. Solves the same
# problem instances with a generic convex solver (cvxpy/CLARABEL, SCS as
# fallback) and freezes instances plus optimal objectives into JSON fixtures
# consumed by the C++ tests. Run from the repository root:
#
#   python3 tests/oracles/make_fixtures.py
#
# The fixtures are committed; this script only needs to run again if the
# instance definitions change.

import json
import math
import pathlib

import numpy as np
import cvxpy as cp

OUT = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def lambda_for(n, snr):
    return (1 + 1 / math.log(n)) / math.sqrt(snr) * math.sqrt(
        n * math.log(n) + n * math.log(4 * math.pi * math.log(n)))


def atom(n, fs, tau, theta):
    idx = np.arange(n) - (n - 1) // 2
    return np.exp(-1j * (2 * np.pi * idx * fs * tau - theta))


def solve_ast_sdp(y, lam):
    """minimize 0.5||x-y||^2 + lam/2 (t + u1) s.t. [[T(u), x],[x^H, t]] >= 0."""
    n = y.size
    x = cp.Variable(n, complex=True)
    u_re = cp.Variable(n)
    u_im = cp.Variable(n - 1)
    t = cp.Variable(nonneg=True)

    rows = []
    for a in range(n):
        row = []
        for b in range(n):
            d = a - b
            if d == 0:
                row.append(cp.reshape(u_re[0], (1, 1)) + 0j)
            elif d > 0:
                row.append(cp.reshape(u_re[d] + 1j * u_im[d - 1], (1, 1)))
            else:
                row.append(cp.reshape(u_re[-d] - 1j * u_im[-d - 1], (1, 1)))
        rows.append(row + [cp.reshape(x[a], (1, 1))])
    rows.append([cp.reshape(cp.conj(x[b]), (1, 1)) for b in range(n)] +
                [cp.reshape(t, (1, 1)) + 0j])
    block = cp.bmat(rows)

    objective = 0.5 * cp.sum_squares(x - y) + lam / 2 * (t + u_re[0])
    prob = cp.Problem(cp.Minimize(objective), [block >> 0])
    try:
        prob.solve(solver=cp.CLARABEL)
    except (cp.SolverError, Exception):
        prob.solve(solver=cp.SCS, eps=1e-10, max_iters=200000)
    assert prob.status in ("optimal", "optimal_inaccurate"), prob.status
    return float(prob.value)


def make_ast_fixture():
    rng = np.random.default_rng(20260810)
    fs = 312.5e3
    instances = []
    sizes = [5, 7, 9, 11, 13, 15, 17]
    snrs = [25.0, 100.0, 400.0]
    for i in range(20):
        n = sizes[i % len(sizes)]
        snr = snrs[i % len(snrs)]
        k = 1 + int(rng.integers(0, 2))
        y = np.zeros(n, dtype=complex)
        for _ in range(k):
            tau = rng.uniform(0, 1 / fs)
            theta = rng.uniform(0, 2 * np.pi)
            amp = rng.uniform(0.3, 1.5)
            y += amp * atom(n, fs, tau, theta)
        y += (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * math.sqrt(
            1 / snr / 2)
        lam = lambda_for(n, snr)
        obj = solve_ast_sdp(y, lam)
        instances.append({
            "n": n,
            "lambda": lam,
            "y_re": y.real.tolist(),
            "y_im": y.imag.tolist(),
            "objective": obj,
        })
        print(f"ast {i}: n={n} lambda={lam:.6f} obj={obj:.12g}")
    (OUT / "an_denoise_oracle.json").write_text(json.dumps(instances, indent=1))


def solve_bpdn(q, f, eps):
    g = f.shape[1]
    x = cp.Variable(g, complex=True)
    prob = cp.Problem(cp.Minimize(cp.norm1(x)), [cp.norm2(q - f @ x) <= eps])
    try:
        prob.solve(solver=cp.CLARABEL)
    except (cp.SolverError, Exception):
        prob.solve(solver=cp.SCS, eps=1e-10, max_iters=200000)
    assert prob.status in ("optimal", "optimal_inaccurate"), prob.status
    return float(prob.value)


def make_bpdn_fixture():
    rng = np.random.default_rng(31337)
    fs = 312.5e3
    m, gp = 8, 32
    # Carrier geometry mirrors an 8-band plan near 2 GHz.
    width = 64 * fs
    offsets = [0, 1, 3, 7, 12, 20, 30, 43]
    carriers = [2.01e9 + k * width + offsets[k] * fs / 2 for k in range(m)]
    fmat = np.exp(
        -2j * np.pi * np.outer(carriers, np.arange(gp) / gp / fs)) / math.sqrt(m)

    instances = []
    for i in range(20):
        k = 1 + int(rng.integers(0, 3))
        x_true = np.zeros(gp, dtype=complex)
        support = rng.choice(gp, size=k, replace=False)
        x_true[support] = (rng.standard_normal(k) + 1j * rng.standard_normal(k))
        q = fmat @ x_true
        noise = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) * 0.05
        if i % 4 == 0:
            noise *= 0.0  # a few exactly-consistent instances
        q = q + noise
        eps = float(np.linalg.norm(noise))
        obj = solve_bpdn(q, fmat, eps)
        instances.append({
            "m": m,
            "g_prime": gp,
            "f_s": fs,
            "carriers": carriers,
            "q_re": q.real.tolist(),
            "q_im": q.imag.tolist(),
            "eps": eps,
            "objective": obj,
        })
        print(f"bpdn {i}: k={k} eps={eps:.6g} obj={obj:.12g}")
    (OUT / "bpdn_oracle.json").write_text(json.dumps(instances, indent=1))


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    make_ast_fixture()
    make_bpdn_fixture()
