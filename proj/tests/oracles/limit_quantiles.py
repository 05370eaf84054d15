"""Independent Monte Carlo oracle for the 95% quantiles frozen in test_limits.cpp.

Single eigenvalue lambda = 1, beta = 0. Run: python3 limit_quantiles.py
"""
import numpy as np

rng = np.random.default_rng(20240917)
R = 20000


def paths(n, horizon, reps):
    return np.cumsum(rng.standard_normal((reps, n)) * np.sqrt(horizon / n), axis=1)


def gamma(n=4096, u0=10 / 11):
    u = u0 * np.arange(1, n + 1) / n
    out = np.empty(R)
    for b in range(0, R, 2000):
        W = paths(n, u0, 2000)
        out[b:b + 2000] = np.abs(W**2 - u).max(axis=1)
    return np.quantile(out, 0.95, method="inverted_cdf")


def gamma_bar(n=256, u0=10 / 11):
    u = u0 * np.arange(1, n + 1) / n
    out = np.zeros(R)
    for b in range(0, R, 2000):
        W = paths(n, u0, 2000)
        best = np.abs(W**2 - u).max(axis=1)
        for i in range(1, n):
            v = u[:i]
            a = (1 - u[i]) / (1 - v)
            g = (W[:, i:i + 1] - a * W[:, :i]) ** 2 - (u[i] - v * a) * (1 - v * a)
            best = np.maximum(best, np.abs(g).max(axis=1))
        out[b:b + 2000] = best
    return np.quantile(out, 0.95, method="inverted_cdf")


def window(n=4096, u0=10 / 11, cw=1.0, bw=0.5):
    u = u0 * np.arange(1, n + 1) / n
    f = u / (1 - u) - cw
    y = np.where(u <= cw / (1 + cw), 0.0, f * (1 - bw) / (1 + f * (1 - bw)))
    iy = np.rint(y / u[0]).astype(int) - 1
    out = np.empty(R)
    for b in range(0, R, 2000):
        W = paths(n, u0, 2000)
        Wy = np.where(iy >= 0, W[:, np.maximum(iy, 0)], 0.0)
        yg = np.where(iy >= 0, u[np.maximum(iy, 0)], 0.0)
        out[b:b + 2000] = np.abs((W - Wy) ** 2 - (u - yg)).max(axis=1)
    return np.quantile(out, 0.95, method="inverted_cdf")


def bridge(n=1000):
    t = np.arange(1, n) / n
    out = np.empty(R)
    for b in range(0, R, 2000):
        W = paths(n, 1.0, 2000)
        B = W[:, :-1] - t * W[:, -1:]
        out[b:b + 2000] = np.abs(B**2 - t * (1 - t)).max(axis=1)
    return np.quantile(out, 0.95, method="inverted_cdf")


if __name__ == "__main__":
    print("gamma     ", gamma())
    print("gamma_bar ", gamma_bar())
    print("window    ", window())
    print("bridge    ", bridge())
