"""Independent reference values for the lower-bound instances.

Evaluates the two-cluster and circle constructions directly with numpy and
math.fsum. The C++ tests freeze the numbers printed here.
"""
import math

import numpy as np


def softplus(z):
    return np.logaddexp(0.0, z)


def hinge(z):
    return np.maximum(0.0, 1.0 + z)


def two_cluster(n, kappa, gamma, loss):
    lam = n ** kappa
    count_b = round(lam * n ** (gamma / 2))
    count_a = n - count_b
    beta = n ** (gamma / 4)
    f = softplus if loss == "logistic" else hinge
    la = float(f(np.float64(-beta)))
    lb = float(f(np.float64(beta)))
    reg = lam * beta * beta
    full = count_a * la + count_b * lb + reg
    # C inside A with u = n/c: total weight n, every sampled point sits at +1.
    core = n * la + reg
    return abs(full - core) / full, count_a, count_b, beta


def circle(n, kappa, gamma, k, loss):
    lam = n ** kappa
    cs = sorted({(j * n) // k for j in range(k)})
    win = n // (2 * k)
    length = n // (4 * k)
    members = np.zeros(n, dtype=bool)
    members[cs] = True
    start_w = None
    for s in range(n):
        idx = (np.arange(s, s + win)) % n
        if not members[idx].any():
            start_w = s
            break
    start = (start_w + (win - length) // 2) % n
    m = 2 * math.pi * (start + (length - 1) / 2) / n
    phi = math.pi * (length + 1) / n
    norm = math.sqrt(n ** (1 - gamma) / (k * lam))
    scale = norm / math.sqrt(1 + math.cos(phi) ** 2)
    theta = 2 * math.pi * np.arange(n, dtype=np.float64) / n
    margin = scale * (math.cos(phi) - np.cos(theta - m))
    f = softplus if loss == "logistic" else hinge
    losses = f(-margin)
    sum_x = math.fsum(losses)
    u = n / k
    sum_c = math.fsum(u * losses[i] for i in cs)
    reg = 2 * lam * norm * norm
    full = sum_x + reg
    core = sum_c + (u * len(cs) / n) * reg
    h = abs(full - core) / full
    r1 = lam * norm * norm / sum_x
    r2 = sum_c / sum_x
    return h, r1, r2, start, length, norm


if __name__ == "__main__":
    for loss in ("logistic", "hinge"):
        for n in (10**4, 10**5, 10**6, 10**7):
            print("two_cluster", loss, n, "%.17g count_a=%d count_b=%d beta=%.17g" % two_cluster(n, 0.5, 0.4, loss))
    for loss in ("logistic", "hinge"):
        for n in (10**5, 10**6, 10**7):
            h, r1, r2, start, length, norm = circle(n, 0.1, 0.2, 4, loss)
            print("circle", loss, n, "H=%.17g r1=%.17g r2=%.17g start=%d len=%d norm=%.17g" % (h, r1, r2, start, length, norm))
