# Copyright 2026 The xgblora-desk Authors
# SPDX-License-Identifier: Apache-2.0
"""Independent numpy oracles. Output is pasted into the C++ tests as frozen
constants; rerun after changing any of the inputs below."""

import math

import numpy as np

M64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
    return z ^ (z >> 31)


class SplitMix:
    def __init__(self, s):
        self.s = s & M64

    def next(self):
        self.s = (self.s + GOLDEN) & M64
        return mix64(self.s)

    def uniform(self):
        return (self.next() >> 11) * 2.0**-53

    def gaussian(self):
        u1 = 1.0 - self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def split(self, key):
        return SplitMix(mix64(self.s ^ mix64(((key + 1) * GOLDEN) & M64)))


def rng_vectors():
    print("// SplitMix64")
    for seed in (0, 42):
        r = SplitMix(seed)
        print(f"seed {seed}:", ", ".join(f"0x{r.next():016X}ULL" for _ in range(4)))
    r = SplitMix(7)
    print("uniform seed 7:", ", ".join(repr(r.uniform()) for _ in range(3)))
    r = SplitMix(7)
    print("gaussian seed 7:", ", ".join(repr(r.gaussian()) for _ in range(3)))
    c = SplitMix(123).split(5)
    print("split(123, 5) first:", f"0x{c.next():016X}ULL")


def gelu(x):
    return 0.5 * x * (1.0 + np.tanh(math.sqrt(2.0 / math.pi) * (x + 0.044715 * x**3)))


X = np.array([[0.5, -1.0, 2.0], [1.5, 0.25, -0.75]])


def kernels():
    print("// kernels on X =", X.tolist())
    print("gelu:", gelu(X).ravel().tolist())
    e = np.exp(X - X.max(axis=1, keepdims=True))
    sm = e / e.sum(axis=1, keepdims=True)
    print("softmax:", sm.ravel().tolist())
    mu = X.mean(axis=1, keepdims=True)
    var = ((X - mu) ** 2).mean(axis=1, keepdims=True)
    print("layernorm:", ((X - mu) / np.sqrt(var + 1e-5)).ravel().tolist())
    t = [2, 0]
    lse = np.log(np.exp(X).sum(axis=1))
    print("cross_entropy:", float(np.mean(lse - X[np.arange(2), t])))
    y = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, -1.0]])
    print("mse:", float(np.mean(0.5 * ((X - y) ** 2).sum(axis=1))))


def mlp():
    # Y = relu? no: layer 1 linear, hidden gelu, output identity
    W1 = np.array([[0.2, -0.1, 0.4], [0.3, 0.5, -0.2]])
    W2 = np.array([[1.0, -0.5], [0.25, 0.75]])
    W3 = np.array([[0.6, -0.3]])
    h1 = X @ W1.T
    h2 = gelu(h1 @ W2.T)
    out = h2 @ W3.T
    print("// mlp [3,2,2,1] gelu, identity output")
    print("mlp out:", out.ravel().tolist())


def merge():
    W = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    A = np.array([[0.5], [-1.0]])
    B = np.array([[2.0, 0.0, -1.0]])
    print("// merge W + 0.5 A B")
    print("merged:", (W + 0.5 * A @ B).ravel().tolist())


def classic_gb_first_round():
    x = np.linspace(-2, 2, 9)
    y = 2 * x + 1 + 0.3 * np.sin(3 * x)
    F = np.zeros_like(y)
    r = y - F
    Xd = np.stack([np.ones_like(x), x], axis=1)
    coef, *_ = np.linalg.lstsq(Xd, r, rcond=None)
    f = Xd @ coef
    a = float(r @ f / (f @ f))
    F = F + a * f
    print("// classic GB linear learner, one round on 9-point grid")
    print("mse0:", float(np.mean(y**2)), "mse1:", float(np.mean((y - F) ** 2)), "alpha:", a)


def cost():
    L, K, a, b, R = 32, 1000, 1.0, 0.0, 8
    l, T = L / 3, 10
    print("// cost table")
    print("lora:", L * a * K + b)
    print("xgblora fullrank:", l * a * (K / T) * T + b)
    print("xgblora r=1:", l * a * (1 / R) * (K / T) * T + b)


if __name__ == "__main__":
    rng_vectors()
    kernels()
    mlp()
    merge()
    classic_gb_first_round()
    cost()
