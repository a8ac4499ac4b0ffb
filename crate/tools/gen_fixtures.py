"""Golden fixtures for the core crate, computed in 60-digit arithmetic.

Run from the repository root:  python3 tools/gen_fixtures.py
"""
import json
import random

import mpmath as mp

mp.mp.dps = 60
OUT = "crates/core/tests/fixtures"


def fixture(m, weight=1.0, rates=(1.0,)):
    n = m.rows
    return {
        "rates": list(rates),
        "first": 0,
        "n": n,
        "weight": weight,
        "entries": [[float(mp.re(m[i, j])), float(mp.im(m[i, j]))] for i in range(n) for j in range(n)],
    }


def from_fixture(fx):
    n = fx["n"]
    m = mp.matrix(n, n)
    for k, (re, im) in enumerate(fx["entries"]):
        m[k // n, k % n] = mp.mpc(re, im)
    return m


def random_matrix(rng, n, scale):
    m = mp.matrix(n, n)
    for i in range(n):
        for j in range(n):
            m[i, j] = mp.mpc(rng.uniform(-1, 1), rng.uniform(-1, 1)) * scale
    return m


def toeplitz(coeffs, n):
    m = mp.matrix(n, n)
    for i in range(n):
        for j in range(n):
            m[i, j] = coeffs.get(i - j, 0)
    return m


def main():
    rng = random.Random(20240611)
    exp_cases = []
    for name, n, scale in [("random3", 3, 0.4), ("random5", 5, 0.3), ("random8_big", 8, 1.5), ("random4_large", 4, 4.0)]:
        a = random_matrix(rng, n, scale)
        fx = fixture(a)
        exp_cases.append({"name": name, "input": fx, "exp": fixture(mp.expm(from_fixture(fx)))})
    t = toeplitz({1: mp.mpf(1), -1: mp.mpf(1), 0: mp.mpc(0, 0.5)}, 6)
    exp_cases.append({"name": "toeplitz6", "input": fixture(t), "exp": fixture(mp.expm(t))})

    det_cases = []
    for name, n, scale in [("random4", 4, 1.0), ("random7", 7, 0.8), ("random12", 12, 0.5)]:
        a = random_matrix(rng, n, scale)
        fx = fixture(a)
        det_cases.append({"name": name, "input": fx, "log_abs_det": float(mp.log(abs(mp.det(from_fixture(fx)))))})

    # leading N-corner of e^{T} e^{W} e^{-T} e^{-W} on a 2N window, shift pair
    section = []
    for n in [2, 4, 8, 16, 32]:
        m = 2 * n
        s = toeplitz({1: mp.mpf(1)}, m)
        st = toeplitz({-1: mp.mpf(1)}, m)
        q = mp.expm(s) * mp.expm(st) * mp.expm(-s) * mp.expm(-st)
        corner = mp.matrix(n, n)
        for i in range(n):
            for j in range(n):
                corner[i, j] = q[i, j]
        d = abs(mp.det(corner))
        section.append({"n": n, "padding": n, "d": float(d), "d_minus_einv": mp.nstr(d - mp.e ** -1, 20)})
        print("section", n, mp.nstr(d - mp.e ** -1, 10))

    with open(f"{OUT}/exp.json", "w") as f:
        json.dump(exp_cases, f, indent=1)
    with open(f"{OUT}/log_abs_det.json", "w") as f:
        json.dump(det_cases, f, indent=1)
    with open(f"{OUT}/shift_pair_sections.json", "w") as f:
        json.dump(section, f, indent=1)


if __name__ == "__main__":
    main()
