#!/usr/bin/env python3
"""Reference values for the closed-form privacy bounds at 40 significant digits.

Run: python3 tools/closed_form_oracle.py
The Rust test suites embed the printed values as constants.
"""
from mpmath import mp, mpf, sqrt, log, exp, pi, floor

mp.dps = 40


def eps1(d, n, var):
    return d * sqrt(log(n) / (n * var))


def delta1(eps, n, var, sum_abs3):
    return mpf("1.12") * sum_abs3 / (n * var) ** mpf("1.5") * (1 + exp(eps)) + 4 / (5 * sqrt(n))


def c(eps):
    return 2 * (1 + exp(eps)) * (2 / pi) ** mpf("0.25")


def uncompromised(n, gamma):
    return n - int(floor(gamma * n))


def eps2(d, n, gamma, sigma2_gamma):
    return d * sqrt(log(uncompromised(n, gamma)) / sigma2_gamma)


def delta2(eps, n, gamma, d, s2, m3, m4):
    u = uncompromised(n, gamma)
    inner = d**2 / s2 ** mpf("1.5") * m3 + d ** mpf("1.5") * sqrt(26) / (s2 * sqrt(pi)) * sqrt(m4)
    return c(eps) * sqrt(inner) + 4 / (5 * sqrt(u))


def main():
    n = 10_000
    # Uniform[0, 1]: variance 1/12, E|U - 1/2|^3 = 1/32, E(U - 1/2)^4 = 1/80.
    var_u, a3_u, c4_u = mpf(1) / 12, mpf(1) / 32, mpf(1) / 80
    e_u = eps1(1, n, var_u)
    rows = [
        ("epsilon_theorem1 unit variance", eps1(1, n, 1)),
        ("epsilon_theorem1 uniform", e_u),
        ("delta_theorem1 uniform", delta1(e_u, n, var_u, n * a3_u)),
        ("epsilon_theorem2 gamma=0.19 unit variance", eps2(1, n, mpf("0.19"), uncompromised(n, mpf("0.19")))),
        ("delta_theorem2 uniform gamma=0", delta2(e_u, n, 0, 1, n * var_u, n * a3_u, n * c4_u)),
        ("c(0)", c(0)),
        ("ln(0.94/0.05)", log(mpf("0.94") / mpf("0.05"))),
    ]
    for name, value in rows:
        print(f"{name:45s} {mp.nstr(value, 25)}")


if __name__ == "__main__":
    main()
