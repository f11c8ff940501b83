"""Exact level-schedule table for L = 0..3 and both methods.

    python3 tests/oracles/schedule_oracle.py > tests/acceptance/schedule_oracle.inc

Every quantity is computed symbolically and rounded to double only when
printed, independent of the C++ floating-point evaluation order.
"""
import sympy as sp

RHO_EXP = sp.Rational(1001, 1000)


def h_bar(method, level):
    if method == "adapted":
        return sp.Rational(1, 4) * sp.Integer(2) ** sp.Rational(-level, 2)
    return sp.Rational(1, 4) * sp.Integer(2) ** (-level)


def schedule(method, L):
    rate = 2 if method == "adapted" else 1
    c_rho = 2 if method == "adapted" else 1
    norm = sum(sp.Integer(k + 1) ** -RHO_EXP for k in range(1, L + 1))
    hL = h_bar(method, L)
    rows = []
    for level in range(L + 1):
        h = h_bar(method, level)
        eps = h**2 if method == "adapted" else h
        if level == 0:
            rho_hat = sp.Integer(0)
            m = hL ** (-2 * rate)
        else:
            rho_hat = sp.Integer(level + 1) ** -RHO_EXP / norm
            m = (h / hL) ** (2 * rate) / (c_rho**2 * rho_hat**2)
        samples = int(sp.ceiling(m))
        rows.append((level, h, eps, rho_hat, samples))
    return rows


def dbl(x):
    return repr(float(sp.N(x, 40)))


if __name__ == "__main__":
    print("// Generated by tests/oracles/schedule_oracle.py; do not edit.")
    print("// {adapted, L, level, h_bar, eps, rho_hat, samples}")
    for method in ("adapted", "nonadapted"):
        for L in range(4):
            for level, h, eps, rho_hat, samples in schedule(method, L):
                flag = "true" if method == "adapted" else "false"
                print(f"{{{flag}, {L}, {level}, {dbl(h)}, {dbl(eps)}, {dbl(rho_hat)}, {samples}}},")
