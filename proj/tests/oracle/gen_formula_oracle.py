#!/usr/bin/env python3
"""Recomputes every closed-form noise-scale and tuning formula with mpmath at
40 significant digits and freezes the expected values into
tests/data/formula_oracle.csv.  The C++ acceptance suite replays the rows and
compares at relative tolerance 1e-12.

Run from the repository root:  python3 tests/oracle/gen_formula_oracle.py
"""

import csv
import itertools
import os

import mpmath as mp

mp.mp.dps = 40


def sigma_gdp(eps, T, gamma, tau, n):
    return 2 * gamma * tau / (n * eps) * mp.sqrt(T)


def sigma_std(eps, delta, T, gamma, tau, n):
    return 2 * gamma * tau / (n * eps) * T * mp.sqrt(2 * mp.log(mp.mpf("1.25") * T / delta))


def sigma_adv(eps, delta, T, gamma, tau, n):
    return (2 * gamma * tau / (n * eps)
            * mp.sqrt(5 * T * mp.log(2 / delta) * mp.log(5 * T / (2 * delta))))


def sigma_min(eps, delta, T, gamma, tau, n):
    std = sigma_std(eps, delta, T, gamma, tau, n)
    if eps <= 1 and delta <= mp.mpf("0.01"):
        return min(std, sigma_adv(eps, delta, T, gamma, tau, n))
    return std


def ht_scale(eps, delta, s, lam):
    return 2 * lam * mp.sqrt(5 * s * mp.log(1 / delta)) / eps


def varsigma1_dp(eps, delta, gamma1, n):
    return 2 * gamma1 ** 2 * mp.sqrt(2 * mp.log(mp.mpf("1.25") / delta)) / (n * eps)


def varsigma1_gdp(eps, gamma1, n):
    return 2 * gamma1 ** 2 / (n * eps)


def ridge_sigma_dp(n, p, tau0, eps, delta):
    B = mp.sqrt(1 + mp.mpf(p) / 36)
    return 8 * B * tau0 * mp.sqrt(2 * mp.log(mp.mpf("1.25") / delta)) / (3 * n * eps * mp.mpf("0.2"))


def ridge_sigma_gdp(n, p, tau0, eps):
    B = mp.sqrt(1 + mp.mpf(p) / 36)
    return 2 * mp.sqrt(2) * B * tau0 / (n * eps * mp.mpf("0.2"))


def rows():
    out = []

    for eps, T, gamma, tau, n in [
        (1, 4, 1, 1, 1000), (0.5, 19, 2.1, 0.87, 10000), (0.9, 16, 2.0, 0.43, 2500),
        (0.3, 19, 2.2, 1.5, 5000), (2.0, 7, 0.5, 3.0, 750), (1.0, 1, 1.0, 1.0, 10),
    ]:
        out.append(("gd_gdp", sigma_gdp(mp.mpf(eps), T, mp.mpf(gamma), mp.mpf(tau), n),
                    [eps, T, gamma, tau, n]))

    for eps, delta, T, gamma, tau, n in [
        (1, 0.05, 1, 1, 1, 1000), (1, 0.01, 100, 1, 1, 10000), (0.75, 3.3e-4, 19, 2.19, 5.2, 10000),
        (0.25, 1.5e-3, 16, 2.11, 0.43, 2500), (0.417, 2.0e-4, 19, 2.15, 0.89, 10000),
        (1.0, 0.009, 2, 1.0, 1.0, 100), (0.1, 0.011, 19, 3.0, 2.0, 2000),
        (1.5, 0.001, 19, 1.0, 1.0, 5000), (0.05, 1e-6, 25, 4.0, 10.0, 100000),
    ]:
        args = [mp.mpf(eps), mp.mpf(delta), T, mp.mpf(gamma), mp.mpf(tau), n]
        out.append(("gd_min", sigma_min(*args), [eps, delta, T, gamma, tau, n]))

    for eps, delta, s, lam in [
        (1, mp.exp(-1), 5, 1), (2, mp.exp(-1), 5, 1), (0.5, 0.01, 10, 0.003),
        (0.0088, 1.05e-5, 12, 3.7e-6), (0.25, 0.005, 24, 1e-4), (1.0, 0.5, 1, 2.0),
    ]:
        out.append(("ht_scale", ht_scale(mp.mpf(eps), mp.mpf(delta), s, mp.mpf(lam)),
                    [eps, float(delta), s, lam]))

    for eps, delta, gamma1, n in [
        (0.0833, 6.6e-5, 1.885, 10000), (0.5, 0.001, 2.0, 5000), (0.05, 1e-5, 3.3, 100000),
        (1.0, 0.1, 1.0, 100),
    ]:
        out.append(("varsigma1_dp", varsigma1_dp(mp.mpf(eps), mp.mpf(delta), mp.mpf(gamma1), n),
                    [eps, delta, gamma1, n]))
        for tau1 in (0.5, 39.84):
            out.append(("varsigma2_dp",
                        varsigma1_dp(mp.mpf(eps), mp.mpf(delta), mp.mpf(gamma1), n) * mp.mpf(tau1) ** 2,
                        [eps, delta, gamma1, tau1, n]))

    for eps, gamma1, n in [(0.0833, 1.885, 10000), (1.0, 1.0, 100), (0.2, 2.5, 40000)]:
        out.append(("varsigma1_gdp", varsigma1_gdp(mp.mpf(eps), mp.mpf(gamma1), n), [eps, gamma1, n]))
        out.append(("varsigma2_gdp", varsigma1_gdp(mp.mpf(eps), mp.mpf(gamma1), n) * mp.mpf("2.25"),
                    [eps, gamma1, 1.5, n]))

    for n, p, tau0, eps, delta in [
        (10000, 35, 2, 0.1, 0.001), (2500, 10, 1.658, 0.05, 3.05e-4), (500, 5, 2.0, 0.5, 0.01),
        (10000, 13, 3.3, 0.1667, 1e-4),
    ]:
        out.append(("ridge_sigma_dp", ridge_sigma_dp(n, p, mp.mpf(tau0), mp.mpf(eps), mp.mpf(delta)),
                    [n, p, tau0, eps, delta]))
    for n, p, tau0, eps in [(10000, 10, 1.0, 0.318), (500, 3, 2.0, 1.0)]:
        out.append(("ridge_sigma_gdp", ridge_sigma_gdp(n, p, mp.mpf(tau0), mp.mpf(eps)),
                    [n, p, tau0, eps]))

    for n, p in [(10000, 10000), (10000, 5000), (5000, 200), (100, 50)]:
        out.append(("delta_sens", 2 * mp.sqrt(mp.log(mp.mpf(p) * n)) / n, [n, p]))

    for n, eps in [(1000, 0.1), (10000, 0.15), (2500, 0.05)]:
        logn = mp.log(n)
        ne = n * mp.mpf(eps)
        out.append(("tau0_scale1_dp", 16 * logn / ne, [n, eps]))
        out.append(("tau0_scale2_dp", 8 * logn ** 2 / ne, [n, eps]))
        out.append(("tau0_scale1_gdp", 4 * logn / ne, [n, eps]))
        out.append(("tau0_scale2_gdp", 2 * logn ** 2 / ne, [n, eps]))

    for n, p, eps, tau0 in [
        (10000, 10, 0.9, 1.0), (2500, 10, 0.3, 1.658), (10000, 5, 0.5, 2.236), (5000, 20, 0.5, 1.0),
    ]:
        pl = p + mp.log(n)
        out.append(("lowdim_tau", mp.mpf("0.04") * tau0 * mp.sqrt(n * mp.mpf(eps) / pl),
                    [n, p, eps, tau0]))
        out.append(("lowdim_gamma", mp.mpf("0.5") * mp.sqrt(pl), [n, p]))
        out.append(("iterations", mp.ceil(2 * mp.log(n)), [n]))
        out.append(("infer_tau1", mp.mpf("0.95") * tau0 * mp.sqrt(n * mp.mpf(eps) / pl),
                    [n, p, eps, tau0]))

    for n, p, s, eps, tau0 in [
        (10000, 10000, 12, 0.5, 1.0), (10000, 5000, 12, 0.5, 3.3), (200, 50, 6, 1.0, 2.0),
    ]:
        denom = s * mp.log(p) + mp.log(n)
        out.append(("highdim_tau", mp.mpf("0.04") * tau0 * mp.sqrt(n * mp.mpf(eps) / denom),
                    [n, p, s, eps, tau0]))
        out.append(("highdim_gamma", mp.mpf("0.5") * mp.sqrt(mp.log(mp.mpf(p) * n)), [n, p]))

    for s_star in (5, 10, 3, 17):
        out.append(("working_sparsity", mp.ceil(mp.mpf("1.2") * s_star), [s_star]))

    for n, p, sigma0 in [(10000, 10, 2.0), (500, 5, 1.3)]:
        out.append(("nonpriv_tau_low", mp.mpf("0.2") * sigma0 * mp.sqrt(n / (p + mp.log(n))),
                    [n, p, sigma0]))
    for n, p, s, sigma0 in [(10000, 5000, 12, 3.3), (200, 50, 6, 1.1)]:
        out.append(("nonpriv_tau_high",
                    mp.mpf("0.1") * sigma0 * mp.sqrt(n / (s * mp.log(p) + mp.log(n))),
                    [n, p, s, sigma0]))

    for n in (2500, 5000, 10000, 123456):
        out.append(("default_delta", 10 * mp.power(n, mp.mpf("-1.1")), [n]))

    for eps, delta, T in [(0.1667, 2e-4, 19), (1.0, 0.01, 100), (0.5, 0.001, 16)]:
        out.append(("adv_eps_iter", mp.mpf(eps) * mp.sqrt(2 / (5 * T * mp.log(2 / mp.mpf(delta)))),
                    [eps, delta, T]))

    return out


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    path = os.path.normpath(os.path.join(here, "..", "data", "formula_oracle.csv"))
    table = rows()
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["name", "expected", "args"])
        for name, value, args in table:
            w.writerow([name, mp.nstr(value, 20), ";".join(repr(a) for a in args)])
    print(f"wrote {len(table)} rows to {path}")


if __name__ == "__main__":
    main()
