#!/usr/bin/env python3
"""Reference values for the Gaussian rate constraints, 50-digit arithmetic.

Written directly from the closed-form constraint expressions, independently of the
Rust evaluators. Regenerate with `python3 fidelity.py > fidelity.json`.
"""
import json

from mpmath import mp, mpf, log

mp.dps = 50

CASES = [
    ("A", (1, 1, 1), 100,
     dict(P21b=1),
     dict(r21=1)),
    ("B", (2, 1.5, 0.7), 50,
     dict(P21b=4, P31b=3, P32b=2, P23c=3, P31c=2.5, P32c=1.5, P21c=2,
          P12u=5, P13u=3, P21u=4, P23u=2, P31u=1, P32u=0.5),
     dict(t12=3, t13=2, t21=4, t23=1.5, t31=2, t32=1,
          s12=5, s31=4, s21=3, s32=6, r21=5, r31=4, r32=7)),
    ("C", (-3.1, 1.2, -0.9), 1000,
     dict(P21b=100, P31b=80, P32b=60, P23c=90, P31c=70, P32c=50, P21c=40,
          P12u=200, P13u=150, P21u=100, P23u=80, P31u=60, P32u=30),
     dict(t12=50, t13=40, t21=60, t23=30, t31=20, t32=25,
          s12=80, s31=90, s21=70, s32=100, r21=120, r31=110, r32=150)),
]

FREE = ["P21b", "P31b", "P32b", "P23c", "P31c", "P32c", "P21c",
        "P12u", "P13u", "P21u", "P23u", "P31u", "P32u"]
DOWN = ["t12", "t13", "t21", "t23", "t31", "t32",
        "s12", "s31", "s21", "s32", "r21", "r31", "r32"]


def C(x):
    return log(1 + x, 2) / 2


def Cp(x):
    return max(mpf(0), C(x)) if x > -1 else mpf(0)


def case(h, P, free, down):
    h1, h2, h3 = (mpf(float(v)) for v in h)
    g1, g2, g3 = h1 * h1, h2 * h2, h3 * h3
    P = mpf(P)
    u = {k: mpf(float(free.get(k, 0))) for k in FREE}
    # alignment couplings
    u["P12b"] = g2 * u["P21b"] / g1
    u["P13b"] = g3 * u["P31b"] / g1
    u["P23b"] = g3 * u["P32b"] / g2
    u["P12c"] = g2 * u["P23c"] / g1
    u["tP23c"] = g3 * u["P31c"] / g2
    u["P13c"] = g3 * u["P32c"] / g1
    u["tP13c"] = g2 * u["P21c"] / g1
    P2 = u["P21b"] + u["P23b"] + u["P21c"] + u["P23c"] + u["tP23c"] + u["P21u"] + u["P23u"]
    P3 = u["P31b"] + u["P32b"] + u["P31c"] + u["P32c"] + u["P31u"] + u["P32u"]

    out = {}
    out["sigma_sq"] = 1 + g3 * (2 * u["P31b"] + 2 * u["P32b"] + 2 * u["P31c"] + 2 * u["P32c"] + u["P31u"] + u["P32u"])
    s2 = out["sigma_sq"]
    out["relay.R12u"] = C(g1 * u["P12u"] / (1 + g3 * P3 + g2 * P2 + g1 * (P - u["P12u"])))
    out["relay.R13u"] = C(g1 * u["P13u"] / (1 + g3 * P3 + g2 * P2 + g1 * (P - u["P12u"] - u["P13u"])))
    out["relay.R21u"] = C(g2 * u["P21u"] / (1 + g3 * P3 + g2 * (P2 - u["P21u"]) + g1 * (P - u["P12u"] - u["P13u"])))
    out["relay.R23u"] = C(g2 * u["P23u"] / (1 + g3 * P3 + g2 * (P2 - u["P21u"] - u["P23u"]) + g1 * (P - u["P12u"] - u["P13u"])))
    out["relay.R132c.h2"] = Cp(g2 * u["P21c"] / (s2 + 2 * g2 * (u["P21b"] + u["P23c"])) - mpf(1) / 2)
    out["relay.R123c.h2"] = Cp(g2 * u["P23c"] / (s2 + 2 * g2 * u["P21b"]) - mpf(1) / 2)
    out["relay.R21b"] = Cp(g2 * u["P21b"] / s2 - mpf(1) / 2)
    out["relay.R31u"] = C(g3 * u["P31u"] / (1 + g3 * (2 * u["P32b"] + 2 * u["P31b"] + 2 * u["P31c"] + 2 * u["P32c"] + u["P32u"])))
    out["relay.R32u"] = C(g3 * u["P32u"] / (1 + 2 * g3 * (u["P32b"] + u["P31b"] + u["P31c"] + u["P32c"])))
    out["relay.R132c.h3"] = Cp(g3 * u["P32c"] / (1 + 2 * g3 * (u["P32b"] + u["P31b"] + u["P31c"])) - mpf(1) / 2)
    out["relay.R123c.h3"] = Cp(g3 * u["P31c"] / (1 + 2 * g3 * (u["P32b"] + u["P31b"])) - mpf(1) / 2)
    out["relay.R31b"] = Cp(g3 * u["P31b"] / (1 + 2 * g3 * u["P32b"]) - mpf(1) / 2)
    out["relay.R32b"] = Cp(g3 * u["P32b"] - mpf(1) / 2)

    d = {k: mpf(float(down.get(k, 0))) for k in DOWN}
    r1 = 1 + g3 * (d["t12"] + d["t32"] + d["s12"] + d["s21"] + d["r21"] + d["t21"] + d["t31"])
    r2 = 1 + g2 * (d["t21"] + d["t31"])
    out["sigma_r1_sq"] = r1
    out["sigma_r2_sq"] = r2
    out["U3.R13u"] = C(g3 * d["t13"] / (r1 + g3 * (d["t23"] + d["s32"] + d["s31"] + d["r31"] + d["r32"])))
    out["U3.R23u"] = C(g3 * d["t23"] / (r1 + g3 * (d["s32"] + d["s31"] + d["r31"] + d["r32"])))
    out["U3.R132c"] = C(g3 * d["s32"] / (r1 + g3 * (d["s31"] + d["r31"] + d["r32"])))
    out["U3.R123c"] = C(g3 * d["s31"] / (r1 + g3 * (d["r31"] + d["r32"])))
    out["U3.R31b"] = C(g3 * d["r31"] / (r1 + g3 * d["r32"]))
    out["U3.R32b"] = C(g3 * d["r32"] / r1)
    out["U2.R12u"] = C(g2 * d["t12"] / (r2 + g2 * (d["t32"] + d["s12"] + d["s21"] + d["r21"])))
    out["U2.R32u"] = C(g2 * d["t32"] / (r2 + g2 * (d["s12"] + d["s21"] + d["r21"])))
    out["U2.R123c"] = C(g2 * d["s12"] / (r2 + g2 * (d["s21"] + d["r21"])))
    out["U2.R132c"] = C(g2 * d["s21"] / (r2 + g2 * d["r21"]))
    out["U2.R21b"] = C(g2 * d["r21"] / r2)
    out["U1.R21u"] = C(g1 * d["t21"] / (1 + g1 * d["t31"]))
    out["U1.R31u"] = C(g1 * d["t31"])
    return {k: mp.nstr(v, 30) for k, v in out.items()}


if __name__ == "__main__":
    doc = {name: case(h, P, free, down) for name, h, P, free, down in CASES}
    print(json.dumps(doc, indent=2))
