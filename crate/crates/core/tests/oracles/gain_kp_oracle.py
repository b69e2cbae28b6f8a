"""High-precision oracle for the predefined-time gain and the omega weight.

Evaluates the closed form of the gain written with ln arguments built from
2^((1-p)/2) and (1 +/- c), which is a different algebraic route from the
a1/a2/a3 form used by the library. The b3 -> 0 value is taken at b3 = 1e-25
rather than from the limit formula. Settling times of the scalar flow
z' = -k omega(|z|/2) z/2 (F = Id, G = 0, gamma = 1) come from quadrature of
dt = 2 ds / (k omega(s) s), s = |z|/2. Prints Rust literals that are frozen
into tests/settling_formulas.rs and tests/integrate.rs.
"""
import random
from mpmath import mp, mpf, log, quad

mp.dps = 50


def gain_statement(b1, b2, b3, p1, p2, c):
    b1, b2, b3, p1, p2, c = map(mpf, (b1, b2, b3, p1, p2, c))
    t1 = 1 / (b3 * (1 - c) * (1 - p1)) * log(1 + b3 * mpf(2) ** ((1 - p1) / 2) * (1 + c) ** (1 - p1) / b1)
    t2 = 1 / (b3 * (1 - c) * (p2 - 1)) * log(1 + b3 * mpf(2) ** ((1 - p2) / 2) * (1 - c) ** (1 - p2) / b2)
    return t1 + t2


def omega(b1, b2, b3, p1, p2, p3, r):
    b1, b2, b3, p1, p2, p3, r = map(mpf, (b1, b2, b3, p1, p2, p3, r))
    return b1 * r ** (p1 - 1) + b2 * r ** (p2 - 1) + b3 * r ** (-p3)


def main():
    rng = random.Random(20240611)
    print("// (b1, b2, b3, p1, p2, c, k_p)")
    print("const GAIN_POINTS: [[f64; 7]; 20] = [")
    for _ in range(20):
        b1 = round(rng.uniform(0.1, 50.0), 6)
        b2 = round(rng.uniform(0.1, 300.0), 6)
        b3 = round(rng.uniform(0.1, 10.0), 6)
        p1 = round(rng.uniform(0.05, 0.99), 6)
        p2 = round(rng.uniform(1.01, 3.0), 6)
        c = round(rng.uniform(0.0, 0.99), 6)
        k = gain_statement(b1, b2, b3, p1, p2, c)
        print(f"    [{b1!r}, {b2!r}, {b3!r}, {p1!r}, {p2!r}, {c!r}, {mp.nstr(k, 20)}],")
    print("];")
    k = gain_statement(1, 1, 1, 0.5, 1.5, 0)
    print("// b1=b2=b3=1, p1=0.5, p2=1.5, c=0")
    print(f"const GAIN_UNIT: f64 = {mp.nstr(k, 20)};")
    w = omega(20, 200, 0, 0.99, 1.01, 0, 4)
    print("// b1=20, b2=200, b3=0, p1=0.99, p2=1.01, r=4")
    print(f"const OMEGA_R4: f64 = {mp.nstr(w, 20)};")
    k = gain_statement(20, 200, mpf("1e-25"), 0.99, 1.01, 0.5)
    print("// b1=20, b2=200, b3->0, p1=0.99, p2=1.01, c=0.5")
    print(f"const GAIN_B3_ZERO: f64 = {mp.nstr(k, 20)};")

    # (b1, b2, b3, p1, p2, p3, k, z0, z1)
    cases = [
        (20, 200, 0, 0.9, 1.1, 0, 1, 4, mpf("1e-6")),
        (1, 1, 5, 0.5, 1.5, 0.5, 1, 10, mpf("1e-6")),
        (2, 3, 1, 0.7, 1.3, 1, 1, 5, mpf("1e-3")),
    ]
    print("// (b1, b2, b3, p1, p2, p3, k, z0, z1, time from z0 to z1)")
    print("const SCALAR_SETTLING: [[f64; 10]; 3] = [")
    for b1, b2, b3, p1, p2, p3, kk, z0, z1 in cases:
        f = lambda s: 2 / (kk * omega(b1, b2, b3, p1, p2, p3, s) * s)
        s0, s1 = mpf(z0) / 2, mpf(z1) / 2
        t = quad(f, [s1, mpf("1e-3"), mpf("1e-1"), 1, s0] if s0 > 1 else [s1, s0])
        vals = ", ".join(repr(float(x)) for x in (b1, b2, b3, p1, p2, p3, kk, z0, z1))
        print(f"    [{vals}, {mp.nstr(t, 20)}],")
    print("];")


if __name__ == "__main__":
    main()
