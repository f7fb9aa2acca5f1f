#!/usr/bin/env python3
"""Reference oracle for fixtures/functions.json.

Straight transcriptions of the unshifted, unrotated basic test functions,
written independently of the Rust implementation. Regenerate with:

    python3 crates/core/fixtures/oracle_functions.py > crates/core/fixtures/functions.json
"""
import json
import math
import random

PI = math.pi
E = math.e


def bent_cigar(x):
    return x[0] ** 2 + 1e6 * sum(v * v for v in x[1:])


def discus(x):
    return 1e6 * x[0] ** 2 + sum(v * v for v in x[1:])


def weierstrass(x, a=0.5, b=3.0, kmax=20):
    d = len(x)
    total = 0.0
    for v in x:
        total += sum(a ** k * math.cos(2 * PI * b ** k * (v + 0.5)) for k in range(kmax + 1))
    return total - d * sum(a ** k * math.cos(2 * PI * b ** k * 0.5) for k in range(kmax + 1))


def modified_schwefel(x):
    d = len(x)
    acc = 0.0
    for v in x:
        z = v + 4.209687462275036e2
        if abs(z) <= 500:
            g = z * math.sin(math.sqrt(abs(z)))
        elif z > 500:
            r = 500 - math.fmod(z, 500)
            g = r * math.sin(math.sqrt(abs(r))) - (z - 500) ** 2 / (10000 * d)
        else:
            r = math.fmod(abs(z), 500) - 500
            g = r * math.sin(math.sqrt(abs(r))) - (z + 500) ** 2 / (10000 * d)
        acc += g
    return 418.9829 * d - acc


def katsuura(x):
    d = len(x)
    prod = 1.0
    for i, v in enumerate(x, start=1):
        s = sum(abs(2 ** j * v - round(2 ** j * v)) / 2 ** j for j in range(1, 33))
        prod *= (1 + i * s) ** (10 / d ** 1.2)
    return 10 / d ** 2 * prod - 10 / d ** 2


def happy_cat(x):
    d = len(x)
    sq = sum(v * v for v in x)
    s = sum(x)
    return abs(sq - d) ** 0.25 + (0.5 * sq + s) / d + 0.5


def hgbat(x):
    d = len(x)
    sq = sum(v * v for v in x)
    s = sum(x)
    return abs(sq ** 2 - s ** 2) ** 0.5 + (0.5 * sq + s) / d + 0.5


def griewank_1d(v):
    return v * v / 4000 - math.cos(v) + 1


def rosenbrock_2d(a, b):
    return 100 * (a * a - b) ** 2 + (a - 1) ** 2


def expanded_griewank_rosenbrock(x):
    d = len(x)
    return sum(griewank_1d(rosenbrock_2d(x[i], x[(i + 1) % d])) for i in range(d))


def schaffer_f6(a, b):
    r2 = a * a + b * b
    return 0.5 + (math.sin(math.sqrt(r2)) ** 2 - 0.5) / (1 + 0.001 * r2) ** 2


def expanded_schaffer(x):
    d = len(x)
    return sum(schaffer_f6(x[i], x[(i + 1) % d]) for i in range(d))


def rosenbrock(x):
    return sum(100 * (x[i] ** 2 - x[i + 1]) ** 2 + (x[i] - 1) ** 2 for i in range(len(x) - 1))


def griewank(x):
    s = sum(v * v for v in x) / 4000
    p = 1.0
    for i, v in enumerate(x, start=1):
        p *= math.cos(v / math.sqrt(i))
    return s - p + 1


def rastrigin(x):
    return sum(v * v - 10 * math.cos(2 * PI * v) + 10 for v in x)


def elliptic(x):
    d = len(x)
    if d == 1:
        return x[0] ** 2
    return sum(1e6 ** (i / (d - 1)) * v * v for i, v in enumerate(x))


def ackley(x):
    d = len(x)
    a = -20 * math.exp(-0.2 * math.sqrt(sum(v * v for v in x) / d))
    b = math.exp(sum(math.cos(2 * PI * v) for v in x) / d)
    return a - b + 20 + E


FUNCTIONS = [
    ("F1", "Bent Cigar", bent_cigar, 0.0),
    ("F2", "Discus", discus, 0.0),
    ("F3", "Weierstrass", weierstrass, 0.0),
    ("F4", "Modified Schwefel", modified_schwefel, 0.0),
    ("F5", "Katsuura", katsuura, 0.0),
    ("F6", "HappyCat", happy_cat, -1.0),
    ("F7", "HGBat", hgbat, -1.0),
    ("F8", "Expanded Griewank plus Rosenbrock", expanded_griewank_rosenbrock, 1.0),
    ("F9", "Expanded Scaffer's F6", expanded_schaffer, 0.0),
    ("F10", "Rosenbrock's", rosenbrock, 1.0),
    ("F11", "Griewank's", griewank, 0.0),
    ("F12", "Rastrigin's", rastrigin, 0.0),
    ("F13", "High Conditioned Elliptic", elliptic, 0.0),
    ("F14", "Ackley", ackley, 0.0),
]


def main():
    rng = random.Random(20240601)
    out = []
    for fid, name, f, opt in FUNCTIONS:
        for dim in (2, 3, 30):
            probes = []
            x = [opt] * dim
            probes.append({"x": x, "expected_f": f(x), "optimum": True})
            for _ in range(2):
                x = [round(rng.uniform(-100, 100), 4) for _ in range(dim)]
                probes.append({"x": x, "expected_f": f(x), "optimum": False})
            out.append({"id": fid, "name": name, "dim": dim, "probe_points": probes})
    print(json.dumps(out, indent=1))


if __name__ == "__main__":
    main()
