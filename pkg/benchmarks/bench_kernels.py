"""Compare the compiled kernels with the pure-Python fallback on an interlinking workload.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import random
import timeit
from pathlib import Path

from translod import _pure
from translod.interlink import Gazetteer, normalize_label

try:
    from translod import _speedups
except ImportError:
    _speedups = None

GAZETTEER = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "gazetteer_communes.csv"


def workload(seed=3):
    gaz = Gazetteer.load(GAZETTEER)
    names = [normalize_label(e.name) for e in gaz.entries]
    rng = random.Random(seed)
    # misspelled copies stand in for source labels
    labels = []
    for _ in range(200):
        s = list(rng.choice(names))
        for _ in range(rng.randint(0, 2)):
            s[rng.randrange(len(s))] = rng.choice("abcdefghijklmnopqrstuvwxyz ")
        labels.append("".join(s))
    points = [(e.latitude, e.longitude) for e in gaz.entries]
    return labels, names, points


def run(mod, labels, names, points):
    lev = mod.levenshtein_distance
    hav = mod.haversine_km
    total = 0
    for a in labels:
        for b in names:
            total += lev(a, b)
    dist = 0.0
    for p in points:
        for q in points:
            dist += hav(p[0], p[1], q[0], q[1])
    return total, dist


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    labels, names, points = workload()
    print(f"{len(labels) * len(names)} edit distances, {len(points) ** 2} distances per run")

    backends = [("pure", _pure)] + ([("compiled", _speedups)] if _speedups else [])
    results, timings = {}, {}
    for name, mod in backends:
        results[name] = run(mod, labels, names, points)
        timings[name] = min(timeit.repeat(lambda: run(mod, labels, names, points),
                                          number=1, repeat=args.repeat))
        print(f"{name:>9}: {timings[name] * 1000:9.1f} ms")
    if _speedups is None:
        print("compiled extension not built; nothing to compare")
        return
    same_lev = results["pure"][0] == results["compiled"][0]
    same_hav = abs(results["pure"][1] - results["compiled"][1]) <= 1e-6 * results["pure"][1]
    print(f"  speedup: {timings['pure'] / timings['compiled']:.1f}x, "
          f"results {'agree' if same_lev and same_hav else 'DISAGREE'}")


if __name__ == "__main__":
    main()
