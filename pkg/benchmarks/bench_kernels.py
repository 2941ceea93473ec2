"""Benchmark the numba kernels against their numpy/python fallbacks.

The backend is chosen at import time from GEOLINKER_NO_NUMBA, so this
script re-executes itself once per mode and prints a comparison table:

    python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
import time


def _time(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def run_worker():
    import numpy as np

    from geolinker import kernels
    from geolinker.recognizer import Automaton
    from geolinker.textnorm import normalize_text

    rng = np.random.default_rng(0)
    letters = list("abcdefghijklmnopqrstuvwz")

    # automaton scan over a 2M-character corpus, 5000 patterns
    names = {
        "".join(rng.choice(letters, rng.integers(4, 12))) for _ in range(5000)
    }
    automaton = Automaton.build(names)
    words = list(names)[:500] + ["de", "het", "een", "van", "aan"]
    text = " ".join(str(rng.choice(words)) for _ in range(250_000))
    norm = normalize_text(text)
    automaton.scan(norm.text[:1000])  # warm the JIT before timing

    timings = {}
    timings["ac_scan (2M chars, 5k patterns)"] = _time(lambda: automaton.scan(norm.text))

    lons = rng.uniform(-180, 180, 1500)
    lats = rng.uniform(-85, 85, 1500)
    kernels.haversine_matrix(lons[:10], lats[:10])
    timings["haversine_matrix (1500x1500)"] = _time(
        lambda: kernels.haversine_matrix(lons, lats)
    )

    n = 400
    weights = rng.uniform(0, 1, (n, n))
    np.fill_diagonal(weights, 0.0)
    restart = np.full(n, 1.0 / n)
    kernels.stationary_distribution(weights[:5, :5], restart[:5] * n / 5, 0.15, 1e-9, 10)
    timings["stationary_distribution (400 nodes)"] = _time(
        lambda: kernels.stationary_distribution(weights, restart, 0.15, 1e-12, 200)
    )

    print(json.dumps({"numba": kernels.NUMBA_ENABLED, "timings": timings}))


def main():
    if "--worker" in sys.argv:
        run_worker()
        return
    results = {}
    for mode, disable in (("numba", "0"), ("numpy/python fallback", "1")):
        env = dict(os.environ, GEOLINKER_NO_NUMBA=disable)
        out = subprocess.run(
            [sys.executable, __file__, "--worker"],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        results[mode] = json.loads(out.stdout.strip().splitlines()[-1])
    names = list(results["numba"]["timings"])
    width = max(len(n) for n in names)
    print(f"{'kernel':<{width}}  {'numba':>10}  {'fallback':>10}  {'speedup':>8}")
    for name in names:
        fast = results["numba"]["timings"][name]
        slow = results["numpy/python fallback"]["timings"][name]
        print(f"{name:<{width}}  {fast:>9.4f}s  {slow:>9.4f}s  {slow / fast:>7.1f}x")


if __name__ == "__main__":
    main()
