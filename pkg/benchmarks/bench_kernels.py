"""Time the numba and numpy search backends on the same workloads.

    python benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

from finclone._accel import numba_available
from finclone.finset import OpTable, constant, enumerate_constrained, enumerate_homs
from finclone.rig import registry
from finclone.theory import cotensor_ops, mat_theory, rig_generators


def workloads():
    rigs = registry()
    z3, z4, b = rigs["z3"], rigs["z4"], rigs["bool2"]
    and_ = OpTable(2, 2, (0, 0, 0, 1))
    top = constant(2, 0, 1)
    yield "commutant mat(Z/3) arity 3", lambda be: enumerate_constrained(
        3, 3, rig_generators(z3), backend=be)
    yield "commutant mat(Z/4) arity 2", lambda be: enumerate_constrained(
        4, 2, rig_generators(z4), backend=be)
    yield "commutant mat(bool2) arity 4", lambda be: enumerate_constrained(
        2, 4, mat_theory(b).generators, backend=be)
    gens = [and_, top]
    src8 = cotensor_ops(gens, 8)
    yield "filter homs on 2^8", lambda be: enumerate_homs(256, src8, 2, gens, backend=be)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    backends = ["numpy"] + (["numba"] if numba_available() else [])
    print(f"{'workload':34} " + " ".join(f"{b:>12}" for b in backends) + "  solutions")
    for label, fn in workloads():
        fn(backends[-1])  # compile and warm caches
        times, count = [], None
        for be in backends:
            best = float("inf")
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                rows = fn(be)
                best = min(best, time.perf_counter() - t0)
            if count is not None and len(rows) != count:
                raise SystemExit(f"{label}: backends disagree ({count} vs {len(rows)})")
            count = len(rows)
            times.append(best)
        print(f"{label:34} " + " ".join(f"{t * 1000:10.1f}ms" for t in times) + f"  {count}")


if __name__ == "__main__":
    main()
