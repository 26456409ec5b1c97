"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_backends.py [--repeat 5] [--json out.json]
"""

from __future__ import annotations

import argparse
import json
import statistics
import time

from vvote import kernels
from vvote.crypto import group
from vvote.crypto.drbg import Drbg
from vvote.crypto.signatures import BLS_DST


def _workloads(k, rng: Drbg):
    scalars = [group.scalar_bytes(group.random_scalar(rng)) for _ in range(64)]
    point = k.r255_basemul(scalars[0])
    pk = k.r255_basemul(scalars[1])
    msgs = [k.r255_basemul(s) for s in scalars[:32]]
    sk = group.random_scalar(rng)
    sig_msg = b"benchmark message"
    sig = k.bls_sign(group.scalar_bytes(sk), sig_msg, BLS_DST)
    vk = k.bls_g2_basemul(group.scalar_bytes(sk))
    return {
        "r255_basemul x64": lambda: [k.r255_basemul(s) for s in scalars],
        "r255_mul x64": lambda: [k.r255_mul(point, s) for s in scalars],
        "elgamal_encrypt_batch 32": lambda: k.elgamal_encrypt_batch(pk, msgs, scalars[:32]),
        "bls_sign x4": lambda: [k.bls_sign(group.scalar_bytes(sk), sig_msg + bytes([i]), BLS_DST) for i in range(4)],
        "bls_verify x2": lambda: [k.bls_verify(vk, sig_msg, sig, BLS_DST) for _ in range(2)],
    }


def bench(k, repeat: int) -> dict[str, float]:
    out = {}
    for name, fn in _workloads(k, Drbg("bench")).items():
        fn()
        times = []
        for _ in range(repeat):
            t = time.perf_counter()
            fn()
            times.append(time.perf_counter() - t)
        out[name] = statistics.median(times)
    return out


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json")
    args = ap.parse_args()
    backends = {"python": kernels.load("python")}
    try:
        backends["native"] = kernels.load("native")
    except ImportError:
        print("native extension not built; timing the fallback only")
    results = {name: bench(k, args.repeat) for name, k in backends.items()}
    print(f"{'workload':28} " + " ".join(f"{b:>12}" for b in results) + ("      speedup" if len(results) == 2 else ""))
    for w in results["python"]:
        row = " ".join(f"{results[b][w] * 1e3:10.2f}ms" for b in results)
        extra = f" {results['python'][w] / results['native'][w]:10.1f}x" if "native" in results else ""
        print(f"{w:28} {row}{extra}")
    if args.json:
        with open(args.json, "w") as f:
            json.dump(results, f, indent=1, sort_keys=True)


if __name__ == "__main__":
    main()
