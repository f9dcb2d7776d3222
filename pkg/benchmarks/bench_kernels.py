"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import math
import timeit

import numpy as np

from qdiss import _backend, _kernels_py
from qdiss.protocol import GAUSSIAN, protocol_b
from qdiss.thermo import GibbsSpec, verify_relations


def cases():
    rng = np.random.default_rng(0)
    axes = rng.normal(size=(256, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    angles = rng.uniform(-math.pi, math.pi, 256)
    mats = [(rng.normal(), rng.normal(), complex(rng.normal(), rng.normal())) for _ in range(1000)]
    p = protocol_b()
    g = GibbsSpec()
    return {
        "eigh2 x1000": lambda k: [k.eigh2(a, d, b) for a, d, b in mats],
        "compose_rotations n=256": lambda k: k.compose_rotations(axes, angles),
        "gaussian_step 4096 slices": lambda k: k.gaussian_step_propagator(1.0, 0.0, 0.0, 0.1,
                                                                          0.25, 2.0, 4096),
        "verify_relations B gaussian": lambda k: verify_relations(p, g, GAUSSIAN, (0.5, 2.0)),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not _backend.compiled_available():
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    compiled = _backend.kernels()
    print(f"{'case':30s} {'python ms':>10s} {'compiled ms':>12s} {'speedup':>8s}")
    for name, fn in cases().items():
        timings = {}
        for label, mod in (("python", _kernels_py), ("compiled", compiled)):
            _backend.use_backend(label)
            number = 3
            best = min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat)) / number
            timings[label] = best * 1e3
        _backend.use_backend("compiled")
        print(f"{name:30s} {timings['python']:10.3f} {timings['compiled']:12.3f} "
              f"{timings['python'] / timings['compiled']:7.1f}x")


if __name__ == "__main__":
    main()
