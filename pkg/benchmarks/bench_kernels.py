"""Compare the compiled and numpy blocker-loss kernels on one simulation step.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N] [--seed S]``.
"""
import argparse
import timeit

import numpy as np

from drxsim import kernels
from drxsim.blockage import init_blockers
from drxsim.config import band_config
from drxsim.scenario import build_deployment


def workload(band, seed):
    cfg = band_config(band)
    rng = np.random.default_rng(seed)
    dep = build_deployment(cfg, rng)
    field = init_blockers(cfg, dep.ue_xy, rng)
    tx = dep.bs_positions
    rx = np.broadcast_to(dep.ue_position, tx.shape)
    args = (tx, rx, field.position[:, 0], field.position[:, 1], field.width, field.height, cfg.wavelength_m)
    return args, len(field.position)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    opts = parser.parse_args()

    backends = {"python": kernels.python_backend}
    if kernels.compiled_backend is not None:
        backends["cython"] = kernels.compiled_backend
    else:
        print("compiled backend unavailable; timing the numpy fallback only")

    for band in ("28ghz", "140ghz"):
        args, n_blockers = workload(band, opts.seed)
        times = {}
        results = {}
        for name, mod in backends.items():
            results[name] = mod.link_blockage_loss_db(*args)
            per_call = min(timeit.repeat(lambda: mod.link_blockage_loss_db(*args), number=opts.repeat, repeat=3))
            times[name] = per_call / opts.repeat
        line = f"{band}: 9 links x {n_blockers} blockers | " + " | ".join(
            f"{name} {t * 1e3:.3f} ms/step" for name, t in times.items()
        )
        if len(times) == 2:
            diff = np.max(np.abs(results["cython"] - results["python"]))
            line += f" | speedup {times['python'] / times['cython']:.2f}x | max diff {diff:.1e} dB"
        print(line)


if __name__ == "__main__":
    main()
