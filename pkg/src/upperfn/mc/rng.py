"""Per-replication random streams keyed by (seed, experiment, replication)."""
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RngSpec:
    seed: int
    experiment: str
    replication: int = 0

    def generator(self):
        return stream(self.seed, self.experiment, self.replication)


def stream(seed, experiment, rep):
    key = (zlib.crc32(experiment.encode()), int(rep))
    ss = np.random.SeedSequence(entropy=int(seed) & (2 ** 64 - 1), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


def run_replications(fn, R, seed, experiment, threads=1):
    """[fn(rng, rep) for rep in range(R)], each with its own stream.

    Results are returned in replication order, so output does not depend on
    the thread count.
    """
    def one(rep):
        return fn(stream(seed, experiment, rep), rep)
    if threads is None or threads <= 1:
        return [one(r) for r in range(R)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(one, range(R)))


def run_blocks(fn, R, seed, experiment, threads=1, block=500):
    """Concatenate fn(rng, size) over blocks of replications.

    Block b draws from stream (seed, experiment, b), so results depend only
    on (seed, experiment, R, block) and never on the thread count.
    """
    sizes = [min(block, R - s) for s in range(0, R, block)]
    parts = run_replications(lambda rng, b: np.asarray(fn(rng, sizes[b])), len(sizes),
                             seed, experiment, threads)
    return np.concatenate(parts, axis=0)
