"""Worker partitioning shared by the 2D and 3D gather drivers."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor


def split_blocks(total, workers):
    """Split range(total) into contiguous blocks, remainder on the last one.

    Every worker gets total // workers rows; empty blocks are dropped, so the
    result may be shorter than `workers` for tiny inputs.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    size = total // workers
    blocks = []
    start = 0
    for t in range(workers):
        stop = start + size if t < workers - 1 else total
        if stop > start:
            blocks.append((start, stop))
        start = stop
    return blocks


def run_blocks(fn, sources, blocks):
    """Run fn(source, lo, hi) per block on its own thread; results in block order."""
    if len(blocks) == 1:
        return [fn(sources[0], *blocks[0])]
    with ThreadPoolExecutor(max_workers=len(blocks)) as pool:
        futures = [pool.submit(fn, src, lo, hi) for src, (lo, hi) in zip(sources, blocks)]
        return [f.result() for f in futures]
