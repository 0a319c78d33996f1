# SPDX-License-Identifier: GPL-3.0-or-later
import hashlib
import itertools
import json
import logging
from concurrent.futures import Executor
from typing import Any, Callable, Iterable, Iterator, List, Mapping, TextIO, TypeVar

log = logging.getLogger("cottools.stepentropy")

T = TypeVar("T")
R = TypeVar("R")

_DIGEST_CHUNK = 1 << 20


def dump_line(obj: Any, sort_keys: bool = False) -> str:
    """
    Serialize an object into a compact single-line JSON string.

    Args:
        obj (object)
            A JSON-compatible object.
        sort_keys (bool, optional)
            Whether to sort dictionary keys; otherwise insertion order is kept.
    Returns:
        The JSON text without a trailing newline.
    """
    return json.dumps(obj, sort_keys=sort_keys, separators=(",", ":"), ensure_ascii=False)


def config_hash(config: Mapping[str, Any]) -> str:
    """Return the SHA-256 hex digest of the canonical JSON form of a configuration."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def file_digest(path: str) -> str:
    """Return the SHA-256 hex digest of a file's bytes, read in chunks."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(_DIGEST_CHUNK), b""):
            digest.update(chunk)
    return digest.hexdigest()


def derive_seed(seed: int, key: str) -> int:
    """
    Derive a per-item 64-bit seed from a global seed and an item identifier.

    The derivation is a pure function of its inputs so that items may be processed
    in any order, by any number of workers, and still draw the same numbers.
    """
    digest = hashlib.sha256(f"{seed}:{key}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def iter_records(stream: TextIO) -> Iterator[str]:
    """Yield the non-blank lines of a line-delimited file, without their line endings."""
    for line in stream:
        line = line.rstrip("\n")
        if line.strip():
            yield line


def chunked(iterable: Iterable[T], size: int) -> Iterator[List[T]]:
    """Split an iterable into lists holding at most ``size`` items."""
    iterator = iter(iterable)
    while True:
        chunk = list(itertools.islice(iterator, size))
        if not chunk:
            return
        yield chunk


def ordered_map(
    executor: Executor, fn: Callable[[T], R], items: Iterable[T], window: int
) -> Iterator[R]:
    """
    Apply ``fn`` to every item on an executor, yielding the results in input order.

    At most ``window`` items are submitted at any time so that memory use stays
    bounded regardless of the input size.

    Args:
        executor (Executor)
            The executor running ``fn``.
        fn (callable)
            The function to apply.
        items (iterable)
            The inputs, consumed lazily.
        window (int)
            The maximum number of submitted items.
    Yields:
        The results of ``fn`` in input order.
    Raises:
        The first exception raised by ``fn``, once its result is reached.
    """
    for chunk in chunked(items, max(1, window)):
        futures = [executor.submit(fn, item) for item in chunk]
        for future in futures:
            yield future.result()


UINT64 = 1 << 64


def bounded_draw(generator: Any, bound: int) -> int:
    """
    Draw a uniform integer in ``[0, bound)`` from a numpy bit generator's raw stream.

    Rejection sampling keeps the draw exactly uniform.
    """
    limit = UINT64 - (UINT64 % bound)
    while True:
        value = int(generator.random_raw())
        if value < limit:
            return value % bound


def unit_draw(generator: Any) -> float:
    """Draw a uniform double in ``[0, 1)`` from the top 53 bits of a raw 64-bit output."""
    return (int(generator.random_raw()) >> 11) * (1.0 / (1 << 53))
