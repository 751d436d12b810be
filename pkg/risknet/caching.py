import os
from collections import namedtuple
from pathlib import Path

import numpy as np

from risknet._utils import array_bytes, dumps, loads, sha256
from risknet.logger import logger

caches = dict()
Cached = namedtuple('Cached', ['data', 'key'])


def cache_key(kind: str, /, *series: np.ndarray, settings: dict) -> str:
    """sha256 over the kind, the raw bytes of every series and the settings that change the result."""
    return sha256(kind, *(array_bytes(s) for s in series), dumps(settings))


def _cache_path(cache_dir: Path, key: str) -> Path:
    return Path(cache_dir) / key[:2] / f'{key}.json'


def get_cached(cache_dir: Path | None, key: str) -> Cached | None:
    """
    If cache_dir is set:
        Read the blob from disk
    else:
        Read it from memory
    """
    if cache_dir is None:
        if cached := caches.get(key):
            return Cached(data=cached, key=key)
        return None

    path = _cache_path(cache_dir, key)
    if not path.is_file():
        return None
    try:
        return Cached(data=loads(path.read_bytes()), key=key)
    except ValueError:
        logger.warning(f'Ignoring unreadable cache blob {path}')
        return None


def set_cache(cache_dir: Path | None, key: str, data: dict) -> None:
    """
    If cache_dir is set:
        Write the blob to disk (atomically)
    else:
        Keep it in memory
    """
    if cache_dir is None:
        caches[key] = data
        return

    path = _cache_path(cache_dir, key)
    path.parent.mkdir(parents=True, exist_ok=True)
    temporary = path.with_suffix(f'.{os.getpid()}.tmp')
    temporary.write_bytes(dumps(data))
    temporary.replace(path)
