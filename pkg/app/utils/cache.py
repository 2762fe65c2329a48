from flask_caching import Cache
import hashlib
import logging
from typing import Optional, Sequence

import numpy as np

from app.services.graph_core import LabeledGraph
from app.services.topo_descriptors import graph_digest

logger = logging.getLogger(__name__)

# Redis Cache config
cache = Cache()

# Flask-Caching prepends CACHE_KEY_PREFIX ("flask_cache_") to every key,
# so keys in Redis look like: flask_cache_trs:descriptor:...
KEY_PREFIX = 'trs'
REDIS_KEY_PREFIX = f'flask_cache_{KEY_PREFIX}'  # used for invalidation


def init_cache(app):
    """Initialize cache with Flask app"""
    cache_config = {
        'CACHE_TYPE': app.config.get('CACHE_TYPE') or 'RedisCache',
        'CACHE_REDIS_URL': app.config.get('REDIS_URL', 'redis://localhost:6379/0'),
        'CACHE_DEFAULT_TIMEOUT': app.config.get('CACHE_DEFAULT_TIMEOUT', 7 * 24 * 3600),
    }

    # Fallback to simple cache when Redis is not reachable
    if cache_config['CACHE_TYPE'] == 'RedisCache':
        try:
            import redis
            r = redis.from_url(cache_config['CACHE_REDIS_URL'], socket_connect_timeout=0.5)
            r.ping()
            app.logger.info("✅ Redis connected successfully")
        except Exception as e:
            cache_config['CACHE_TYPE'] = 'SimpleCache'
            app.logger.info(f"⚠️ Redis not available ({e}), using simple cache")

    app.config.from_mapping(cache_config)
    cache.init_app(app)
    return cache


def _get_redis_client(app):
    """Redis client, or None when the cache is not Redis-backed"""
    if app.config.get('CACHE_TYPE') != 'RedisCache':
        return None
    try:
        import redis
        r = redis.from_url(app.config['CACHE_REDIS_URL'], socket_connect_timeout=0.5)
        r.ping()
        return r
    except Exception:
        return None


# ============================================================
# CACHE KEY BUILDERS - Format: trs:{scope}:{digest}
# ============================================================

def _build_cache_key(scope: str, *parts: str) -> str:
    digest = hashlib.sha1("|".join(parts).encode('utf-8')).hexdigest()
    return f"{KEY_PREFIX}:{scope}:{digest}"


def descriptor_cache_key(graph: LabeledGraph, names: Sequence[str]) -> str:
    """
    Format: trs:descriptor:{sha1(graph text | attribute names)}
    """
    return _build_cache_key('descriptor', graph_digest(graph), ",".join(names))


class DescriptorCache:
    """Adapter handed to describe_many: vectors keyed by graph and mask"""

    def __init__(self, backend: Cache = cache):
        self._backend = backend

    def get(self, graph: LabeledGraph, names: Sequence[str]) -> Optional[np.ndarray]:
        values = self._backend.get(descriptor_cache_key(graph, names))
        if values is None:
            return None
        return np.asarray(values, dtype=np.float64)

    def set(self, graph: LabeledGraph, names: Sequence[str], values: np.ndarray) -> None:
        self._backend.set(descriptor_cache_key(graph, names), [float(v) for v in values])


# ============================================================
# CACHE INVALIDATION
# ============================================================

def _delete_by_pattern(app, pattern: str):
    """Delete all Redis keys matching pattern"""
    r = _get_redis_client(app)
    if r:
        deleted_count = 0
        for key in r.scan_iter(match=pattern):
            r.delete(key)
            deleted_count += 1
        return deleted_count
    else:
        # Fallback: clear all cache
        cache.clear()
        return -1


def invalidate_all_cache(app):
    """Clear all trs cache entries"""
    return _delete_by_pattern(app, f"{REDIS_KEY_PREFIX}:*")
