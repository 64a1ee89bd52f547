"""
Cache service for assembled matrices and built preconditioners
"""
import logging
import threading
from typing import Any, Callable, Dict, Hashable, Optional, TypeVar

from cachetools import TTLCache

from app.core.config import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")


class CacheService:
    """In-memory cache service with TTL support, safe to share between sweep workers"""

    def __init__(self, maxsize: Optional[int] = None, ttl: Optional[int] = None):
        self._cache = TTLCache(maxsize=maxsize or settings.CACHE_MAXSIZE, ttl=ttl or settings.CACHE_TTL)
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key: Hashable) -> Optional[Any]:
        """Get value from cache"""
        with self._lock:
            value = self._cache.get(key)
            if value is None:
                self.misses += 1
            else:
                self.hits += 1
            return value

    def set(self, key: Hashable, value: Any) -> None:
        with self._lock:
            self._cache[key] = value

    def get_or_build(self, key: Hashable, build: Callable[[], T]) -> T:
        """
        Return the cached value or build and store it. The lock is not held while
        building, so two workers may occasionally build the same entry.
        """
        value = self.get(key)
        if value is None:
            logger.debug("Cache miss for %s", key)
            value = build()
            self.set(key, value)
        return value

    def get_stats(self) -> Dict[str, Any]:
        """Get cache statistics"""
        with self._lock:
            return {
                "size": len(self._cache),
                "maxsize": self._cache.maxsize,
                "ttl": self._cache.ttl,
                "hits": self.hits,
                "misses": self.misses,
            }
