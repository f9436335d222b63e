import threading

from sphere_multipliers.cache import CacheRegistry, InsertOnceTable, get_cache_registry, shared_table


def test_factory_runs_once():
    table = InsertOnceTable("test")
    calls = []
    first = table.get_or_create("k", lambda: calls.append(1) or object())
    assert table.get_or_create("k", lambda: calls.append(1) or object()) is first
    assert calls == [1]
    assert "k" in table and len(table) == 1
    table.clear()
    assert len(table) == 0


def test_concurrent_callers_share_one_value():
    table = InsertOnceTable("threads")
    barrier = threading.Barrier(8)
    built, results = [], []

    def factory():
        built.append(1)
        return object()

    def worker():
        barrier.wait()
        results.append(table.get_or_create(("rule", 64), factory))

    threads = [threading.Thread(target=worker) for _ in range(8)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()
    assert len(built) == 1
    assert all(value is results[0] for value in results)


def test_registry_is_a_singleton(fresh_caches):
    assert CacheRegistry() is get_cache_registry()
    table = shared_table("test.registry")
    assert shared_table("test.registry") is table
    table.get_or_create(1, lambda: "one")
    assert fresh_caches.stats()["test.registry"] == 1
    fresh_caches.clear()
    assert fresh_caches.stats()["test.registry"] == 0
