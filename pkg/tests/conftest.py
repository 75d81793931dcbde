import pytest


@pytest.fixture(autouse=True)
def _isolate_output_env(monkeypatch):
    # The output-dir environment override must not leak into tests that
    # build configs programmatically.
    monkeypatch.delenv("GTO_BENCH_OUT", raising=False)
