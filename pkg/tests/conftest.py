from __future__ import annotations

import pytest

from spanlab.graphs import WeightedGraph

# checker names that flag measured-constant shortfalls, not contract breaks
WARN_NAMES = {"p2-size-warning", "step1-size"}


class CheckSink:
    """Collects builder invariant-check callbacks; hard names must all pass."""

    def __init__(self):
        self.failures: list[tuple[str, str]] = []
        self.warnings: list[tuple[str, str]] = []
        self.seen = 0

    def __call__(self, name: str, ok: bool, detail: str) -> None:
        self.seen += 1
        if not ok:
            bucket = self.warnings if name in WARN_NAMES else self.failures
            bucket.append((name, detail))

    def assert_clean(self):
        assert not self.failures, f"invariant failures: {self.failures[:5]}"


@pytest.fixture
def sink():
    return CheckSink()


def wgraph(n: int, edges) -> WeightedGraph:
    return WeightedGraph(n, [(u, v, float(w)) for u, v, w in edges])


def triangle(w01=1.0, w12=1.0, w02=1.0) -> WeightedGraph:
    return wgraph(3, [(0, 1, w01), (1, 2, w12), (0, 2, w02)])
