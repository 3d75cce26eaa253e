from __future__ import annotations
"""In-process counters for simulation and protocol runs.
Thread-safe; resets on process restart. The CLI logs a snapshot at the end of
every experiment.
"""
from dataclasses import dataclass, asdict, field
from threading import Lock
import time
from typing import Dict, Any

@dataclass
class _MetricState:
    start_ts: float = field(default_factory=time.time)
    states_built: int = 0
    color_tests: int = 0
    color_tests_passed: int = 0
    protocol_runs: int = 0
    accepts: int = 0
    rejects: int = 0
    last_experiment: str | None = None
    last_experiment_duration_ms: float = 0.0
    last_experiment_ts: float | None = None

    def snapshot(self) -> Dict[str, Any]:
        d = asdict(self)
        d['uptime_s'] = time.time() - self.start_ts
        d['acceptance_rate'] = (self.accepts / self.protocol_runs) if self.protocol_runs else 0.0
        d['test_pass_rate'] = (self.color_tests_passed / self.color_tests) if self.color_tests else 0.0
        return d

_state = _MetricState()
_lock = Lock()

def inc_states_built(n: int = 1) -> None:
    if n <= 0:
        return
    with _lock:
        _state.states_built += n

def inc_color_tests(total: int, passed: int) -> None:
    if total <= 0:
        return
    with _lock:
        _state.color_tests += total
        _state.color_tests_passed += max(0, min(passed, total))

def record_decision(accepted: bool) -> None:
    with _lock:
        _state.protocol_runs += 1
        if accepted:
            _state.accepts += 1
        else:
            _state.rejects += 1

def record_experiment(name: str, duration_ms: float) -> None:
    with _lock:
        _state.last_experiment = name
        _state.last_experiment_duration_ms = duration_ms
        _state.last_experiment_ts = time.time()

def reset_metrics() -> None:
    global _state
    with _lock:
        _state = _MetricState()


def export_metrics() -> Dict[str, Any]:
    with _lock:
        return _state.snapshot()
