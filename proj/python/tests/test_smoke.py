# Copyright 2026 The retrotrace Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import pathlib

import pytest

import retrotrace as rt

TOPOLOGIES = pathlib.Path(__file__).resolve().parents[2] / "topologies"


def test_trace_id_round_trip_and_rank():
    t = rt.TraceId(0xDEADBEEF, 0x1234)
    assert rt.TraceId.from_hex(t.hex()) == t
    assert rt.priority_rank(rt.TraceId.from_int(1)) == 0x88201EB960FF62B2
    assert rt.priority_rank(t) == 0x7A6637DA538FB8FD
    assert bool(rt.TraceId.random())


def test_context_wire_format():
    t = rt.TraceId.from_int(5)
    plain = rt.serialize_context(t, "a:1")
    assert len(plain) == 22
    fired = rt.serialize_context(t, "a:1", [16, 17])
    assert len(fired) == 30
    assert rt.deserialize_context(fired) == (t, "a:1", [16, 17])
    with pytest.raises(ValueError):
        rt.deserialize_context(fired[:-1])


def test_autotriggers():
    p = rt.PercentileTrigger(18, 50, window=1000, warmup=100)
    for v in range(1, 101):
        assert p.add_sample(rt.TraceId.from_int(v), float(v)) is None
    fired = p.add_sample(rt.TraceId.from_int(999), 200.0)
    assert fired is not None and fired.trigger_id == 18

    s = rt.TriggerSet(3)
    for v in range(1, 6):
        s.observe(rt.TraceId.from_int(v))
    out = s.on_fire(rt.Trigger(rt.TraceId.from_int(5), 19))
    assert out.laterals == [rt.TraceId.from_int(v) for v in (4, 3, 2)]

    with pytest.raises(ValueError):
        rt.CategoryTrigger(20, 1.5)


def test_two_node_deployment_collects_triggered_trace():
    d = rt.Deployment()
    d.add_node("front:1")
    d.add_node("back:2")
    front, back = d.client("front:1"), d.client("back:2")
    kept, dropped = rt.TraceId.from_int(1), rt.TraceId.from_int(2)
    for t in (kept, dropped):
        front.begin(t)
        front.tracepoint(b"front-" + t.hex().encode())
        ctx = front.serialize()
        front.breadcrumb("back:2")
        back.deserialize(ctx)
        back.tracepoint(b"back")
        back.end()
        front.end()
    d.poll()
    front.trigger(kept, 16)
    d.poll()
    trace = d.trace(kept)
    assert set(trace) == {"front:1", "back:2"}
    assert trace["back:2"] == [b"back"]
    assert d.trace(dropped) is None


def test_run_topology_is_deterministic():
    text = (TOPOLOGIES / "chain2.json").read_text()
    a = rt.run_topology(text, seed=4, duration_sec=2)
    b = rt.run_topology(text, seed=4, duration_sec=2)
    assert a["requests_completed"] == b["requests_completed"] > 0
    assert a["latency_ms"] == b["latency_ms"]
    assert a["incoherent"] == 0 and a["contaminated_payloads"] == 0
    off = rt.run_topology(text, seed=4, tracing=False, duration_sec=2)
    assert off["collector_bytes"] == 0


def test_bench_tracepoint_reports_latencies():
    r = rt.bench_tracepoint(threads=1, payload=32, traces=20)
    assert r["tracepoint"]["count"] > 0
    assert r["tracepoint"]["p50"] > 0
