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

"""Retroactive distributed tracing: clients, agents and a simulation harness."""

from retrotrace._core import (
    CategoryTrigger,
    Client,
    DecodeError,
    Deployment,
    PercentileTrigger,
    SlidingQuantile,
    TraceId,
    Trigger,
    TriggerSet,
    bench_tracepoint,
    deserialize_context,
    priority_rank,
    run_topology,
    serialize_context,
)

__all__ = [
    "CategoryTrigger",
    "Client",
    "DecodeError",
    "Deployment",
    "PercentileTrigger",
    "SlidingQuantile",
    "TraceId",
    "Trigger",
    "TriggerSet",
    "bench_tracepoint",
    "deserialize_context",
    "priority_rank",
    "run_topology",
    "serialize_context",
]
