"""Acceptance suite: one test per shipping criterion.

Each test enforces its stated tolerance and runtime budget and prints a
PASS line (visible with `pytest -s`).  Everything runs against the
built-in template backend; the external-generator criteria use the
scripted stubs under tests/stubs/.
"""
from __future__ import annotations

import hashlib
import random
import time
from pathlib import Path

from gvbsim.calls import CallState, CallSession, RoutingKind, route_waiting_call
from gvbsim.cli import main
from gvbsim.generation import ExternalBackend, GenerationParams, TemplateBackend
from gvbsim.policy import BurstPolicy
from gvbsim.scenario import parse_scenario
from gvbsim.scheduler import (
    BurstLedger,
    BurstRecord,
    CallerVoice,
    Deny,
    DenyReason,
    Permit,
    record_burst,
    request_burst,
)
from gvbsim.scoring import (
    BaselineProfile,
    CallerContext,
    EmergencyAssessment,
    FactorScores,
    FactorWeights,
    LocationType,
    PriorityTier,
    TierThresholds,
    activity_anomaly,
    assess,
    classify_tier,
    emergency_score,
    health_anomaly,
    location_anomaly,
    timing_anomaly,
)
from gvbsim.sim import RunConfig, run
from gvbsim.trace import TraceRecord

from .conftest import SCENARIO_DIR, stub_command


def announce(number: int, message: str) -> None:
    print(f"ACCEPTANCE {number} PASS: {message}")


def named(records: list[TraceRecord], event: str) -> list[TraceRecord]:
    return [r for r in records if r.event == event]


# --- criterion 1: tier routing table ---

def test_c1_tier_routing_table():
    started = time.perf_counter()
    thresholds = TierThresholds(0.9, 0.6, 0.3)
    waiting = CallSession(1, "C", "A", CallState.WAITING, started_at=0)
    policy = BurstPolicy(callee="A")
    expected = {
        0.95: RoutingKind.CONNECT_OVERRIDE,
        0.7: RoutingKind.PERMIT_VOICE_BURST,
        0.4: RoutingKind.PERMIT_TEXT_BURST_WITH_BEEP,
        0.1: RoutingKind.STANDARD_WAITING,
    }
    for score, kind in expected.items():
        tier = classify_tier(score, thresholds)
        assessment = EmergencyAssessment(
            factors=FactorScores(score, score, score, score),
            weights=FactorWeights(),
            emergency_score=score,
            tier=tier,
        )
        decision = route_waiting_call(waiting, assessment, policy)
        assert decision.kind is kind, f"score {score} routed to {decision.kind}"
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    announce(1, f"scores 0.95/0.7/0.4/0.1 route to the four decision kinds ({elapsed:.3f}s)")


# --- criterion 2: pre-approved burst timeline ---

def brute_force_starts(t: int, g: int, n: int, horizon: int) -> list[int]:
    """Independent oracle: walk the clock second by second and start a
    full-length burst whenever the stated rules would allow one."""
    starts: list[int] = []
    busy_until = -1
    for now in range(horizon):
        if len(starts) >= n:
            break
        if now <= busy_until:
            continue
        starts.append(now)
        busy_until = now + t + g - 1  # burst runs [now, now+t), gap of g follows
    return starts


def test_c2_preapproved_burst_timeline():
    started = time.perf_counter()
    oracle = brute_force_starts(t=5, g=30, n=3, horizon=400)
    assert oracle == [0, 35, 70]
    policy = BurstPolicy(callee="A", burst_seconds_t=5, gap_seconds_g=30, max_bursts_n=3)
    ledger = BurstLedger(session_id=1, policy=policy)
    starts: list[int] = []
    denial: Deny | None = None
    for now in range(400):
        grant = request_burst(ledger, now)
        if isinstance(grant, Permit):
            starts.append(now)
            ledger = record_burst(
                ledger,
                BurstRecord(1, ledger.bursts_sent + 1, now, 5, CallerVoice("x")),
            )
        elif denial is None and grant.reason is DenyReason.BUDGET_EXHAUSTED:
            denial = grant
    assert starts == oracle
    assert starts == [starts[0], starts[0] + 35, starts[0] + 70]
    assert denial is not None and denial.reason is DenyReason.BUDGET_EXHAUSTED
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    announce(2, f"t=5 G=30 N=3 permits at +0/+35/+70 then budget denial ({elapsed:.3f}s)")


# --- criterion 3: runtime scoring scenario ---

def test_c3_runtime_scoring_scenario():
    started = time.perf_counter()
    profile = BaselineProfile(
        usual_locations=frozenset({(0.0, 0.0)}),
        usual_hours=frozenset(range(8, 23)),
        resting_heart_rate=70,
        usual_moving=False,
    )
    emergency = CallerContext(
        location=(40.0, 9.0),
        location_type=LocationType.HIGHWAY,
        hour_of_day=3,
        heart_rate=130,
        moving_speed=14,
    )
    result = assess(emergency, profile)
    # oracle: factors (1, 5/6, 1, 1) under equal weights -> 23/24 = 0.958...
    exact = (1.0 + 5 / 6 + 1.0 + 1.0) / 4
    assert abs(result.emergency_score - exact) <= 1e-9
    assert round(result.emergency_score, 3) == 0.958
    assert result.tier is PriorityTier.HIGHEST
    waiting = CallSession(1, "C", "A", CallState.WAITING, started_at=0)
    decision = route_waiting_call(waiting, result, BurstPolicy(callee="A"))
    assert decision.kind is RoutingKind.CONNECT_OVERRIDE

    baseline = CallerContext(
        location=(0.0, 0.0),
        location_type=LocationType.HOME,
        hour_of_day=9,
        heart_rate=70,
        moving_speed=0.0,
    )
    calm = assess(baseline, profile)
    assert calm.emergency_score == 0.0
    assert route_waiting_call(waiting, calm, BurstPolicy(callee="A")).kind is (
        RoutingKind.STANDARD_WAITING
    )
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    announce(3, f"high-risk context scores 23/24 -> override; baseline waits ({elapsed:.3f}s)")


# --- criterion 4: incapacity substitution ---

def test_c4_silent_burst_generates_a_fitting_message():
    started = time.perf_counter()
    scenario = (SCENARIO_DIR / "silent_generative_burst.gvb").read_text(encoding="utf-8")
    records = run(parse_scenario(scenario))
    sent = named(records, "BURST_SENT")
    assert len(sent) == 1
    assert sent[0].get("payload") == "generated"
    text = sent[0].get("text")
    assert "fire" in text.lower()
    gen = named(records, "GEN")[0]
    t = 5  # policy burst duration in the scenario
    assert float(gen.get("seconds")) <= t
    assert int(gen.get("words")) == len(text.split())
    elapsed = time.perf_counter() - started
    announce(4, f"silent window with fire keywords sends generated text within t ({elapsed:.3f}s)")


# --- criterion 5: scheduler property suite ---

def test_c5_scheduler_property_suite():
    started = time.perf_counter()
    rng = random.Random(0xC5)
    violations = 0
    for _ in range(10_000):
        t = rng.randint(1, 5)
        g = rng.randint(0, 60)
        n = rng.randint(1, 5)
        policy = BurstPolicy(callee="A", burst_seconds_t=t, gap_seconds_g=g, max_bursts_n=n)
        ledger = BurstLedger(session_id=1, policy=policy)
        intervals: list[tuple[int, int]] = []
        now = 0
        for _ in range(rng.randint(1, 10)):
            now += rng.randint(0, 45)
            grant = request_burst(ledger, now)
            if isinstance(grant, Permit):
                if grant.granted_at != now or grant.window_end != now + t:
                    violations += 1
                duration = rng.randint(1, t)
                ledger = record_burst(
                    ledger,
                    BurstRecord(1, ledger.bursts_sent + 1, now, duration, CallerVoice("x")),
                )
                intervals.append((now, now + duration))
        if len(intervals) > n:
            violations += 1
        for (_, prev_end), (start, _) in zip(intervals, intervals[1:]):
            if start < prev_end + g:  # spacing from the previous END
                violations += 1
            if start < prev_end:  # overlap
                violations += 1
    assert violations == 0
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0
    announce(5, f"10000 random burst sequences, zero scheduler violations ({elapsed:.2f}s)")


# --- criterion 6: priority property suite ---

def test_c6_priority_property_suite():
    started = time.perf_counter()
    rng = random.Random(0xC6)
    thresholds = TierThresholds()
    violations = 0
    factor_fns = (location_anomaly, timing_anomaly, health_anomaly, activity_anomaly)
    for _ in range(10_000):
        profile = BaselineProfile(
            usual_locations=frozenset(
                (rng.uniform(-20, 20), rng.uniform(-20, 20))
                for _ in range(rng.randint(0, 3))
            ),
            usual_hours=frozenset(rng.sample(range(24), rng.randint(1, 24))),
            resting_heart_rate=rng.uniform(40, 100),
            usual_moving=rng.random() < 0.3,
        )
        ctx = CallerContext(
            location=(rng.uniform(-30, 30), rng.uniform(-30, 30))
            if rng.random() < 0.8
            else None,
            location_type=rng.choice(list(LocationType)),
            hour_of_day=rng.randrange(24) if rng.random() < 0.8 else None,
            heart_rate=rng.uniform(20, 250) if rng.random() < 0.8 else None,
            moving_speed=rng.uniform(0, 40) if rng.random() < 0.8 else None,
        )
        scores = [fn(ctx, profile) for fn in factor_fns]
        if any(not 0.0 <= s <= 1.0 for s in scores):
            violations += 1
        weights = [rng.uniform(0.01, 5) for _ in range(4)]
        base = emergency_score(scores, weights)
        index = rng.randrange(4)
        bumped = list(scores)
        bumped[index] = min(1.0, bumped[index] + rng.random() * (1 - bumped[index]))
        if emergency_score(bumped, weights) < base - 1e-15:
            violations += 1
        scale = rng.uniform(0.001, 1000)
        scaled = emergency_score(scores, [w * scale for w in weights])
        if abs(base - scaled) > 1e-12:
            violations += 1
        low, high = sorted((rng.random(), rng.random()))
        if classify_tier(low, thresholds) > classify_tier(high, thresholds):
            violations += 1
    assert violations == 0
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0
    announce(6, f"10000 random contexts, zero priority violations ({elapsed:.2f}s)")


# --- criterion 7: deterministic golden traces ---

def test_c7_golden_traces_hash_identically(tmp_path: Path):
    started = time.perf_counter()
    for scenario in sorted(SCENARIO_DIR.glob("*.gvb")):
        digests = []
        for attempt in ("one", "two"):
            trace_path = tmp_path / f"{scenario.stem}.{attempt}.trace"
            code = main(
                ["run", str(scenario), "--trace", str(trace_path), "--rng-seed", "7"]
            )
            assert code == 0
            digests.append(hashlib.sha256(trace_path.read_bytes()).hexdigest())
        assert digests[0] == digests[1], f"{scenario.name} traces differ"
    elapsed = time.perf_counter() - started
    announce(7, f"all golden scenarios reproduce bit-identical traces ({elapsed:.3f}s)")


# --- criterion 8: external generator protocol ---

def _run_silent_scenario(backend) -> list[TraceRecord]:
    scenario = (SCENARIO_DIR / "silent_generative_burst.gvb").read_text(encoding="utf-8")
    try:
        return run(parse_scenario(scenario), RunConfig(backend=backend))
    finally:
        backend.close()


def test_c8_external_protocol_and_fallback():
    started = time.perf_counter()
    # a healthy stub sees the documented request parameters
    records = _run_silent_scenario(ExternalBackend(stub_command("gen_echo.py"), timeout=10.0))
    gen = named(records, "GEN")[0]
    assert gen.get("backend") == "external"
    echoed_request = gen.get("text")
    assert "max_words=50" in echoed_request
    assert "temperature=0.9" in echoed_request
    assert "sample=1" in echoed_request
    assert not named(records, "GEN_FALLBACK")

    # a stub that never answers: exactly one fallback, template text used
    records = _run_silent_scenario(ExternalBackend(stub_command("gen_sleepy.py"), timeout=0.3))
    fallbacks = named(records, "GEN_FALLBACK")
    assert len(fallbacks) == 1
    assert fallbacks[0].get("reason") == "timeout"
    seed = "keywords: House Fire Help Come; location: home"
    expected = TemplateBackend().generate(seed, GenerationParams(rng_seed=0))
    sent = named(records, "BURST_SENT")[0]
    assert sent.get("text") == expected
    assert named(records, "GEN")[0].get("backend") == "template"
    elapsed = time.perf_counter() - started
    announce(8, f"request carries the default parameters; timeout falls back once ({elapsed:.2f}s)")
