"""Discrete-event simulator: drives every module on a virtual clock and
emits a deterministic trace.

Events are processed in (time, line) order.  A call into a busy callee is
scored, routed, and (when bursts are admitted) given a ledger.  A burst
attempt consults the scheduler, runs incapacity detection on the window,
and substitutes a generated message when the caller appears incapacitated.
Burst windows complete instantaneously at `start + duration`; waiting
calls with no activity for `abandon_timeout` seconds are ended.

Identical (events, config) pairs produce byte-identical traces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .calls import (
    CallEngine,
    CallEvent,
    CallSession,
    CallState,
    CONNECTED_STATES,
    RoutingDecision,
    RoutingKind,
    route_waiting_call,
)
from .errors import GvbError, SimError
from .generation import (
    DEFAULT_SPEAKING_RATE_WPS,
    ExternalBackend,
    GenerationParams,
    SeedBundle,
    TemplateBackend,
    compose_seed,
    fit_to_duration,
    generate_message,
)
from .incapacity import (
    DEFAULT_DISTRESS_LEXICON,
    DEFAULT_KEYWORDS,
    BurstWindow,
    Modality,
    ModalitySignal,
    assess_incapacity,
    detect_keywords,
    detect_silence,
    flag_media,
)
from .policy import PolicyRegistry
from .scenario import EventKind, SimEvent
from .scheduler import (
    BurstLedger,
    BurstRecord,
    CallerVoice,
    Deny,
    Generated,
    SilentWindow,
    TextWithBeep,
    dismiss,
    record_burst,
    request_burst,
)
from .scoring import (
    BaselineProfile,
    CallerContext,
    FactorWeights,
    LocationType,
    PriorityTier,
    TierThresholds,
    assess,
)
from .trace import TraceRecord, fmt_num, fmt_score

DEFAULT_ABANDON_TIMEOUT_S = 120


@dataclass
class RunConfig:
    weights: FactorWeights = FactorWeights()
    thresholds: TierThresholds = TierThresholds()
    backend: TemplateBackend | ExternalBackend | None = None
    rng_seed: int = 0
    speaking_rate: float = DEFAULT_SPEAKING_RATE_WPS
    abandon_timeout: int = DEFAULT_ABANDON_TIMEOUT_S
    incapacity_keywords: frozenset[str] = DEFAULT_KEYWORDS
    distress_lexicon: frozenset[str] = DEFAULT_DISTRESS_LEXICON


@dataclass
class _SessionInfo:
    """Simulator-side bookkeeping attached to one call session."""

    context: CallerContext | None = None
    decision: RoutingDecision | None = None
    ledger: BurstLedger | None = None
    pending_media: list[tuple[Modality, str]] = field(default_factory=list)
    last_activity: int = 0


def _fmt_point(point: tuple[float, float] | None) -> str:
    if point is None:
        return "-"
    return f"({point[0]:g},{point[1]:g})"


class Simulation:
    """One run over a sorted event list; not reusable."""

    def __init__(self, config: RunConfig | None = None):
        self.config = config or RunConfig()
        self.engine = CallEngine()
        self.policies = PolicyRegistry()
        self.weights = self.config.weights
        self.thresholds = self.config.thresholds
        self.profiles: dict[str, BaselineProfile] = {}
        self.records: list[TraceRecord] = []
        self.clock = 0
        self._seq = 0
        self._info: dict[int, _SessionInfo] = {}

    # -- trace plumbing --

    def _trace(self, component: str, event: str, details: list[tuple[str, str]]) -> None:
        self._seq += 1
        self.records.append(
            TraceRecord(self.clock, self._seq, component, event, tuple(details))
        )

    # -- main loop --

    def run(self, events: list[SimEvent]) -> list[TraceRecord]:
        for event in sorted(events, key=SimEvent.sort_key):
            self._expire_waiting(before=event.at)
            self.clock = event.at
            handler = self._HANDLERS[event.kind]
            try:
                handler(self, event)
            except SimError:
                raise
            except (GvbError, ValueError, KeyError) as exc:
                raise SimError(event.line_no, str(exc)) from exc
        self._expire_waiting(before=None)
        return self.records

    def _expire_waiting(self, before: int | None) -> None:
        """End waiting sessions whose idle timeout elapsed strictly before
        `before` (all of them when `before` is None, at run end)."""
        while True:
            due = sorted(
                (info.last_activity + self.config.abandon_timeout, sid)
                for sid, info in self._info.items()
                if self.engine.get(sid).state is CallState.WAITING
            )
            if before is not None:
                due = [d for d in due if d[0] < before]
            if not due:
                return
            expiry, sid = due[0]
            self.clock = max(self.clock, expiry)
            self.engine.apply_event(sid, CallEvent.TIMEOUT, self.clock)
            self._trace("call_engine", "CALL_ENDED", [("session", str(sid)), ("by", "timeout")])

    # -- event handlers --

    def _handle_register(self, event: SimEvent) -> None:
        args = event.args
        sub_id = self.engine.register(args["id"])
        home = args["home"]
        self.profiles[sub_id] = BaselineProfile(
            usual_locations=frozenset({home}) if home is not None else frozenset(),
            usual_hours=args["usual_hours"],
            resting_heart_rate=args["resting_hr"],
            usual_moving=args["usual_moving"],
        )
        self._trace(
            "call_engine",
            "SUBSCRIBER_REGISTERED",
            [
                ("id", sub_id),
                ("home", _fmt_point(home)),
                ("usual_hours", args["usual_hours_label"]),
                ("resting_hr", fmt_num(args["resting_hr"])),
                ("usual_moving", "1" if args["usual_moving"] else "0"),
            ],
        )

    def _handle_policy(self, event: SimEvent) -> None:
        policy = self.policies.store(event.args["policy"])
        approved = ",".join(sorted(policy.approved_callers)) or "-"
        self._trace(
            "approval_policy",
            "POLICY_SET",
            [
                ("callee", policy.callee),
                ("t", str(policy.burst_seconds_t)),
                ("G", str(policy.gap_seconds_g)),
                ("N", str(policy.max_bursts_n)),
                ("approved", approved),
            ],
        )

    def _handle_weights(self, event: SimEvent) -> None:
        self.weights = event.args["weights"]
        self._trace(
            "priority_engine",
            "WEIGHTS_SET",
            [
                ("location", fmt_num(self.weights.location)),
                ("timing", fmt_num(self.weights.timing)),
                ("health", fmt_num(self.weights.health)),
                ("activity", fmt_num(self.weights.activity)),
            ],
        )

    def _handle_thresholds(self, event: SimEvent) -> None:
        self.thresholds = event.args["thresholds"]
        self._trace(
            "priority_engine",
            "THRESHOLDS_SET",
            [
                ("connect", fmt_num(self.thresholds.theta_connect)),
                ("voice", fmt_num(self.thresholds.theta_voice)),
                ("text", fmt_num(self.thresholds.theta_text)),
            ],
        )

    def _handle_call(self, event: SimEvent) -> None:
        args = event.args
        session = self.engine.place_call(args["caller"], args["callee"], self.clock)
        sid = session.session_id
        self._info[sid] = _SessionInfo(context=args["context"], last_activity=self.clock)
        self._trace(
            "call_engine",
            "CALL_PLACED",
            [("session", str(sid)), ("caller", session.caller), ("callee", session.callee)],
        )
        if session.state is CallState.ACTIVE:
            self._trace("call_engine", "CALL_CONNECTED", [("session", str(sid))])
            return
        self._trace("call_engine", "CALL_WAITING", [("session", str(sid))])
        assessment = assess(
            args["context"], self.profiles[session.caller], self.weights, self.thresholds
        )
        self._trace(
            "priority_engine",
            "ASSESSMENT",
            [
                ("session", str(sid)),
                ("caller", session.caller),
                ("location", fmt_score(assessment.factors.location)),
                ("timing", fmt_score(assessment.factors.timing)),
                ("health", fmt_score(assessment.factors.health)),
                ("activity", fmt_score(assessment.factors.activity)),
                ("score", fmt_score(assessment.emergency_score)),
                ("tier", assessment.tier.token),
            ],
        )
        policy = self.policies.get_policy(session.callee)
        decision = route_waiting_call(session, assessment, policy)
        self._info[sid].decision = decision
        self._trace(
            "call_engine",
            "ROUTING",
            [
                ("session", str(sid)),
                ("kind", decision.kind.token),
                ("tier", decision.tier.token),
                ("reason", decision.reason.value),
            ],
        )
        if decision.kind is RoutingKind.CONNECT_OVERRIDE:
            for current in self.engine.connected_sessions(session.callee, include_held=False):
                self.engine.hold(current.session_id)
                self._trace(
                    "call_engine", "CALL_HELD", [("session", str(current.session_id))]
                )
            self.engine.apply_event(sid, CallEvent.OVERRIDE, self.clock)
            self._trace("call_engine", "CALL_OVERRIDE_CONNECTED", [("session", str(sid))])
        elif decision.kind in (
            RoutingKind.PERMIT_VOICE_BURST,
            RoutingKind.PERMIT_TEXT_BURST_WITH_BEEP,
        ):
            self._info[sid].ledger = BurstLedger(session_id=sid, policy=policy)
            mode = "voice" if decision.kind is RoutingKind.PERMIT_VOICE_BURST else "text"
            self._trace(
                "burst_scheduler",
                "BURSTS_ADMITTED",
                [
                    ("session", str(sid)),
                    ("mode", mode),
                    ("t", str(policy.burst_seconds_t)),
                    ("G", str(policy.gap_seconds_g)),
                    ("N", str(policy.max_bursts_n)),
                ],
            )

    def _waiting_session_of_caller(self, caller: str) -> CallSession | None:
        for session in self.engine.sessions():
            if session.caller == caller and session.state is CallState.WAITING:
                return session
        return None

    def _handle_burst(self, event: SimEvent) -> None:
        args = event.args
        session = self._waiting_session_of_caller(args["caller"])
        if session is None:
            self._trace(
                "sim_harness",
                "BURST_REJECTED",
                [("caller", args["caller"]), ("reason", "no_waiting_call")],
            )
            return
        sid = session.session_id
        info = self._info[sid]
        info.last_activity = self.clock
        if info.ledger is None:
            self._trace(
                "sim_harness",
                "BURST_REJECTED",
                [("caller", args["caller"]), ("session", str(sid)), ("reason", "not_admitted")],
            )
            return
        grant = request_burst(info.ledger, self.clock)
        if isinstance(grant, Deny):
            details = [("session", str(sid)), ("reason", grant.reason.value)]
            if grant.eligible_at is not None:
                details.append(("eligible_at", str(grant.eligible_at)))
            self._trace("burst_scheduler", "BURST_DENIED", details)
            return
        t = info.ledger.policy.burst_seconds_t
        self._trace(
            "burst_scheduler",
            "PERMIT",
            [
                ("session", str(sid)),
                ("start", str(grant.granted_at)),
                ("window_end", str(grant.window_end)),
            ],
        )
        self.engine.apply_event(sid, CallEvent.PERMIT_BURST, self.clock)
        transcript: str | None = args["transcript"]
        if transcript is None:
            duration = t
        else:
            spoken = max(1, math.ceil(len(transcript.split()) / self.config.speaking_rate))
            duration = min(t, spoken)
        signals: list[ModalitySignal] = []
        if transcript is None:
            silence_signal = detect_silence(BurstWindow(duration, speech_present=False))
            assert silence_signal is not None
            signals.append(silence_signal)
        else:
            keyword_signal = detect_keywords(transcript, self.config.incapacity_keywords)
            if keyword_signal is not None:
                signals.append(keyword_signal)
        media_descs: dict[Modality, list[str]] = {}
        if args["image"]:
            media_descs.setdefault(Modality.IMAGE_DESCRIPTION, []).append(args["image"])
        for modality, description in info.pending_media:
            media_descs.setdefault(modality, []).append(description)
        info.pending_media.clear()
        for modality, descriptions in media_descs.items():
            media_signal = flag_media(
                "; ".join(descriptions), modality, self.config.distress_lexicon
            )
            if media_signal is not None:
                signals.append(media_signal)
        verdict = assess_incapacity(signals)
        self._trace(
            "incapacity_detector",
            "INCAPACITY",
            [
                ("session", str(sid)),
                ("incapacitated", "1" if verdict.incapacitated else "0"),
                ("confidence", fmt_score(verdict.confidence)),
                ("signals", ",".join(s.modality.value for s in verdict.contributing) or "-"),
            ],
        )
        assert info.decision is not None
        voice_mode = info.decision.kind is RoutingKind.PERMIT_VOICE_BURST
        payload: CallerVoice | Generated | TextWithBeep | SilentWindow
        if verdict.incapacitated:
            payload = self._generate_substitute(
                sid, info, args, transcript, media_descs, t, voice_mode
            )
        elif transcript is not None:
            payload = CallerVoice(transcript) if voice_mode else TextWithBeep(transcript)
        else:
            payload = SilentWindow()
        sequence = info.ledger.bursts_sent + 1
        record = BurstRecord(sid, sequence, start=self.clock, duration=duration, payload=payload)
        info.ledger = record_burst(info.ledger, record)
        base_details = [
            ("session", str(sid)),
            ("sequence", str(sequence)),
            ("start", str(record.start)),
            ("duration", str(record.duration)),
        ]
        if isinstance(payload, SilentWindow):
            self._trace("burst_scheduler", "BURST_WINDOW_SILENT", base_details)
        else:
            if isinstance(payload, CallerVoice):
                kind, text = "voice", payload.transcript
            elif isinstance(payload, Generated):
                kind, text = "generated", payload.message.text
            else:
                kind, text = "text_beep", payload.text
            self._trace(
                "burst_scheduler",
                "BURST_SENT",
                base_details + [("payload", kind), ("text", text)],
            )
        self.engine.apply_event(sid, CallEvent.TIMEOUT, self.clock)

    def _generate_substitute(
        self,
        sid: int,
        info: _SessionInfo,
        args: dict,
        transcript: str | None,
        media_descs: dict[Modality, list[str]],
        t: int,
        voice_mode: bool,
    ) -> Generated | TextWithBeep | SilentWindow:
        """Build a seed from the burst's context and generate a message.

        With no seedable context at all there is nothing to generate from,
        so the window stands as silent.
        """
        location_type = None
        if info.context is not None and info.context.location_type is not LocationType.OTHER:
            location_type = info.context.location_type.value

        def joined(modality: Modality) -> str | None:
            descriptions = media_descs.get(modality)
            return "; ".join(descriptions) if descriptions else None

        bundle = SeedBundle(
            keywords=args["keywords"],
            gesture_desc=joined(Modality.GESTURE),
            image_desc=joined(Modality.IMAGE_DESCRIPTION),
            video_desc=joined(Modality.VIDEO_DESCRIPTION),
            background_speech=transcript,
            location_type=location_type,
        )
        if bundle.is_empty():
            return SilentWindow()
        seed = compose_seed(bundle)
        params = GenerationParams(rng_seed=self.config.rng_seed)
        message = generate_message(
            seed, params, self.config.backend, self.config.speaking_rate
        )
        if message.fallback_reason is not None:
            token = "timeout" if "timeout" in message.fallback_reason.lower() else "error"
            self._trace(
                "message_generator",
                "GEN_FALLBACK",
                [("session", str(sid)), ("reason", token), ("detail", message.fallback_reason)],
            )
        message = fit_to_duration(message, t, self.config.speaking_rate)
        self._trace(
            "message_generator",
            "GEN",
            [
                ("session", str(sid)),
                ("backend", message.backend.value),
                ("words", str(message.word_count)),
                ("seconds", f"{message.estimated_speech_seconds:.2f}"),
                ("text", message.text),
            ],
        )
        return Generated(message) if voice_mode else TextWithBeep(message.text)

    def _handle_media(self, event: SimEvent) -> None:
        args = event.args
        session = self._waiting_session_of_caller(args["caller"])
        if session is None:
            self._trace("sim_harness", "MEDIA_IGNORED", [("caller", args["caller"])])
            return
        info = self._info[session.session_id]
        info.pending_media.append((args["modality"], args["description"]))
        info.last_activity = self.clock
        self._trace(
            "sim_harness",
            "MEDIA_NOTED",
            [("session", str(session.session_id)), ("modality", args["modality"].value)],
        )

    def _handle_hangup(self, event: SimEvent) -> None:
        sub_id = event.args["id"]
        target = self._pick_hangup_target(sub_id)
        if target is None:
            raise SimError(event.line_no, f"{sub_id!r} has no session to hang up")
        was_connected = target.state in CONNECTED_STATES and not self.engine.is_held(
            target.session_id
        )
        self.engine.apply_event(target.session_id, CallEvent.HANG_UP, self.clock)
        self._trace(
            "call_engine",
            "CALL_ENDED",
            [("session", str(target.session_id)), ("by", sub_id)],
        )
        if was_connected:
            self._maybe_resume(target)

    def _pick_hangup_target(self, sub_id: str) -> CallSession | None:
        def rank(session: CallSession) -> int | None:
            involved = sub_id in (session.caller, session.callee)
            if not involved or session.state is CallState.ENDED:
                return None
            if session.state in CONNECTED_STATES:
                return 2 if self.engine.is_held(session.session_id) else 0
            if session.caller == sub_id:  # abandon own waiting/dialing call
                return 1 if session.state in (CallState.WAITING, CallState.BURST_PERMITTED) else 3
            return None

        candidates = [
            (r, s.session_id, s)
            for s in self.engine.sessions()
            if (r := rank(s)) is not None
        ]
        if not candidates:
            return None
        return min(candidates)[2]

    def _maybe_resume(self, ended: CallSession) -> None:
        """Un-hold the displaced call once the overriding call ends."""
        for party in (ended.caller, ended.callee):
            if self.engine.connected_sessions(party, include_held=False):
                continue
            held = [
                s
                for s in self.engine.sessions()
                if self.engine.is_held(s.session_id) and party in (s.caller, s.callee)
            ]
            if held:
                resumed = held[0]
                self.engine.resume(resumed.session_id)
                self._trace(
                    "call_engine", "CALL_RESUMED", [("session", str(resumed.session_id))]
                )

    def _handle_answer(self, event: SimEvent) -> None:
        callee = event.args["id"]

        def tier_of(sid: int) -> PriorityTier:
            decision = self._info[sid].decision
            return decision.tier if decision is not None else PriorityTier.NONE

        session = self.engine.pick_waiting(callee, tier_of)
        if session is None:
            raise SimError(event.line_no, f"{callee!r} has no waiting call to answer")
        for current in self.engine.connected_sessions(callee, include_held=False):
            self.engine.apply_event(current.session_id, CallEvent.HANG_UP, self.clock)
            self._trace(
                "call_engine",
                "CALL_ENDED",
                [("session", str(current.session_id)), ("by", callee)],
            )
        self.engine.apply_event(session.session_id, CallEvent.ANSWER, self.clock)
        self._info[session.session_id].ledger = None  # waiting episode over
        self._trace("call_engine", "CALL_CONNECTED", [("session", str(session.session_id))])

    def _handle_dismiss(self, event: SimEvent) -> None:
        callee = event.args["id"]
        for sid in sorted(self._info):
            session = self.engine.get(sid)
            info = self._info[sid]
            if (
                session.callee == callee
                and session.state is CallState.WAITING
                and info.ledger is not None
                and not info.ledger.dismissed
            ):
                remaining = info.ledger.policy.max_bursts_n - info.ledger.bursts_sent
                info.ledger = dismiss(info.ledger)
                info.last_activity = self.clock
                self._trace(
                    "burst_scheduler",
                    "BURSTS_DISMISSED",
                    [("session", str(sid)), ("remaining_cancelled", str(remaining))],
                )

    _HANDLERS = {
        EventKind.REGISTER_SUBSCRIBER: _handle_register,
        EventKind.SET_POLICY: _handle_policy,
        EventKind.SET_WEIGHTS: _handle_weights,
        EventKind.SET_THRESHOLDS: _handle_thresholds,
        EventKind.PLACE_CALL: _handle_call,
        EventKind.BURST_ATTEMPT: _handle_burst,
        EventKind.MEDIA_DESCRIPTION: _handle_media,
        EventKind.HANG_UP: _handle_hangup,
        EventKind.ANSWER: _handle_answer,
        EventKind.DISMISS: _handle_dismiss,
    }


def run(events: list[SimEvent], config: RunConfig | None = None) -> list[TraceRecord]:
    """Run a scenario to quiescence and return its trace."""
    return Simulation(config).run(events)
