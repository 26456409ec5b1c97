"""Seeded voter scenarios, fault injection and the end-to-end runner.

A scenario is plain data (voters with intentions and actions, plus faults),
so a run directory can be replayed from ``private/scenario.json``.
"""

from __future__ import annotations

import json
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path

from vvote import mixnet
from vvote.config import ElectionConfig
from vvote.crypto.drbg import Drbg
from vvote.election import Election, VoterRecord, decrypted_tally, oracle_tally
from vvote.errors import ConfigError
from vvote.messages import item_key

FAULT_KINDS = (
    "peer-crash",
    "peer-reboot",
    "msg-drop",
    "misgenerate",
    "misprint",
    "receipt-suppress",
    "vote-substitute-in-mix",
    "bad-decrypt-share",
    "commit-tamper",
    "ebm-mismark",
)

ACTIONS = ("vote", "confirm", "cancel-recast", "informal", "plain")
DAY = 86400


@dataclass
class VoterPlan:
    voter: str
    district: str
    day: int
    intention: dict[str, list[int]]
    action: str = "vote"


@dataclass
class Fault:
    kind: str
    peers: list[int] = field(default_factory=list)
    target: str = ""


@dataclass
class CrashPlan:
    """Peers down from ``down`` to ``up`` (simulated seconds); ``up`` None means never back."""

    peers: list[int]
    down: float
    up: float | None = None


@dataclass
class Replacement:
    """Swap printer ``old`` for standby ``new`` before voter ``slot`` of ``day``."""

    day: int
    slot: int
    old: str
    new: str
    stolen: bool = False


@dataclass
class Scenario:
    voters: list[VoterPlan]
    days: int = 2
    faults: list[Fault] = field(default_factory=list)
    crashes: list[CrashPlan] = field(default_factory=list)
    replacements: list[Replacement] = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "Scenario":
        return cls(
            [VoterPlan(**v) for v in d["voters"]],
            d.get("days", 2),
            [Fault(**f) for f in d.get("faults", [])],
            [CrashPlan(**c) for c in d.get("crashes", [])],
            [Replacement(**r) for r in d.get("replacements", [])],
        )


def random_intention(config: ElectionConfig, district: str, rng: Drbg, informal: bool = False) -> dict[str, list[int]]:
    sizes = config.race_sizes(district)

    def ranking(n: int, k: int) -> list[int]:
        order = rng.permutation(n)
        ranks = [0] * n
        for pos, cand in enumerate(order[:k]):
            ranks[cand] = pos + 1
        return ranks

    la = sizes["LA"]
    prefs = {"LA": ranking(la, la - 1 if informal and la > 1 else la)}
    if rng.random() < 0.5:
        prefs["LC_ATL"] = ranking(sizes["LC_ATL"], 1)
    else:
        n = sizes["LC_BTL"]
        need = config.rules["LC_BTL"].min or n
        prefs["LC_BTL"] = ranking(n, min(n, need + rng.randbelow(n - min(n, need) + 1)))
    return prefs


def generate_scenario(config: ElectionConfig, voters: int, seed: str | bytes | None = None, days: int = 2, mix_actions: bool = True) -> Scenario:
    """``voters`` voters spread over ``days`` days and all districts, with a few non-default actions.

    Day 0 is setup; voting day ``d`` runs in the window after it.
    """
    rng = Drbg(seed if seed is not None else (config.seed or "scenario")).fork("scenario")
    districts = [d.name for d in config.districts]
    plans = []
    for k in range(voters):
        district = districts[k % len(districts)]
        action = "vote"
        if mix_actions:
            x = rng.random()
            action = "confirm" if x < 0.06 else "cancel-recast" if x < 0.09 else "informal" if x < 0.11 else "vote"
        intent = random_intention(config, district, rng, informal=action == "informal")
        plans.append(VoterPlan(f"V{k + 1:04d}", district, k % days, intent, action))
    return Scenario(plans, days)


def inject_fault(scenario: Scenario, kind: str, config: ElectionConfig) -> Scenario:
    """Add one fault of ``kind``; peer faults hit ``n - t + 1`` peers so a quorum is lost."""
    if kind not in FAULT_KINDS:
        raise ConfigError(f"unknown fault kind {kind!r}; choose from {', '.join(FAULT_KINDS)}")
    k = config.wbb_peers - config.wbb_threshold + 1
    peers = list(range(config.wbb_peers - k + 1, config.wbb_peers + 1))
    printer = config.printers[0].id
    fault = Fault(kind, peers if kind in ("peer-crash", "peer-reboot", "msg-drop") else [], printer)
    if kind == "peer-crash":
        # down from late on the first voting day until the next morning: that day's commit is missed
        scenario.crashes.append(CrashPlan(peers, 2 * DAY - 3600, 2 * DAY + 600))
    if kind == "misprint":
        # make sure a voter checks a ballot from each printer early on
        for v in scenario.voters[:4]:
            if v.action == "vote":
                v.action = "confirm"
    return Scenario(scenario.voters, scenario.days, scenario.faults + [fault], scenario.crashes, scenario.replacements)


@dataclass
class RunResult:
    election: Election
    results: dict[str, mixnet.DecryptedBatch]
    intended: Counter
    decrypted: Counter
    seconds: float

    @property
    def tally_matches(self) -> bool:
        return self.intended == self.decrypted


def _has(scenario: Scenario, kind: str) -> Fault | None:
    for f in scenario.faults:
        if f.kind == kind:
            return f
    return None


def run_scenario(config: ElectionConfig, scenario: Scenario, run_dir: str | Path, keygen_mode: str = "joint", network_factory=None) -> RunResult:
    start = time.perf_counter()
    e = Election(config, run_dir, keygen_mode=keygen_mode, network_factory=network_factory)
    (e.private / "scenario.json").write_text(json.dumps(scenario.to_json(), indent=1, sort_keys=True) + "\n")
    misgen = {}
    if f := _has(scenario, "misgenerate"):
        misgen[f.target] = {f"{f.target}:{i}" for i in range(1, config.printers[0].ballots + 1)}
    crashes = sorted(scenario.crashes, key=lambda c: c.down)
    down_done: set[int] = set()
    up_done: set[int] = set()

    def apply_crashes(now: float) -> None:
        for n, c in enumerate(crashes):
            if n not in down_done and now >= c.down:
                down_done.add(n)
                for p in c.peers:
                    e.crash(p)
            if n in down_done and n not in up_done and c.up is not None and now >= c.up:
                up_done.add(n)
                for p in c.peers:
                    e.recover(p, now)

    apply_crashes(0.0)
    e.setup(0.0, misgen)
    if f := _has(scenario, "misprint"):
        e.printers[f.target].faults.misprint = set(e.printers[f.target].queue)
    if _has(scenario, "ebm-mismark"):
        e.ebms[next(iter(e.ebms))].mismark = True

    for day in range(scenario.days):
        todays = [v for v in scenario.voters if v.day == day]
        for slot, plan in enumerate(todays):
            now = (day + 1) * DAY + 3600 + slot * 600
            apply_crashes(now)
            for r in scenario.replacements:
                if r.day == day and r.slot == slot:
                    e.replace_printer(r.old, r.new, now - 60, r.stolen)
            rec = VoterRecord(plan.voter, plan.district, plan.intention)
            e.voters.append(rec)
            if plan.action == "plain":
                e.plain_vote(rec)
                continue
            e.vote(
                rec,
                now,
                confirm=plan.action == "confirm",
                recast=plan.action == "cancel-recast",
                ack=plan.action == "informal",
            )
            if rec.receipt is not None and (f := _has(scenario, "receipt-suppress")) and not f.peers:
                _suppress(e, rec.receipt)
                f.peers = [0]  # once is enough; marks the fault as spent
        end = (day + 2) * DAY - 1
        apply_crashes(end)
        _commit_with_faults(e, scenario, end, day)
    close_at = (scenario.days + 1) * DAY + 3600
    apply_crashes(close_at)
    never_back = {p for n, c in enumerate(crashes) if c.up is None and n in down_done for p in c.peers}
    for i in sorted(e.net.crashed - never_back):
        e.recover(i, close_at)
    if _has(scenario, "vote-substitute-in-mix"):
        view_keys = _largest_batch(e)
        if view_keys:
            key, rows = view_keys
            e.mix_substitute[key] = set(range(rows))
    if _has(scenario, "bad-decrypt-share"):
        e.corrupt_holder = 1
    results = e.close(close_at)
    e.write_outputs(results)
    if _has(scenario, "commit-tamper"):
        tamper_commit(e.board.root)
    return RunResult(e, results, oracle_tally(config, e.voters), decrypted_tally(results), time.perf_counter() - start)


def _commit_with_faults(e: Election, scenario: Scenario, now: float, day: int) -> None:
    reboot = _has(scenario, "peer-reboot")
    drop = _has(scenario, "msg-drop")
    if day == 0 and reboot:
        for p in reboot.peers:
            e.crash(p)
        e.end_of_day(now)
        for p in reboot.peers:
            e.recover(p, now + 1)
        return
    if day == 0 and drop:
        lost = set(drop.peers)
        rule = lambda src, dst, method, params: src == "committer" and dst in lost  # noqa: E731
        e.net.drop_rules.append(rule)
        e.end_of_day(now)
        e.net.drop_rules.remove(rule)
        return
    e.end_of_day(now)


def _suppress(e: Election, receipt: dict) -> None:
    """Every peer silently forgets the vote it just signed a receipt for."""
    serial = receipt["serialNo"]
    for peer in e.peers.values():
        for store in (peer.pending, peer.gossip_items):
            for k in [k for k, it in store.items() if it["msg"]["type"] == "vote" and it["msg"]["serialNo"] == serial]:
                del store[k]
        peer.outbox = [m for m in peer.outbox if not (m["item"]["msg"]["type"] == "vote" and m["item"]["msg"].get("serialNo") == serial)]
    e.log("fault", kind="receipt-suppress", serial=serial)


def _largest_batch(e: Election) -> tuple[str, int] | None:
    from vvote.boardview import load_view

    view = load_view(e.board, e.config, e.registry)
    counts: Counter = Counter()
    for v in view.votes():
        for race in v.races:
            counts[e.config.batch_key(v.district, race)] += 1
    if not counts:
        return None
    key = max(counts, key=lambda k: (counts[k], k))
    return key, counts[key]


def tamper_commit(board_root: str | Path) -> Path:
    """Flip one byte inside the first published commit's data file."""
    files = sorted((Path(board_root) / "commits").glob("*/data.json"))
    if not files:
        raise ConfigError("no published commit to tamper with")
    p = files[0]
    raw = bytearray(p.read_bytes())
    i = raw.index(b'"cid"')
    raw[i + 1] = ord("C")
    p.write_bytes(bytes(raw))
    return p


__all__ = [
    "ACTIONS",
    "FAULT_KINDS",
    "CrashPlan",
    "Fault",
    "Replacement",
    "RunResult",
    "Scenario",
    "VoterPlan",
    "generate_scenario",
    "inject_fault",
    "item_key",
    "run_scenario",
    "tamper_commit",
]


# -- generation-stage trials ------------------------------------------------------------------


def trial_config(ballots: int, fraction: float, seed: str, mode: str = "alg1") -> ElectionConfig:
    """Smallest valid election around one printer, for repeated generation-audit trials."""
    return ElectionConfig.from_dict(
        {
            "name": "generation-trial",
            "seed": seed,
            "mode": mode,
            "rgs_count": 2,
            "wbb": {"peers": 4, "threshold": 3},
            "mix_servers": 1,
            "pool": {"LA": 2, "LC_ATL": 1, "LC_BTL": 1},
            "printers": [{"id": "P1", "ballots": ballots}],
            "districts": [{"name": "D1", "region": "R1", "candidates": ["A", "B"]}],
            "regions": [{"name": "R1", "groups": [{"name": "G1", "candidates": ["C"]}]}],
            "gen_audit_fraction": fraction,
        }
    )


def generation_audit_trial(seed: str, run_dir: str | Path, ballots: int = 100, bad: int = 5, fraction: float = 0.10, mode: str = "alg1") -> bool:
    """Generate one printer's ballots with ``bad`` of them altered, run the
    board-seeded generation audit and the verifier's recheck. True when the
    verifier flags the printer.
    """
    from vvote.boardview import load_view
    from vvote.verifier import _check_gen_audits

    cfg = trial_config(ballots, fraction, seed, mode)
    serials = [f"P1:{i}" for i in range(1, ballots + 1)]
    picks = Drbg(seed).fork("altered").permutation(ballots)[:bad]
    e = Election(cfg, run_dir, keygen_mode="dealer")
    e.setup(0.0, {"P1": {serials[i] for i in picks}})
    view = load_view(e.board, cfg, e.registry)
    return not _check_gen_audits(view, cfg, e.registry).passed
