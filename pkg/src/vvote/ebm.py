"""Electronic ballot marker: session start, preference permutation, vote
casting, readback and the plain fallback mode.

Preferences are per race lists of ranks in official candidate order, with 0
meaning unranked. Exactly one of ``LC_ATL`` and ``LC_BTL`` is present.
A permutation maps official index to 0-based printed position.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from vvote.config import ElectionConfig
from vvote.crypto.signatures import SigningKey, bls_verify
from vvote.errors import (
    ExpiryError,
    ForgedBallotError,
    InformalVote,
    Rejected,
    SessionLockError,
    ShapeError,
    VVoteError,
)
from vvote.messages import Receipt, preferences_string, serial_sig_payload, sign_message, start_sig_payload, vote_payload
from vvote.pod import PrintedBallot, WbbContext

Preferences = Mapping[str, Sequence[int]]


@dataclass(frozen=True)
class BallotScan:
    serial: str
    district: str
    serial_sig: bytes
    commit_time: str
    permutation: dict[str, list[int]]
    issued_at: float

    @classmethod
    def of(cls, ballot: PrintedBallot) -> "BallotScan":
        return cls(ballot.serial, ballot.district, ballot.serial_sig, ballot.commit_time, ballot.permutation, ballot.issued_at)


@dataclass
class Session:
    scan: BallotScan
    start_sig: bytes
    closed: bool = False


def permute_preferences(prefs: Sequence[int], pi: Sequence[int]) -> list[int]:
    """``out[pi[k]] = prefs[k]``: the rank for the candidate printed at each position."""
    if len(prefs) != len(pi):
        raise ShapeError(f"{len(prefs)} preferences for {len(pi)} candidates")
    if sorted(pi) != list(range(len(pi))):
        raise ShapeError("permutation is not a bijection")
    out = [0] * len(pi)
    for k, p in enumerate(pi):
        out[p] = prefs[k]
    return out


def unpermute_preferences(permuted: Sequence[int], pi: Sequence[int]) -> list[int]:
    if len(permuted) != len(pi):
        raise ShapeError(f"{len(permuted)} positions for {len(pi)} candidates")
    return [permuted[p] for p in pi]


def formality_warnings(prefs: Preferences, sizes: Mapping[str, int], config: ElectionConfig) -> list[str]:
    """Reasons a preference set would be informal under the configured rules."""
    warnings = []
    for race, ranks in prefs.items():
        rule = config.rules[race]
        marked = sorted(x for x in ranks if x)
        if marked != list(range(1, len(marked) + 1)):
            warnings.append(f"{race}: ranks are not consecutive from 1")
        if rule.exact is not None and len(marked) != rule.exact:
            warnings.append(f"{race}: exactly {rule.exact} mark(s) required")
        need = sizes[race] if rule.min == 0 else min(rule.min, sizes[race])
        if rule.exact is None and len(marked) < need:
            warnings.append(f"{race}: at least {need} preferences required")
    return warnings


def check_shape(prefs: Preferences, sizes: Mapping[str, int]) -> None:
    if "LA" not in prefs or len([r for r in ("LC_ATL", "LC_BTL") if r in prefs]) != 1:
        raise ShapeError("need LA and exactly one of LC_ATL / LC_BTL")
    for race, ranks in prefs.items():
        if race not in sizes:
            raise ShapeError(f"unknown race {race!r}")
        if len(ranks) != sizes[race]:
            raise ShapeError(f"{race}: {len(ranks)} ranks for {sizes[race]} candidates")
        marked = [x for x in ranks if x]
        if any(not isinstance(x, int) or x < 0 or x > sizes[race] for x in ranks) or len(set(marked)) != len(marked):
            raise ShapeError(f"{race}: ranks must be distinct integers in 1..{sizes[race]}")


class EBM:
    def __init__(self, ebm_id: str, key: SigningKey, config: ElectionConfig, wbb: WbbContext) -> None:
        self.id = ebm_id
        self.key = key
        self.config = config
        self.wbb = wbb
        self.mismark = False  # fault hook: swap the first two printed positions of LA

    def start_session(self, scan: BallotScan, now: float) -> Session:
        joint = self.wbb.registry.wbb_joint_key
        if not bls_verify(joint, serial_sig_payload(scan.serial, scan.district), scan.serial_sig):
            raise ForgedBallotError(f"serialSig for {scan.serial} does not verify")
        if now - scan.issued_at > self.config.timing.expiry_s:
            raise ExpiryError(f"{scan.serial} was printed {now - scan.issued_at:.0f}s ago")
        msg = sign_message(
            self.key,
            {"boothID": self.id, "serialNo": scan.serial, "serialSig": scan.serial_sig.hex(), "type": "startevm", "district": scan.district},
        )
        try:
            q = self.wbb.submit(msg, now, lambda ct, d: start_sig_payload(scan.serial, scan.district))
        except Rejected as exc:
            if exc.reason == "expired":
                raise ExpiryError(f"{scan.serial}: board reports the ballot expired") from exc
            if exc.reason == "forged-ballot":
                raise ForgedBallotError(scan.serial) from exc
            if exc.reason in ("session-lock", "clash"):
                raise SessionLockError(f"{scan.serial} cannot start a session ({exc.detail})") from exc
            raise
        return Session(scan, q.signature)

    def cast_vote(self, session: Session, prefs: Preferences, now: float, acknowledge_informal: bool = False) -> Receipt:
        if session.closed:
            raise VVoteError("session already closed")
        scan = session.scan
        sizes = self.config.race_sizes(scan.district)
        check_shape(prefs, sizes)
        warnings = formality_warnings(prefs, sizes, self.config)
        if warnings and not acknowledge_informal:
            raise InformalVote(warnings)
        races = {race: permute_preferences(ranks, scan.permutation[race]) for race, ranks in prefs.items()}
        if self.mismark and len(races["LA"]) > 1:
            races["LA"][0], races["LA"][1] = races["LA"][1], races["LA"][0]
        msg = sign_message(
            self.key,
            {
                "races": races,
                "boothID": self.id,
                "serialNo": scan.serial,
                "serialSig": scan.serial_sig.hex(),
                "type": "vote",
                "startEVMSig": session.start_sig.hex(),
                "district": scan.district,
            },
        )
        pstr = preferences_string(races)
        q = self.wbb.submit(msg, now, lambda ct, d: vote_payload(scan.serial, scan.district, pstr, ct))
        session.closed = True
        fields = {"serialNo": scan.serial, "district": scan.district, "preferences": pstr}
        return Receipt("vote", vote_payload(scan.serial, scan.district, pstr, q.commit_time), q.signature, q.commit_time, fields)


def readback(receipt: Receipt, scan: BallotScan) -> dict[str, list[int]]:
    """Official-order preferences recovered from a receipt and the ballot's permutation."""
    if receipt.fields["serialNo"] != scan.serial:
        raise VVoteError("receipt and ballot serials differ")
    races = json.loads(receipt.fields["preferences"])
    return {race: unpermute_preferences(ranks, scan.permutation[race]) for race, ranks in races.items()}


@dataclass(frozen=True)
class PlainBallot:
    """A vote recorded in plain-marker mode: no serial, no signature."""

    district: str
    preferences: dict[str, list[int]] = field(default_factory=dict)


def fallback_plain(prefs: Preferences, district: str) -> PlainBallot:
    return PlainBallot(district, {r: list(v) for r, v in prefs.items()})
