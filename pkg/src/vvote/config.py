"""Election configuration and the public candidate table derived from it."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any

from vvote.crypto.hashing import NULL_ELEMENT, candidate_id, check_distinct
from vvote.errors import ConfigError

# Race sections of the generic ballot, in column order.
RACES = ("LA", "LC_ATL", "LC_BTL")


@dataclass(frozen=True)
class District:
    name: str
    region: str
    candidates: tuple[str, ...]


@dataclass(frozen=True)
class Group:
    name: str
    candidates: tuple[str, ...]


@dataclass(frozen=True)
class Region:
    name: str
    groups: tuple[Group, ...]

    @property
    def btl_candidates(self) -> tuple[str, ...]:
        return tuple(c for g in self.groups for c in g.candidates)


@dataclass(frozen=True)
class Printer:
    id: str
    ballots: int
    standby: bool = False  # replacement stock, brought online by replace_printer


@dataclass(frozen=True)
class Timing:
    expiry_s: int = 300
    cid_window_s: int = 86400
    confirm_window_s: int = 1200


@dataclass(frozen=True)
class RaceRule:
    """Formality rule: ``min`` ranked (0 = all) and an optional exact count."""

    min: int = 0
    exact: int | None = None


DEFAULT_RULES = {"LA": RaceRule(min=0), "LC_ATL": RaceRule(exact=1), "LC_BTL": RaceRule(min=5)}


@dataclass(frozen=True)
class Layout:
    """Column structure of a generic ballot: one section per race."""

    sizes: tuple[tuple[str, int], ...]
    alg2: bool

    @property
    def n(self) -> int:
        return sum(s for _, s in self.sizes)

    @property
    def columns(self) -> int:
        return self.n + (1 if self.alg2 else 0)

    def size(self, race: str) -> int:
        return dict(self.sizes)[race]

    def offset(self, race: str) -> int:
        off = 0
        for r, s in self.sizes:
            if r == race:
                return off
            off += s
        raise KeyError(race)

    def section(self, race: str) -> range:
        o = self.offset(race)
        return range(o, o + self.size(race))

    @cached_property
    def base_ids(self) -> tuple[bytes, ...]:
        return tuple(base_id(race, k) for race, size in self.sizes for k in range(1, size + 1))


def base_id(race: str, k: int) -> bytes:
    """Element standing for the k-th (1-based) official candidate of ``race``."""
    return candidate_id(f"cand{k}", race)


@dataclass(frozen=True)
class ElectionConfig:
    name: str
    seed: str | None
    mode: str
    rgs_count: int
    wbb_peers: int
    wbb_threshold: int
    mix_servers: int
    pool: dict[str, int]
    printers: tuple[Printer, ...]
    districts: tuple[District, ...]
    regions: tuple[Region, ...]
    timing: Timing = Timing()
    gen_audit_fraction: float = 0.1
    cancel_limit: int = 3
    rules: dict[str, RaceRule] = field(default_factory=lambda: dict(DEFAULT_RULES))
    stations: tuple[str, ...] = ("VPS1",)

    def __post_init__(self) -> None:
        self.validate()

    # -- derived views -------------------------------------------------------

    @cached_property
    def layout(self) -> Layout:
        return Layout(tuple((r, self.pool[r]) for r in RACES), self.mode == "alg2")

    def district(self, name: str) -> District:
        for d in self.districts:
            if d.name == name:
                return d
        raise ConfigError(f"unknown district {name!r}")

    def region(self, name: str) -> Region:
        for r in self.regions:
            if r.name == name:
                return r
        raise ConfigError(f"unknown region {name!r}")

    def race_candidates(self, district: str, race: str) -> tuple[str, ...]:
        """Official-order names for ``race`` on a ballot issued in ``district``."""
        d = self.district(district)
        if race == "LA":
            return d.candidates
        reg = self.region(d.region)
        if race == "LC_ATL":
            return tuple(g.name for g in reg.groups)
        if race == "LC_BTL":
            return reg.btl_candidates
        raise ConfigError(f"unknown race {race!r}")

    def race_sizes(self, district: str) -> dict[str, int]:
        return {r: len(self.race_candidates(district, r)) for r in RACES}

    def batch_key(self, district: str, race: str) -> str:
        """Mix batch for a race on a ballot of ``district``: LA per district, LC per region."""
        scope = district if race == "LA" else self.district(district).region
        return f"{race}/{scope}"

    def candidate_table(self) -> dict[str, Any]:
        """Public table: base elements per race column and name lists per district."""
        return {
            "null": NULL_ELEMENT.hex(),
            "base": {race: [base_id(race, k).hex() for k in range(1, size + 1)] for race, size in self.layout.sizes},
            "districts": {d.name: {r: list(self.race_candidates(d.name, r)) for r in RACES} for d in self.districts},
        }

    # -- validation ----------------------------------------------------------

    def validate(self) -> None:
        n, t = self.wbb_peers, self.wbb_threshold
        if not 3 * t > 2 * n or t > n:
            raise ConfigError(f"threshold must satisfy 2n/3 < t <= n (n={n}, t={t})")
        if self.rgs_count < 2:
            raise ConfigError("at least two randomness generation servers are required")
        if self.mode not in ("alg1", "alg2"):
            raise ConfigError(f"mode must be alg1 or alg2, not {self.mode!r}")
        if self.mix_servers < 1:
            raise ConfigError("at least one mix server is required")
        if not 0 < self.gen_audit_fraction < 1:
            raise ConfigError("gen_audit_fraction must lie in (0, 1)")
        if set(self.pool) != set(RACES) or any(v < 1 for v in self.pool.values()):
            raise ConfigError(f"pool must give a positive size for each of {RACES}")
        if not self.districts or not self.printers:
            raise ConfigError("at least one district and one printer are required")
        names = [d.name for d in self.districts]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate district name")
        if len({p.id for p in self.printers}) != len(self.printers):
            raise ConfigError("duplicate printer id")
        for p in self.printers:
            if ":" in p.id or p.ballots < 1:
                raise ConfigError(f"printer {p.id!r}: ids may not contain ':' and need >= 1 ballot")
        for d in self.districts:
            self.region(d.region)
            for race in RACES:
                m = len(self.race_candidates(d.name, race))
                if m < 1 or m > self.pool[race]:
                    raise ConfigError(f"{d.name}/{race}: {m} candidates but pool size {self.pool[race]}")
                if len(set(self.race_candidates(d.name, race))) != m:
                    raise ConfigError(f"{d.name}/{race}: duplicate candidate name")
        ids = {f"{race}/cand{k}": base_id(race, k) for race, size in self.layout.sizes for k in range(1, size + 1)}
        ids["null"] = NULL_ELEMENT
        check_distinct(ids)

    # -- (de)serialisation ---------------------------------------------------

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ElectionConfig":
        try:
            return cls(
                name=d["name"],
                seed=d.get("seed"),
                mode=d.get("mode", "alg1"),
                rgs_count=int(d["rgs_count"]),
                wbb_peers=int(d["wbb"]["peers"]),
                wbb_threshold=int(d["wbb"]["threshold"]),
                mix_servers=int(d.get("mix_servers", 2)),
                pool={k: int(v) for k, v in d["pool"].items()},
                printers=tuple(Printer(p["id"], int(p["ballots"]), bool(p.get("standby", False))) for p in d["printers"]),
                districts=tuple(District(x["name"], x["region"], tuple(x["candidates"])) for x in d["districts"]),
                regions=tuple(
                    Region(r["name"], tuple(Group(g["name"], tuple(g["candidates"])) for g in r["groups"]))
                    for r in d["regions"]
                ),
                timing=Timing(**d.get("timing", {})),
                gen_audit_fraction=float(d.get("gen_audit_fraction", 0.1)),
                cancel_limit=int(d.get("cancel_limit", 3)),
                rules={**DEFAULT_RULES, **{k: RaceRule(**v) for k, v in d.get("rules", {}).items()}},
                stations=tuple(d.get("stations", ["VPS1"])),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed configuration: {exc}") from exc

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "seed": self.seed,
            "mode": self.mode,
            "rgs_count": self.rgs_count,
            "wbb": {"peers": self.wbb_peers, "threshold": self.wbb_threshold},
            "mix_servers": self.mix_servers,
            "pool": dict(self.pool),
            "printers": [{"id": p.id, "ballots": p.ballots, "standby": p.standby} for p in self.printers],
            "districts": [{"name": d.name, "region": d.region, "candidates": list(d.candidates)} for d in self.districts],
            "regions": [
                {"name": r.name, "groups": [{"name": g.name, "candidates": list(g.candidates)} for g in r.groups]}
                for r in self.regions
            ],
            "timing": {
                "expiry_s": self.timing.expiry_s,
                "cid_window_s": self.timing.cid_window_s,
                "confirm_window_s": self.timing.confirm_window_s,
            },
            "gen_audit_fraction": self.gen_audit_fraction,
            "cancel_limit": self.cancel_limit,
            "rules": {k: {"min": v.min, "exact": v.exact} for k, v in self.rules.items()},
            "stations": list(self.stations),
        }

    @classmethod
    def load(cls, path: str | Path) -> "ElectionConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def replace(self, **changes: Any) -> "ElectionConfig":
        d = self.to_dict()
        d.update(changes)
        return ElectionConfig.from_dict(d)


def desk_config(mode: str = "alg1", seed: str | None = "desk", **overrides: Any) -> ElectionConfig:
    """The standard desk-scale election: 3 districts in 2 regions, G=3, 7 peers (t=5)."""
    d: dict[str, Any] = {
        "name": "desk-election",
        "seed": seed,
        "mode": mode,
        "rgs_count": 3,
        "wbb": {"peers": 7, "threshold": 5},
        "mix_servers": 2,
        "pool": {"LA": 5, "LC_ATL": 3, "LC_BTL": 8},
        "printers": [{"id": "P1", "ballots": 80}, {"id": "P2", "ballots": 80}],
        "districts": [
            {"name": "Bentleigh", "region": "South", "candidates": ["Abbott", "Brown", "Chen", "Dunn"]},
            {"name": "Carrum", "region": "South", "candidates": ["Evans", "Fox", "Gill", "Hart", "Irwin"]},
            {"name": "Prahran", "region": "Inner", "candidates": ["Jones", "Khan", "Lee"]},
        ],
        "regions": [
            {
                "name": "South",
                "groups": [
                    {"name": "Group A", "candidates": ["Mills", "Nash", "Ortiz"]},
                    {"name": "Group B", "candidates": ["Price", "Quinn", "Reid"]},
                    {"name": "Group C", "candidates": ["Shaw", "Tran"]},
                ],
            },
            {
                "name": "Inner",
                "groups": [
                    {"name": "Group D", "candidates": ["Usher", "Vance", "Walsh"]},
                    {"name": "Group E", "candidates": ["Xu", "Young", "Zane"]},
                ],
            },
        ],
        "gen_audit_fraction": 0.1,
    }
    d.update(overrides)
    return ElectionConfig.from_dict(d)
