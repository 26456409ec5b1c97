"""Acceptance criteria, each at its stated scale and tolerance.

Every test records one PASS/FAIL line; the lines are printed together at the
end of the pytest run (see ``conftest.pytest_terminal_summary``).
"""

import itertools
import json
import math
import os
import shutil
import subprocess
import sys
import time
from contextlib import contextmanager

import pytest

from vvote import auditmath, mixnet
from vvote.config import base_id, desk_config
from vvote.crypto import elgamal, group
from vvote.crypto.drbg import Drbg
from vvote.crypto.threshold import keygen_threshold
from vvote.election import Election
from vvote.errors import NoReceipt
from vvote.scenario import DAY, FAULT_KINDS, CrashPlan, generate_scenario, generation_audit_trial, run_scenario
from vvote.vectors import compute_vectors, load_pinned
from vvote.verifier import verify_run_dir
from runs import compact_config, compact_run
from wbb_harness import run_interleaving

RESULTS: list[str] = []


@contextmanager
def criterion(label: str):
    detail: list[str] = []
    try:
        yield detail
    except BaseException as exc:
        RESULTS.append(f"FAIL {label}: {exc!s:.300}")
        raise
    RESULTS.append(f"PASS {label}" + (f" ({'; '.join(detail)})" if detail else ""))


# -- 1 -------------------------------------------------------------------------------

NUMERICS = [
    ("posterior(0.05, 0.03, 100)", lambda: auditmath.posterior(0.05, 0.03, 100), 0.002, 0.0005),
    ("posterior(0.10, 0.03, 100)", lambda: auditmath.posterior(0.10, 0.03, 100), 0.005, 0.0005),
    ("required_rate(0.10, 100, 0.995)", lambda: auditmath.required_rate(0.10, 100, 0.995).rate, 0.030, 0.001),
    ("required_rate(0.50, 100, 0.995)", lambda: auditmath.required_rate(0.50, 100, 0.995).rate, 0.052, 0.001),
    ("required_rate(0.10, 100, 0.95)", lambda: auditmath.required_rate(0.10, 100, 0.95).rate, 0.007, 0.001),
    ("no-prior F=1000 99%", lambda: auditmath.required_rate_no_prior(1000, 0.99), 0.005, 0.0005),
    ("Bentleigh F=261 q=0.10 95%", lambda: auditmath.required_rate(0.10, 261, 0.95).rate, 0.003, 0.0005),
    ("Bentleigh F=261 q=0.10 99.5%", lambda: auditmath.required_rate(0.10, 261, 0.995).rate, 0.012, 0.001),
]


def test_c1_audit_numerics():
    with criterion("C1 audit-rate numerics") as d:
        t = time.perf_counter()
        values = [(name, fn(), want, tol) for name, fn, want, tol in NUMERICS]
        ms = (time.perf_counter() - t) * 1e3
        bad = [f"{n}={v:.5f} (want {w}±{tol})" for n, v, w, tol in values if not abs(v - w) <= tol]
        assert not bad, "; ".join(bad)
        assert ms < 100, f"took {ms:.1f} ms"
        d.append(f"8/8 within tolerance, {ms:.2f} ms")


# -- 2 and 8 -------------------------------------------------------------------------


@pytest.fixture(scope="module")
def desk_runs(tmp_path_factory):
    out = {}
    for mode in ("alg1", "alg2"):
        cfg = desk_config(mode, seed=f"acceptance-{mode}")
        root = tmp_path_factory.mktemp(mode) / "run"
        res = run_scenario(cfg, generate_scenario(cfg, 100), root)
        out[mode] = (root, res, verify_run_dir(root))
    return out


def test_c2_honest_desk_election(desk_runs):
    with criterion("C2 honest 100-voter election, alg1 and alg2") as d:
        for mode, (_, res, report) in desk_runs.items():
            assert report.passed, f"{mode}: failed checks {report.failed}"
            assert res.tally_matches, f"{mode}: decrypted multiset differs from intentions"
            assert res.seconds <= 120, f"{mode}: {res.seconds:.1f}s"
            d.append(f"{mode} {res.seconds:.1f}s, {sum(res.decrypted.values())} rows")


def test_c8_public_files_suffice(desk_runs, tmp_path):
    with criterion("C8 verify from public files only") as d:
        root, _, report = desk_runs["alg1"]
        copy = tmp_path / "run"
        shutil.copytree(root, copy)
        for p in copy.iterdir():
            if p.name != "public":
                shutil.rmtree(p) if p.is_dir() else p.unlink()
        assert [p.name for p in copy.iterdir()] == ["public"]
        again = verify_run_dir(copy)
        assert again.to_json() == report.to_json(), "report changed after deleting non-public files"
        d.append(f"{len(again.checks)} checks identical")


# -- 3 -------------------------------------------------------------------------------

CRASH_TIMINGS = {
    "from setup": (0, None),
    "setup, back on day 1": (0, DAY + 3600 + 2 * 600),
    "whole voting period": (DAY + 3600, None),
    "mid-day, back next day": (DAY + 3600 + 3 * 600, 2 * DAY + 3600 + 600),
    "across the day-1 commit": (2 * DAY - 1, 2 * DAY + 3600),
    "during close": (3 * DAY + 3600, None),
}


def test_c3_crash_tolerance(tmp_path):
    with criterion("C3 crash tolerance") as d:
        cfg = compact_config(seed="crash")
        runs = 0
        for pair in itertools.combinations(range(1, 8), 2):
            for name, (down, up) in CRASH_TIMINGS.items():
                sc = generate_scenario(cfg, 12)
                sc.crashes.append(CrashPlan(list(pair), down, up))
                root = tmp_path / f"r{runs}"
                res = run_scenario(cfg, sc, root, keygen_mode="dealer")
                report = verify_run_dir(root)
                tag = f"peers {pair} {name}"
                assert all(v.receipt and not v.plain for v in res.election.voters), f"{tag}: a voter got no receipt"
                assert report.passed, f"{tag}: {report.failed}"
                assert res.tally_matches, f"{tag}: tally differs"
                shutil.rmtree(root)
                runs += 1
        d.append(f"{runs} two-peer runs all-pass")

        # three peers down: no receipt combines and no commit publishes
        e = Election(cfg, tmp_path / "three", keygen_mode="dealer")
        e.setup(0.0)
        published = len(e.board.commits)
        triples = 0
        for triple in itertools.combinations(range(1, 8), 3):
            for p in triple:
                e.crash(p)
            # a refused serial is voided, so spread the 35 requests over both printers
            with pytest.raises(NoReceipt):
                e.printers[("P1", "P2")[triples % 2]].request_ballot("Bentleigh", DAY + 3600)
            assert not e.commit(2 * DAY - 1).published, f"{triple}: commit published"
            assert len(e.board.commits) == published
            for p in triple:
                e.recover(p, DAY + 3600)
            triples += 1
        d.append(f"{triples} three-peer sets refused")


# -- 4 -------------------------------------------------------------------------------


def test_c4_adversarial_interleavings(tmp_path):
    with criterion("C4 500 adversarial interleavings") as d:
        violations, receipts, published = [], 0, 0
        for seed in range(500):
            out = run_interleaving(seed, tmp_path)
            violations += [f"seed {seed}: {v}" for v in out.violations]
            receipts += len(out.receipts)
            published += out.published
            shutil.rmtree(tmp_path / f"s{seed}")
        assert not violations, "; ".join(violations[:5])
        d.append(f"0 violations, {receipts} receipts, {published} items published")


# -- 5 -------------------------------------------------------------------------------


def test_c5_fault_detection_and_no_false_positives(tmp_path):
    with criterion("C5 fault detection, no false positives") as d:
        named = {}
        for kind in FAULT_KINDS:
            _, report = compact_run(tmp_path / kind, seed=f"fault-{kind}", fault=kind)
            failures = [f for c in report.checks for f in c.failures]
            assert failures, f"{kind}: verifier reported no failure"
            named[kind] = report.failed
        d.append("all 10 faults named: " + ", ".join(f"{k}->{'/'.join(v)}" for k, v in named.items()))
        false = []
        for seed in range(50):
            res, report = compact_run(tmp_path / f"honest{seed}", seed=f"honest-{seed}")
            if not report.passed or not res.tally_matches:
                false.append(f"seed {seed}: {report.failed}")
            shutil.rmtree(tmp_path / f"honest{seed}")
        assert not false, "; ".join(false)
        d.append("0 false positives in 50 honest runs")


# -- 6 -------------------------------------------------------------------------------


def test_c6_audit_statistics(tmp_path):
    with criterion("C6 audit statistics") as d:
        trials, undetected = 2000, 0
        for k in range(trials):
            if not generation_audit_trial(f"stat-{k}", tmp_path / "trial", ballots=100, bad=5, fraction=0.10):
                undetected += 1
        frac = undetected / trials
        se = math.sqrt(0.590 * 0.410 / trials)
        assert abs(frac - 0.590) <= 3 * se, f"undetected {frac:.3f}, want 0.590 ± {3 * se:.3f}"
        d.append(f"undetected {frac:.3f} (±{3 * se:.3f})")

        keys = keygen_threshold(3, 2, b"rpc-trials", "dealer")
        pk = keys.public_key
        detected, n = 0, 1000
        for k in range(n):
            rng = Drbg(f"rpc/{k}")
            rows = [elgamal.encrypt_batch(pk, [base_id("LA", 1 + j)], [group.random_scalar(rng)]) for j in range(4)]
            batch = mixnet.MixBatch("LA/D", 1, rows, [str(j) for j in range(4)])
            servers = [mixnet.MixServer(i, rng.fork(f"s{i}")) for i in (1, 2)]
            servers[0].substitute = {rng.randbelow(4)}
            if mixnet.verify_rpc(mixnet.run_mix(batch, servers, pk), pk):
                detected += 1
        assert detected / n >= 0.25, f"detected {detected}/{n}"
        d.append(f"RPC caught {detected}/{n} single substitutions")


# -- 7 -------------------------------------------------------------------------------


def test_c7_pinned_vectors():
    with criterion("C7 pinned vectors byte-stable") as d:
        pinned = load_pinned()
        assert compute_vectors() == pinned, "native backend differs from pinned vectors"
        env = {**os.environ, "VVOTE_BACKEND": "python"}
        out = subprocess.run([sys.executable, "-m", "vvote.vectors"], capture_output=True, text=True, env=env, check=True).stdout
        assert json.loads(out) == pinned, "pure-Python backend differs from pinned vectors"
        d.append(f"{len(pinned)} groups match on both backends")
