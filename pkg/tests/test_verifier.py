import json
import shutil

import pytest

from vvote.pubwbb import PublicBoard
from vvote.verifier import CHECKS, VerificationReport, check_receipt, reconcile_outputs, verify_public, verify_run_dir
from runs import compact_run


@pytest.fixture(scope="module")
def honest(tmp_path_factory):
    root = tmp_path_factory.mktemp("honest") / "run"
    res, report = compact_run(root, seed="verifier-tests")
    return root, res, report


@pytest.fixture
def copy(honest, tmp_path):
    dst = tmp_path / "run"
    shutil.copytree(honest[0] / "public", dst / "public")
    return dst


def edit_json(path, fn):
    data = json.loads(path.read_text())
    fn(data)
    path.write_text(json.dumps(data))


def test_honest_run_passes_every_check(honest):
    _, res, report = honest
    assert [c.name for c in report.checks] == list(CHECKS)
    assert report.passed, report.to_text()
    assert res.tally_matches
    assert all(report.check(n).checked > 0 for n in ("chain", "items", "receipts", "mix", "decryption"))


def test_report_round_trips_to_files(honest, tmp_path):
    report = honest[2]
    j, t = report.write(tmp_path / "out" / "report.json")
    assert json.loads(j.read_text()) == report.to_json()
    assert t.read_text().startswith("verification: PASS")


def test_verification_is_repeatable(honest):
    assert verify_run_dir(honest[0]).to_json() == honest[2].to_json()


def test_receipt_verdicts(honest):
    root = honest[0]
    pub = root / "public"
    reg = json.loads((pub / "registry.json").read_text())
    board = PublicBoard(pub / "board", bytes.fromhex(reg["wbbJointKey"]))
    receipts = json.loads((pub / "receipts.json").read_text())
    r = receipts[0]
    assert check_receipt(r, board).status == "included"
    assert check_receipt({**r, "preferences": r["preferences"].replace("1", "9", 1)}, board).status == "unsigned-claim"
    assert check_receipt({"serialNo": "x"}, board).status == "unsigned-claim"


def test_missing_board_fails_everything(copy):
    shutil.rmtree(copy / "public" / "board")
    report = verify_run_dir(copy)
    assert report.failed == list(CHECKS)


def test_markoff_mismatch_is_a_reconciliation_failure(copy):
    edit_json(copy / "public" / "markoff.json", lambda d: d.update(Bentleigh=d["Bentleigh"] + 1))
    report = verify_run_dir(copy)
    assert report.failed == ["reconciliation"]


def test_count_file_disagreement_is_named(copy):
    def swap(d):
        k = sorted(k for k in d if len(d[k]) > 1)[0]
        d[k] = list(reversed(d[k]))

    edit_json(copy / "public" / "count.json", swap)
    report = verify_run_dir(copy)
    assert report.failed == ["reconciliation"]
    assert any("count file says" in f for f in report.check("reconciliation").failures)


def test_unsigned_receipt_claim_is_noted_not_failed(copy):
    # a claim the board never signed is no evidence against the board
    edit_json(copy / "public" / "receipts.json", lambda d: d[0].update(peerSig="00" * 48))
    report = verify_run_dir(copy)
    assert report.passed
    assert any("without a valid board signature" in n for n in report.check("receipts").notes)


def test_optional_inputs_may_be_absent(copy):
    pub = copy / "public"
    report = verify_public(pub / "board", pub / "config.json")
    assert report.check("chain").passed and report.check("mix").passed


def test_reconcile_outputs():
    out = {"LA/D#1": ["A", "B"], "LA/D#2": ["B"]}
    assert reconcile_outputs(out, {"LA/D#1": ["A", "B"], "LA/D#2": ["B"]}) == []
    probs = reconcile_outputs(out, {"LA/D#1": ["B", "A"], "LA/D#3": ["A"]})
    assert len(probs) == 3


def test_empty_report_passes():
    assert VerificationReport([]).passed
