import json
import os
import subprocess
import sys

from vvote import vectors
from vvote.crypto import elgamal
from vvote.crypto.commit import commit


def test_fresh_computation_matches_pinned_file():
    assert vectors.compute_vectors() == vectors.load_pinned()


def test_pure_python_backend_reproduces_pinned_vectors():
    env = {**os.environ, "VVOTE_BACKEND": "python"}
    out = subprocess.run([sys.executable, "-m", "vvote.vectors"], capture_output=True, text=True, env=env, check=True).stdout
    assert json.loads(out) == vectors.load_pinned()


def test_pinned_commitments_and_sort_order_recompute():
    pinned = vectors.load_pinned()
    for c in pinned["commitments"]:
        assert commit(bytes.fromhex(c["message"]), bytes.fromhex(c["witness"])).hex() == c["digest"]
    cts = vectors.sort_ciphertexts(pinned["canonicalSort"]["ciphertexts"])
    assert elgamal.canonical_sort(cts) == pinned["canonicalSort"]["order"]
    assert pinned["bls"]["combined_1_to_5"] == pinned["bls"]["combined_3_to_7"]
