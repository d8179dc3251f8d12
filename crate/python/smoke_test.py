"""Smoke test for the seclab_py extension.

Build the module first, e.g.

    cargo build --release -p seclab-py --features extension-module
    cp target/release/libseclab_py.so python/seclab_py.so
"""

import json
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import seclab_py  # noqa: E402


def close(a, b, tol=1e-9):
    return math.isclose(a, b, abs_tol=tol)


def main():
    names = seclab_py.corpus_names()
    assert "ERASURE_HALF" in names and "bi_random" in names

    erasure = seclab_py.Table.corpus("ERASURE_HALF")
    assert erasure.variables == ["X", "Y", "Z"]
    assert close(erasure.entropy("I(X:Y|Z)"), 0.5)

    table = seclab_py.Table.from_json(erasure.to_json())
    report = table.classify()
    assert report["verdicts"]["ubi"] == "yes"
    assert report["verdicts"]["sbi"] == "no"

    assert close(table.intrinsic(restarts=8)["value"], 0.5)
    assert close(table.keycost()["value"], 0.5)
    verdict = table.reversibility()
    assert verdict["status"] == "reversible" and close(verdict["key_value"], 0.5)

    spoiled = seclab_py.Table.corpus("SPOILED_BIT")
    assert spoiled.zero_pattern_scan()[0]["kind"] == "zero_pattern"
    assert spoiled.reversibility()["status"] == "not-reversible"

    partition = seclab_py.Table.corpus("PERFECT_BIT").common_partition("X", "Y")
    assert len(partition["blocks"]) == 2 and close(partition["entropy"], 1.0)

    maxcorr = erasure.maxcorr_report()
    assert close(maxcorr["key_closed_form"], 0.5) and maxcorr["gap"] > 0

    protocol = json.dumps({"rounds": []})
    extended, identity = erasure.run_protocol(protocol)
    assert identity["pass"] and extended.variables == ["X", "Y", "Z"]

    try:
        seclab_py.Table.from_json("{}")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed JSON accepted")

    print("seclab_py smoke test passed")


if __name__ == "__main__":
    main()
