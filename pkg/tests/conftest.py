import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

# criterion number -> (ok, detail); filled by test_acceptance.py
ACCEPTANCE = {}

CRITERIA = {
    1: "structure: dim, simple head, socle",
    2: "classification of Z and L",
    3: "wall crossing",
    4: "irreducibility",
    5: "duality",
    6: "linkage containment",
    7: "rank-1 extensions and reciprocity",
    8: "multiplicities through V and full faithfulness",
    9: "brute-force oracles",
}


@pytest.fixture
def acceptance():
    def record(n, ok, detail=""):
        ACCEPTANCE[n] = (bool(ok), detail)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(CRITERIA):
        if n not in ACCEPTANCE:
            tr.write_line(f"criterion {n} [{CRITERIA[n]}]: NOT RUN")
            continue
        ok, detail = ACCEPTANCE[n]
        line = f"criterion {n} [{CRITERIA[n]}]: {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f" ({detail})"
        tr.write_line(line)
