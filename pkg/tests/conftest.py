"""Shared pytest configuration.

Prints a one-line verdict per acceptance criterion at the end of the
run, derived from the outcomes of the ``test_criterion_*`` functions.
"""

import re

CRITERIA = {
    1: "sampler invariants hold after each of 100 sweeps on a 200-doc corpus, under 10 s",
    2: "removed and added words keep exact zero counts through 50 extra sweeps",
    3: "seed words never leave their topic, at init and after 100 sweeps",
    4: "order-swap penalty matches worked examples; installed layers are bit-exact",
    5: "suggestion scores, embeddings, and ranking match brute force to 1e-12",
    6: "relevance sampling: exact 0.5 symmetric case, hand oracle to 1e-9, counts conserve",
    7: "auto-added words match or beat plain training on coherence and precision, 4 of 5 seeds",
    8: "three disjoint planted topics recovered with purity >= 0.8 in 4 of 5 seeds",
    9: "model tree branches as expected; archives round-trip with bit-identical resampling",
    10: "equidistant topics map to an equilateral triangle; divergence edge cases exact",
    11: "one sweep over 20k documents stays within the 4 s budget",
    12: "full API loop: ingest, seed, train, refine, apply; failures leave the tree intact",
    13: "browser client compiles and its recorded-API window tests pass end to end",
}

_PATTERN = re.compile(r"test_acceptance.*::test_criterion_(\d+)")
_RANK = {"FAIL": 2, "PASS": 1, "SKIP": 0}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    verdicts: dict[int, str] = {}
    words = {"passed": "PASS", "failed": "FAIL", "error": "FAIL", "skipped": "SKIP"}
    for outcome, word in words.items():
        for report in terminalreporter.stats.get(outcome, []):
            match = _PATTERN.search(getattr(report, "nodeid", ""))
            if match:
                num = int(match.group(1))
                if _RANK[word] >= _RANK.get(verdicts.get(num, "SKIP"), 0):
                    verdicts[num] = word
    if not verdicts:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for num in sorted(verdicts):
        desc = CRITERIA.get(num, "")
        terminalreporter.write_line(f"{verdicts[num]} criterion {num:>2}: {desc}")
