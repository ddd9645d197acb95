#!/usr/bin/env python3
"""Builds the 5-query ranking fixture plus its expected MRR@10 values.

The expected values are computed here exactly the way the MS-MARCO passage
ranking evaluation script computes MRR: every qrels line marks a relevant
document, a query scores 1/rank for the first relevant document within the
top 10, and the mean is taken over judged queries.
"""

import json
import pathlib

FIX = pathlib.Path(__file__).resolve().parent.parent / "fixtures"

# (query, [(doc, relevant_rank_flag)...]) per system; scores descend with rank.
RUNS = {
    "sysA": {
        "q1": ["d3", "d1", "d2", "d4", "d5", "d11", "d6", "d7", "d8", "d9"],
        "q2": ["d2", "d4", "d5", "d7", "d1", "d3", "d6", "d8", "d9", "d10"],
        "q3": ["d5", "d2", "d1", "d4", "d3", "d6", "d7", "d8", "d9", "d10"],
        "q4": ["d1", "d2", "d3", "d4", "d5", "d6", "d7", "d8", "d10", "d11"],
        "q5": ["d9", "d1", "d2", "d3", "d4", "d6", "d5", "d7", "d8", "d10"],
    },
    "sysB": {
        "q1": ["d1", "d3", "d2", "d5", "d4", "d6", "d7", "d8", "d9", "d10"],
        "q2": ["d7", "d1", "d2", "d3", "d4", "d5", "d6", "d8", "d9", "d10"],
        "q3": ["d1", "d4", "d3", "d6", "d7", "d8", "d9", "d10", "d11", "d12"],
        "q4": ["d2", "d1", "d9", "d3", "d4", "d5", "d6", "d7", "d8", "d10"],
        "q5": ["d1", "d2", "d3", "d4", "d5", "d9", "d6", "d7", "d8", "d10"],
    },
}

QRELS = {
    "q1": ["d3", "d11"],
    "q2": ["d7"],
    "q3": ["d2"],
    "q4": ["d9"],
    "q5": ["d5", "d9"],
}


def mrr_at_10(ranked):
    total = 0.0
    for qid in ranked:
        if qid not in QRELS:
            continue
        relevant = set(QRELS[qid])
        for i, doc in enumerate(ranked[qid][:10]):
            if doc in relevant:
                total += 1.0 / (i + 1)
                break
    return total / len(QRELS)


def main():
    run_lines = []
    for system, queries in RUNS.items():
        for qid, docs in queries.items():
            for rank, doc in enumerate(docs, start=1):
                score = 100.0 - rank  # descending, consistent with rank order
                run_lines.append(f"{qid} Q0 {doc} {rank} {score:.1f} {system}")
    (FIX / "msmarco_run.tsv").write_text("\n".join(run_lines) + "\n")

    qrel_lines = [f"{qid} 0 {doc} 1" for qid in QRELS for doc in QRELS[qid]]
    (FIX / "msmarco_qrels.tsv").write_text("\n".join(qrel_lines) + "\n")

    expected = {system: mrr_at_10(queries) for system, queries in RUNS.items()}
    (FIX / "msmarco_expected.json").write_text(json.dumps(expected, indent=1))
    print(expected)


if __name__ == "__main__":
    main()
