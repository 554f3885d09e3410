#!/usr/bin/env python3
"""Standalone kNN evaluation oracle.

Input JSON: k, dim, ids, matrix (row-major hex floats, rows already unit-norm),
gallery, queries, labels. Output JSON: accuracies plus per-query neighbors and
votes, scores as hex floats.
"""
import json
import sys


def main(src, dst):
    with open(src) as f:
        doc = json.load(f)
    k, dim, ids = doc["k"], doc["dim"], doc["ids"]
    values = [float.fromhex(x) for x in doc["matrix"]]
    rows = {vid: values[i * dim:(i + 1) * dim] for i, vid in enumerate(ids)}
    order = {vid: i for i, vid in enumerate(ids)}
    labels = doc["labels"]

    out_queries = []
    hits_major = hits_w1 = hits_w5 = 0
    for q in doc["queries"]:
        qv = rows[q]
        scored = []
        seen = set()
        for g in doc["gallery"]:
            if g == q or g in seen:
                continue
            seen.add(g)
            s = 0.0
            for a, b in zip(qv, rows[g]):
                s += a * b
            scored.append((g, s))
        scored.sort(key=lambda e: (-e[1], order[e[0]]))
        top = scored[:k]

        counts, sums, weights = {}, {}, {}
        for g, s in top:
            lab = labels[g]
            counts[lab] = counts.get(lab, 0) + 1
            sums[lab] = sums.get(lab, 0.0) + s
            weights[lab] = weights.get(lab, 0.0) + max(s, 0.0)
        majority = sorted(counts, key=lambda lab: (-counts[lab], -sums[lab], lab))[0]
        weighted = sorted(weights.items(), key=lambda e: (-e[1], e[0]))

        truth = labels[q]
        hits_major += majority == truth
        hits_w1 += weighted[0][0] == truth
        hits_w5 += truth in [lab for lab, _ in weighted[:5]]
        out_queries.append({
            "query_id": q,
            "neighbors": [[g, s.hex()] for g, s in top],
            "majority": majority,
            "weighted": [[lab, w.hex()] for lab, w in weighted],
        })

    n = len(doc["queries"])
    report = {
        "k": k,
        "acc1_majority": hits_major / n,
        "acc1_weighted": hits_w1 / n,
        "acc5_weighted": hits_w5 / n,
        "queries": out_queries,
    }
    with open(dst, "w") as f:
        json.dump(report, f)


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
