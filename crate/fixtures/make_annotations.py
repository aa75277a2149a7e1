"""Builds query_log_annotations.jsonl: 598 three-annotator items whose
majority-vote labels follow the query-log intent mix."""
import json
import random

CODES = ["PC", "Ch", "Pe", "Pr", "In", "O", "M"]
MAJORITY = {"PC": 127, "Ch": 328, "Pe": 54, "Pr": 24, "In": 1, "O": 4}
MULTI_BY_VOTE = 29
ALL_DISTINCT = 31
UNANIMOUS_SHARE = 0.70
PAIRS = [("Ch", "Pe")] * 6 + [("Ch", "Pr"), ("Pe", "Pr"), ("PC", "Ch"), ("PC", "Pe")] + [("Ch", "Pe", "Pr")]
EXPLAIN = {"O": "does not fit any category", "M": "several intents at once"}


def label(code, rng, intents=None):
    out = {"value": code}
    if code in EXPLAIN:
        out["explanation"] = EXPLAIN[code]
    if code == "M":
        out["potential_intents"] = list(intents or rng.choice(PAIRS))
    return out


def other_than(code, rng):
    pool = [c for c in ["PC", "Ch", "Pe", "Pr", "M"] if c != code]
    return rng.choice(pool)


def items(rng):
    out = []
    for code, n in MAJORITY.items():
        for _ in range(n):
            if rng.random() < UNANIMOUS_SHARE:
                out.append([label(code, rng) for _ in range(3)])
            else:
                out.append([label(code, rng), label(code, rng), label(other_than(code, rng), rng)])
    for k in range(MULTI_BY_VOTE):
        intents = rng.choice(PAIRS)
        third = label("M", rng, intents) if k % 3 == 0 else label(rng.choice(intents), rng)
        out.append([label("M", rng, intents), label("M", rng, intents), third])
    for _ in range(ALL_DISTINCT):
        a, b, c = rng.choice([("Ch", "Pe", "Pr"), ("Ch", "Pe", "PC"), ("Ch", "Pr", "PC"), ("Ch", "Pe", "M")])
        out.append([label(a, rng), label(b, rng), label(c, rng, ("Ch", "Pr"))])
    rng.shuffle(out)
    for labels in out:
        rng.shuffle(labels)
    return out


def kappa(all_items):
    k = len(CODES)
    n = 3
    totals = [0] * k
    p_bar = 0.0
    for labels in all_items:
        row = [0] * k
        for l in labels:
            row[CODES.index(l["value"])] += 1
        totals = [t + r for t, r in zip(totals, row)]
        p_bar += (sum(r * r for r in row) - n) / (n * (n - 1))
    p_bar /= len(all_items)
    shares = [t / (n * len(all_items)) for t in totals]
    p_e = sum(s * s for s in shares)
    return (p_bar - p_e) / (1 - p_e)


def main():
    rng = random.Random(598)
    data = items(rng)
    with open("query_log_annotations.jsonl", "w") as f:
        for i, labels in enumerate(data):
            f.write(json.dumps({"item_id": f"log{i:04d}", "labels": labels}) + "\n")
    print(len(data), round(kappa(data), 4))


if __name__ == "__main__":
    main()
