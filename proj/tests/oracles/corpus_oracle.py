#!/usr/bin/env python3
"""Summary statistics (phrases, sentences, clauses, words, score) for a corpus.

Counts come from a tokenizer written here from the rules alone; scores are
the hand-assigned labels in the .scores file. Writes or checks the expected
JSON that the acceptance test compares against.
"""
import argparse
import json
import re
import string
import sys
from fractions import Fraction

NAMES = ["Phrases", "Sentences", "Clauses", "Words", "Score"]


def words(clause):
    out = []
    for tok in clause.split():
        tok = tok.strip(string.punctuation)
        if tok:
            out.append(tok)
    return out


def counts(text):
    phrases = [b for b in re.split(r"\n[ \t\r\f\v]*\n", text) if b.strip()]
    n_phr = n_sent = n_cl = n_w = 0
    for block in phrases:
        # sentence ends: . ! ? before whitespace, end, or another terminator
        sentences = re.split(r"[.!?](?=\s|$|[.!?])", block)
        got_sentence = False
        for s in sentences:
            # clause ends: , ; always, : only before whitespace or end
            clauses = [c for c in re.split(r"[,;]|:(?=\s|$)", s) if words(c)]
            if clauses:
                got_sentence = True
                n_sent += 1
                n_cl += len(clauses)
                n_w += sum(len(words(c)) for c in clauses)
        if got_sentence:
            n_phr += 1
    return n_phr, n_sent, n_cl, n_w


def mean_text(values):
    q = Fraction(sum(values), len(values)) * 100
    hundredths = int(q + Fraction(1, 2)) if q >= 0 else -int(-q + Fraction(1, 2))
    sign = "-" if hundredths < 0 else ""
    h = abs(hundredths)
    return f"{sign}{h // 100}.{h % 100:02d}"


def median_text(values):
    v = sorted(values)
    n = len(v)
    if n % 2:
        return str(v[n // 2])
    twice = v[n // 2 - 1] + v[n // 2]
    return str(twice // 2) if twice % 2 == 0 else f"{twice // 2}.5"


def statistics(rows):
    if not rows:
        return None
    out = []
    for k, name in enumerate(NAMES):
        col = [r[k] for r in rows]
        out.append({"name": name, "max": max(col), "min": min(col),
                    "mean": mean_text(col), "median": median_text(col)})
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("corpus")
    ap.add_argument("scores")
    ap.add_argument("--write", help="write expected statistics here")
    ap.add_argument("--check", help="compare with this expected file")
    args = ap.parse_args()

    lines = [l.rstrip("\r") for l in open(args.corpus, encoding="utf-8").read().split("\n")]
    lines = [l for l in lines if l.strip()]
    labels = [int(x) for x in open(args.scores).read().split()]
    if len(labels) != len(lines):
        sys.exit(f"{len(lines)} inputs but {len(labels)} score labels")
    rows = [counts(l) + (s,) for l, s in zip(lines, labels)]
    result = {"inputs": len(rows), "statistics": statistics(rows)}

    if args.write:
        with open(args.write, "w") as f:
            json.dump(result, f, indent=2)
            f.write("\n")
    if args.check:
        expected = json.load(open(args.check))
        if expected != result:
            print("expected file is stale:\n" + json.dumps(result, indent=2))
            return 1
        print("expected statistics agree with the oracle")
    if not args.write and not args.check:
        print(json.dumps(result, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
