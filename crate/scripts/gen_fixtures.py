#!/usr/bin/env python3
"""Build complete edge-level evaluation stores consistent with the published lists.

The published lists only describe intra-goal interactions and per-target
counts. This script fills in inter-goal edges so that every list can be
recomputed from the stores, and the headline totals hold:

  expert:    1256 answers = 36 negative + 981 positive + 239 zero;
             116 beautiful / 51 ugly / 2 unevaluated targets
  indicator: 292 synergies + 236 trade-offs (all other pairs nonclassified);
             59 ugly targets, only 8.5 and 17.5 beautiful with a synergy

Output is deterministic for a fixed SEED. Run from the repository root:

    python3 scripts/gen_fixtures.py
"""

import csv
import os
import random
import sys
from collections import Counter, defaultdict
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
LISTS = ROOT / "fixtures" / "lists"
CATALOG = ROOT / "crates" / "core" / "data" / "catalog.csv"
SEED = 20220301

EXPERT_TOTAL = 1256
EXPERT_NEG, EXPERT_POS, EXPERT_ZERO = 36, 981, 239
EXPERT_BEAUTIFUL, EXPERT_UGLY, EXPERT_UNEVALUATED = 116, 51, 2
INDICATOR_SYN, INDICATOR_TRADE = 292, 236
# Trade-off degrees for the ugly targets that List 7 leaves out (59 - 56 = 3).
# 3.C carries a List 6 synergy, so it cannot be beautiful.
INDICATOR_UNLISTED_UGLY = {"3.C": 4, "2.2": 3, "11.3": 3}
INDICATOR_BEAUTIFUL_SYNERGY = {"8.5", "17.5"}


def read_rows(path):
    with open(path, newline="") as f:
        return [r for r in csv.DictReader(line for line in f if not line.startswith("#"))]


def goal(t):
    return int(t.split(".")[0])


def key(t):
    g, s = t.split(".")
    return (int(g), 0, int(s), "") if s.isdigit() else (int(g), 1, 0, s)


def pair(a, b):
    return (a, b) if key(a) < key(b) else (b, a)


def load_pairs(name):
    return [pair(r["target_a"], r["target_b"]) for r in read_rows(LISTS / name)]


def load_counts(name, col):
    return {r["target"]: int(r[col]) for r in read_rows(LISTS / name)}


def degree(edges):
    d = Counter()
    for a, b in edges:
        d[a] += 1
        d[b] += 1
    return d


def realize(residual, forbidden, rng, tries=2000):
    """Randomised Havel-Hakimi over inter-goal pairs avoiding `forbidden`."""
    for _ in range(tries):
        left = {t: r for t, r in residual.items() if r > 0}
        edges = set()
        ok = True
        while left:
            t = max(left, key=lambda x: (left[x], rng.random()))
            cands = [u for u in left if u != t and goal(u) != goal(t)
                     and pair(t, u) not in edges and pair(t, u) not in forbidden]
            if len(cands) < left[t]:
                ok = False
                break
            cands.sort(key=lambda u: (-left[u], rng.random()))
            for u in cands[: left[t]]:
                edges.add(pair(t, u))
                left[u] -= 1
                if left[u] == 0:
                    del left[u]
            del left[t]
        if ok:
            return edges
    raise SystemExit("could not realise degree sequence")


def build_expert(targets, rng):
    neg_intra = set(load_pairs("list1_expert_negative_intra.csv"))
    pos_intra = set(load_pairs("list2_expert_positive_intra.csv"))
    multi_neg = load_counts("list3_expert_multi_negative.csv", "negatives")
    beautiful_pos = load_counts("list4_expert_multi_positive_beautiful.csv", "positives")

    neg_deg = degree(neg_intra)
    pos_deg = degree(pos_intra)
    assert not set(beautiful_pos) & (set(neg_deg) | set(multi_neg))
    for t, c in beautiful_pos.items():
        assert pos_deg[t] <= c, t

    singles = {t for t in neg_deg if t not in multi_neg}
    for t in singles:
        assert neg_deg[t] == 1, t
    # Targets with two or more positives outside List 4 must be ugly.
    forced = {t for t in targets if pos_deg[t] >= 2 and t not in beautiful_pos
              and t not in multi_neg and t not in singles}
    singles |= forced
    rest = [t for t in targets if t not in beautiful_pos and t not in multi_neg
            and t not in singles]
    rng.shuffle(rest)
    n_single = EXPERT_UGLY - len(multi_neg)
    n_low_beautiful = EXPERT_BEAUTIFUL - len(beautiful_pos)
    unevaluated = [t for t in rest if pos_deg[t] == 0][:EXPERT_UNEVALUATED]
    rest = [t for t in rest if t not in unevaluated]
    low_beautiful = [t for t in rest if pos_deg[t] <= 1][:n_low_beautiful]
    rest = [t for t in rest if t not in low_beautiful]
    singles |= set(rest)
    assert len(singles) == n_single, (len(singles), n_single)
    assert len(low_beautiful) == n_low_beautiful

    residual = {t: c - neg_deg[t] for t, c in multi_neg.items()}
    for t in singles:
        residual[t] = 1 - neg_deg[t]
    neg_inter = realize(residual, neg_intra, rng)
    negatives = neg_intra | neg_inter
    assert len(negatives) == EXPERT_NEG

    # Positive inter-goal edges: List 4 degrees are exact, ugly targets absorb the rest.
    ugly = set(multi_neg) | singles
    need = {t: c - pos_deg[t] for t, c in beautiful_pos.items()}
    taken = set(negatives) | set(pos_intra)
    pos_inter = set()
    order = sorted(need, key=lambda t: (-need[t], key(t)))
    n_inter = EXPERT_POS - len(pos_intra)
    for t in order:
        while need[t] > 0:
            partners = [u for u in need if u != t and need[u] > 0 and goal(u) != goal(t)
                        and pair(t, u) not in taken]
            if partners and rng.random() < 0.35:
                u = rng.choice(partners)
                need[u] -= 1
            else:
                u = rng.choice([u for u in sorted(ugly, key=key) if goal(u) != goal(t)
                                and pair(t, u) not in taken])
            e = pair(t, u)
            taken.add(e)
            pos_inter.add(e)
            need[t] -= 1
    ugly_sorted = sorted(ugly, key=key)
    while len(pos_inter) < n_inter:
        a, b = rng.sample(ugly_sorted, 2)
        e = pair(a, b)
        if goal(a) != goal(b) and e not in taken:
            taken.add(e)
            pos_inter.add(e)
    positives = pos_intra | pos_inter
    assert len(positives) == EXPERT_POS

    # Zero edges: every low-beautiful target gets at least one.
    evaluated = sorted(set(targets) - set(unevaluated), key=key)
    zeros = set()
    for t in sorted(low_beautiful, key=key):
        while True:
            u = rng.choice(evaluated)
            e = pair(t, u)
            if u != t and u not in low_beautiful and e not in taken:
                taken.add(e)
                zeros.add(e)
                break
    pool = [t for t in evaluated if t not in low_beautiful]
    while len(zeros) < EXPERT_ZERO:
        a, b = rng.sample(pool, 2)
        e = pair(a, b)
        if e not in taken:
            taken.add(e)
            zeros.add(e)

    rows = [(a, b, -rng.randint(1, 3)) for a, b in negatives]
    rows += [(a, b, rng.randint(1, 3)) for a, b in positives]
    rows += [(a, b, 0) for a, b in zeros]
    rows.sort(key=lambda r: (key(r[0]), key(r[1])))
    assert len(rows) == EXPERT_TOTAL
    return rows


def build_indicator(targets, rng):
    trade_intra = set(load_pairs("list5_indicator_tradeoff_intra.csv"))
    syn_intra = set(load_pairs("list6_indicator_synergy_intra.csv"))
    ugly = load_counts("list7_indicator_ugly.csv", "tradeoffs")
    for t, c in INDICATOR_UNLISTED_UGLY.items():
        assert t not in ugly
        ugly[t] = c
    assert not set(ugly) & INDICATOR_BEAUTIFUL_SYNERGY
    assert sum(ugly.values()) == 2 * INDICATOR_TRADE

    tdeg = degree(trade_intra)
    for t in tdeg:
        assert tdeg[t] <= ugly[t], t
    for t in degree(syn_intra):
        assert t in ugly or t in INDICATOR_BEAUTIFUL_SYNERGY, t

    residual = {t: c - tdeg[t] for t, c in ugly.items()}
    trade_inter = realize(residual, trade_intra | syn_intra, rng)
    tradeoffs = trade_intra | trade_inter
    assert len(tradeoffs) == INDICATOR_TRADE

    taken = tradeoffs | syn_intra
    syn_nodes = sorted(set(ugly) | INDICATOR_BEAUTIFUL_SYNERGY, key=key)
    syn_inter = set()
    # 17.5 has no intra-goal synergy, so it needs an inter-goal one.
    while not any("17.5" in e for e in syn_inter):
        u = rng.choice(syn_nodes)
        if goal(u) != 17 and pair("17.5", u) not in taken:
            syn_inter.add(pair("17.5", u))
            taken.add(pair("17.5", u))
    while len(syn_inter) < INDICATOR_SYN - len(syn_intra):
        a, b = rng.sample(syn_nodes, 2)
        e = pair(a, b)
        if goal(a) != goal(b) and e not in taken:
            taken.add(e)
            syn_inter.add(e)
    synergies = syn_intra | syn_inter

    rows = []
    for a, b in synergies:
        s = rng.randint(1, 4)
        rows.append((a, b, "synergy", s, rng.randint(0, s - 1), rng.randint(0, s - 1)))
    for a, b in tradeoffs:
        t = rng.randint(1, 4)
        rows.append((a, b, "tradeoff", rng.randint(0, t - 1), t, rng.randint(0, t - 1)))
    rows.sort(key=lambda r: (key(r[0]), key(r[1])))
    return rows


def main():
    targets = [r["target"] for r in read_rows(CATALOG)]
    assert len(targets) == 169
    rng = random.Random(SEED)
    expert = build_expert(targets, rng)
    indicator = build_indicator(targets, rng)

    with open(ROOT / "fixtures" / "expert_answers.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["target_a", "target_b", "score", "explanation"])
        for a, b, s in expert:
            w.writerow([a, b, s, "fixture negative" if s < 0 else ""])
    with open(ROOT / "fixtures" / "indicator_results.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["target_a", "target_b", "class", "synergies", "tradeoffs", "nonclassified"])
        w.writerows(indicator)
    print(f"expert answers: {len(expert)}; indicator classified pairs: {len(indicator)}")


if __name__ == "__main__":
    # set iteration order feeds the RNG, so string hashing must be fixed too
    if os.environ.get("PYTHONHASHSEED") != "0":
        os.environ["PYTHONHASHSEED"] = "0"
        os.execv(sys.executable, [sys.executable, *sys.argv])
    main()
