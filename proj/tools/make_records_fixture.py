#!/usr/bin/env python3
"""Writes the bundled synthetic farm-survey fixture (data/farm_records.csv).

The rows are invented: six production-system types with plausible Italian
durum wheat intensities, plus a handful of gross outliers. Real survey data
has the same schema and can be dropped in instead.
"""
import argparse
import numpy as np

# name, share, area median (ha), area sigma (log), tractor h/ha (mean, sd),
# N, P, K kg/ha, herbicide, insecticide, fungicide kg ai/ha, regions
TYPES = [
    ("hill_small", 0.30, 2.2, 0.45, (11, 2.0), (70, 15), (35, 8), (6, 4), (0.9, 0.25), (0.06, 0.04), (0.25, 0.10), ["PUG", "BAS", "MOL", "CAM"]),
    ("part_time", 0.28, 1.1, 0.40, (14, 3.0), (55, 15), (25, 8), (4, 3), (0.6, 0.20), (0.03, 0.02), (0.15, 0.08), ["SIC", "PUG", "CAL"]),
    ("conventional", 0.19, 6.4, 0.40, (9, 1.5), (110, 20), (50, 10), (15, 8), (1.4, 0.30), (0.15, 0.06), (0.50, 0.15), ["MAR", "ABR", "LAZ", "TOS"]),
    ("intensive", 0.07, 27.0, 0.35, (6, 1.0), (150, 20), (60, 10), (40, 10), (1.9, 0.30), (0.28, 0.07), (0.95, 0.20), ["EMR", "VEN", "PUG", "TOS"]),
    ("low_input", 0.10, 4.2, 0.50, (10, 2.0), (25, 10), (12, 5), (2, 2), (0.15, 0.10), (0.0, 0.0), (0.05, 0.04), ["SAR", "BAS", "SIC"]),
    ("north_mixed", 0.06, 15.0, 0.35, (7, 1.2), (140, 20), (55, 10), (38, 9), (2.0, 0.3), (0.3, 0.06), (1.1, 0.2), ["EMR", "VEN", "LOM"]),
]

OUTLIERS = [
    (1200.0, 6, 150, 60, 40, 1.9, 0.3, 0.9, "PUG"),
    (3.0, 95, 70, 35, 6, 0.9, 0.05, 0.25, "SIC"),
    (8.0, 9, 950, 50, 15, 1.4, 0.15, 0.5, "MAR"),
    (20.0, 7, 140, 55, 38, 14.0, 0.3, 1.1, "EMR"),
    (2.0, 14, 55, 25, 4, 0.6, 4.5, 0.15, "CAL"),
    (6.0, 10, 110, 400, 15, 1.4, 0.15, 9.0, "LAZ"),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=1800)
    ap.add_argument("--seed", type=int, default=20200101)
    ap.add_argument("--out", default="data/farm_records.csv")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    n = args.rows - len(OUTLIERS)
    shares = np.array([t[1] for t in TYPES])
    counts = np.floor(shares / shares.sum() * n).astype(int)
    counts[0] += n - counts.sum()

    rows = []
    for t, count in zip(TYPES, counts):
        _, _, med, sig, tr, fn, fp, fk, hb, ins, fu, regions = t
        for _ in range(count):
            def pos(ms):
                return max(0.0, rng.normal(*ms)) if ms[1] > 0 else ms[0]
            rows.append((
                med * np.exp(sig * rng.normal()), pos(tr), pos(fn), pos(fp), pos(fk),
                pos(hb), pos(ins), pos(fu), regions[rng.integers(len(regions))],
            ))
    rows.extend(OUTLIERS)
    order = rng.permutation(len(rows))

    with open(args.out, "w", newline="\n") as f:
        f.write("id,area,tractor_hours_per_ha,fert_n,fert_p,fert_k,herbicide,insecticide,fungicide,region\n")
        for i, k in enumerate(order):
            r = rows[k]
            vals = ",".join(f"{v:.4g}" if j == 0 else f"{v:.3f}" for j, v in enumerate(r[:8]))
            f.write(f"R{i + 1:05d},{vals},{r[8]}\n")


if __name__ == "__main__":
    main()
