#!/usr/bin/env python3
"""Writes the bundled baseline world (data/world_baseline.cfg).

Quantities are illustrative (t/season, EUR/t). Every market is balanced at
its reference price by sizing one exclusive buyer, except Italy's market,
where the balancing buyer absorbs what Italy's deficit leaves.
"""
import argparse

LOCATIONS = ["italy", "western_europe", "eastern_med", "north_africa", "north_america",
             "middle_east", "black_sea", "oceania", "south_america"]

# Symmetric transport costs (EUR/t) between locations.
DIST = [
    [0, 18, 22, 20, 45, 30, 28, 60, 55],
    [18, 0, 30, 22, 40, 38, 32, 62, 50],
    [22, 30, 0, 24, 52, 16, 18, 58, 60],
    [20, 22, 24, 0, 48, 26, 30, 64, 56],
    [45, 40, 52, 48, 0, 58, 55, 50, 30],
    [30, 38, 16, 26, 58, 0, 20, 45, 65],
    [28, 32, 18, 30, 55, 20, 0, 55, 66],
    [60, 62, 58, 64, 50, 45, 55, 0, 40],
    [55, 50, 60, 56, 30, 65, 66, 40, 0],
]

# id, name, role, supply t, demand t, location
REGIONS = [
    ("ITA", "Italy", "both", 4.0e6, 6.5e6, 0),
    ("FRA", "France", "producer", 1.8e6, 0, 1),
    ("ESP", "Spain", "both", 0.9e6, 1.1e6, 1),
    ("GRC", "Greece", "producer", 1.0e6, 0, 2),
    ("TUR", "Turkey", "both", 3.6e6, 3.2e6, 2),
    ("DEU", "Germany", "buyer", 0, 0.5e6, 1),
    ("ALG", "Algeria", "buyer", 0, 0, 3),
    ("MOR", "Morocco", "buyer", 0, 1.2e6, 3),
    ("TUN", "Tunisia", "buyer", 0, 0, 3),
    ("LBY", "Libya", "buyer", 0, 0.4e6, 3),
    ("EGY", "Egypt", "buyer", 0, 0, 5),
    ("SYR", "Syria", "both", 1.2e6, 1.0e6, 5),
    ("IRN", "Iran", "both", 1.0e6, 1.3e6, 5),
    ("IND", "India", "producer", 1.5e6, 0, 5),
    ("CAN", "Canada", "producer", 5.5e6, 0, 4),
    ("USA", "United States", "both", 1.9e6, 2.6e6, 4),
    ("MEX", "Mexico", "producer", 1.6e6, 0, 4),
    ("VEN", "Venezuela", "buyer", 0, 0, 8),
    ("KAZ", "Kazakhstan", "producer", 0.9e6, 0, 6),
    ("RUS", "Russia", "producer", 1.0e6, 0, 6),
    ("AUS", "Australia", "producer", 0.5e6, 0, 7),
    ("JPN", "Japan", "buyer", 0, 0, 7),
    ("ARG", "Argentina", "producer", 0.3e6, 0, 8),
    ("CHL", "Chile", "buyer", 0, 0, 8),
]

# id, reference price, producers, buyers, balancing buyer (None: balance Italy's market)
MARKETS = [
    ("MED", 280, ["ITA", "FRA", "GRC", "CAN", "KAZ"], ["ITA", "TUN"], "TUN"),
    ("MAGHREB", 290, ["FRA", "CAN", "RUS"], ["ALG", "MOR"], "ALG"),
    ("NAFTA", 260, ["CAN", "USA", "MEX"], ["USA", "VEN"], "VEN"),
    ("ANATOLIA", 270, ["TUR", "KAZ"], ["TUR"], "TUR"),
    ("LEVANT", 275, ["SYR", "GRC", "TUR"], ["EGY"], "EGY"),
    ("GULF", 285, ["IND", "RUS"], ["IRN"], "IRN"),
    ("CASPIAN", 265, ["KAZ", "IRN"], ["LBY"], "LBY"),
    ("PACIFIC", 300, ["AUS", "CAN"], ["JPN"], "JPN"),
    ("ANDES", 270, ["ARG", "MEX"], ["CHL"], "CHL"),
    ("IBERIA", 280, ["ESP", "MEX"], ["ESP"], "ESP"),
    ("NORTH_SEA", 285, ["FRA", "USA"], ["DEU"], "DEU"),
    ("SUBCONTINENT", 255, ["IND", "AUS"], ["SYR"], "SYR"),
]

SUPPLY_ELASTICITY = 0.3
DEMAND_ELASTICITY = 0.2
ITALY_DEMAND_SLOPE = -3000.0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/world_baseline.cfg")
    args = ap.parse_args()

    reg = {r[0]: dict(id=r[0], name=r[1], role=r[2], supply=r[3], demand=r[4], loc=r[5]) for r in REGIONS}
    n_sell = {k: sum(k in m[2] for m in MARKETS) for k in reg}
    n_buy = {k: sum(k in m[3] for m in MARKETS) for k in reg}
    ref_of = {}
    for m in MARKETS:
        for k in m[2] + m[3]:
            ref_of.setdefault(k, m[1])

    def shift(m, b):
        return sum(DIST[reg[p]["loc"]][reg[b]["loc"]] for p in m[2]) / len(m[2])

    for k, r in reg.items():
        ref = ref_of[k]
        r["supply_slope"] = 0.0 if k == "ITA" else SUPPLY_ELASTICITY * r["supply"] / ref
        r["demand_slope"] = ITALY_DEMAND_SLOPE if k == "ITA" else -DEMAND_ELASTICITY * r["demand"] / ref

    # Balancing buyers are exclusive to their market: solve share*(D + slope*shift) = gap with
    # slope = -e*D/ref, i.e. D = gap / (share*(1 - e*shift/ref)).
    for m in MARKETS:
        bal = m[4]
        supply = sum(reg[p]["supply"] / n_sell[p] for p in m[2])
        demand = 0.0
        for b in m[3]:
            if b == bal:
                continue
            demand += (reg[b]["demand"] + reg[b]["demand_slope"] * shift(m, b)) / n_buy[b]
        gap = supply - demand
        if gap <= 0:
            raise SystemExit(f"market {m[0]} cannot be balanced (gap {gap:.4g})")
        r = reg[bal]
        if n_buy[bal] != 1:
            raise SystemExit(f"balancing buyer {bal} must be exclusive")
        ratio = 1 - DEMAND_ELASTICITY * shift(m, bal) / m[1]
        r["demand"] = gap / ratio
        r["demand_slope"] = -DEMAND_ELASTICITY * r["demand"] / m[1]

    with open(args.out, "w", newline="\n") as f:
        f.write("# Baseline world: 24 regions, 12 markets. Illustrative quantities (t per season,\n")
        f.write("# EUR/t); every market clears at its reference price when Italy supplies its base.\n")
        f.write("reference_price = 280\nprice_cap = 10000\nitaly_region = ITA\nitaly_market = MED\n")
        f.write("italy_price_band = 150, 450\nexpected_regions = 24\nexpected_markets = 12\n")
        f.write("clearing_order = " + ", ".join(m[0] for m in MARKETS) + "\n\n")
        for k, r in reg.items():
            f.write(f"[region.{k}]\nname = {r['name']}\nrole = {r['role']}\n")
            if r["role"] != "buyer":
                f.write(f"base_supply = {r['supply']:.6g}\nsupply_slope = {r['supply_slope']:.6g}\n")
            if r["role"] != "producer":
                f.write(f"base_demand = {r['demand']:.10g}\ndemand_slope = {r['demand_slope']:.10g}\n")
            f.write(f"location = {r['loc']}\n\n")
        for m in MARKETS:
            f.write(f"[market.{m[0]}]\nreference_price = {m[1]}\n")
            f.write("producers = " + ", ".join(m[2]) + "\nbuyers = " + ", ".join(m[3]) + "\n\n")
        f.write("# Rows: origin location; columns: destination. "
                + ", ".join(f"{i} {n}" for i, n in enumerate(LOCATIONS)) + "\n")
        f.write(f"[transport]\nlocations = {len(LOCATIONS)}\n")
        for i, row in enumerate(DIST):
            f.write(f"from.{i} = " + ", ".join(str(v) for v in row) + "\n")


if __name__ == "__main__":
    main()
