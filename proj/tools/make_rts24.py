#!/usr/bin/env python3
"""Write fixtures/rts24.json and fixtures/rts24_series.csv.

Reduced RTS-79 style 24-bus system: bus loads, unit list, branch data and the
weekly/daily/hourly load shape follow the 1979 test system. Solar capacity
factors and the price curve are synthetic and seeded.
"""
import csv
import json
import math
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "fixtures")

BUS_LOAD = [108, 97, 180, 74, 71, 136, 125, 171, 175, 195, 0, 0,
            265, 194, 317, 100, 0, 333, 181, 128, 0, 0, 0, 0]

# (bus 1-based, capacity MW, count, mttf h, mttr h)
UNITS = [
    (1, 20, 2, 450, 50), (1, 76, 2, 1960, 40),
    (2, 20, 2, 450, 50), (2, 76, 2, 1960, 40),
    (7, 100, 3, 1200, 50),
    (13, 197, 3, 950, 50),
    (15, 12, 5, 2940, 60), (15, 155, 1, 960, 40),
    (16, 155, 1, 960, 40),
    (18, 400, 1, 1100, 150),
    (21, 400, 1, 1100, 150),
    (22, 50, 6, 1980, 20),
    (23, 155, 2, 960, 40), (23, 350, 1, 1150, 100),
]

# (from, to, reactance p.u., rating MW), 1-based
LINES = [
    (1, 2, .0139, 175), (1, 3, .2112, 175), (1, 5, .0845, 175), (2, 4, .1267, 175),
    (2, 6, .1920, 175), (3, 9, .1190, 175), (3, 24, .0839, 400), (4, 9, .1037, 175),
    (5, 10, .0883, 175), (6, 10, .0605, 175), (7, 8, .0614, 175), (8, 9, .1651, 175),
    (8, 10, .1651, 175), (9, 11, .0839, 400), (9, 12, .0839, 400), (10, 11, .0839, 400),
    (10, 12, .0839, 400), (11, 13, .0476, 500), (11, 14, .0418, 500), (12, 13, .0476, 500),
    (12, 23, .0966, 500), (13, 23, .0865, 500), (14, 16, .0389, 500), (15, 16, .0173, 500),
    (15, 21, .0490, 500), (15, 21, .0490, 500), (15, 24, .0519, 500), (16, 17, .0259, 500),
    (16, 19, .0231, 500), (17, 18, .0144, 500), (17, 22, .1053, 500), (18, 21, .0259, 500),
    (18, 21, .0259, 500), (19, 20, .0396, 500), (19, 20, .0396, 500), (20, 23, .0216, 500),
    (20, 23, .0216, 500), (21, 22, .0678, 500),
]

WEEKLY = [86.2, 90.0, 87.8, 83.4, 88.0, 84.1, 83.2, 80.6, 74.0, 73.7, 71.5, 72.7, 70.4,
          75.0, 72.1, 80.0, 75.4, 83.7, 87.0, 88.0, 85.6, 81.1, 90.0, 88.7, 89.6, 86.1,
          75.5, 81.6, 80.1, 88.0, 72.2, 77.6, 80.0, 72.9, 72.6, 70.5, 78.0, 69.5, 72.4,
          72.4, 74.3, 74.4, 80.0, 88.1, 88.5, 90.9, 94.0, 89.0, 94.2, 97.0, 100.0, 95.2]
DAILY = [93, 100, 98, 96, 94, 77, 75]
HOURLY = {
    ("winter", False): [67, 63, 60, 59, 59, 60, 74, 86, 95, 96, 96, 95, 95, 95, 93, 94, 99, 100, 100, 96, 91, 83, 73, 63],
    ("winter", True): [78, 72, 68, 66, 64, 65, 66, 70, 80, 88, 90, 91, 90, 88, 87, 87, 91, 100, 99, 97, 94, 92, 87, 81],
    ("summer", False): [64, 60, 58, 56, 56, 58, 64, 76, 87, 95, 99, 100, 99, 100, 100, 97, 96, 96, 93, 92, 92, 93, 87, 72],
    ("summer", True): [74, 70, 66, 65, 64, 62, 62, 66, 81, 86, 91, 93, 93, 92, 91, 91, 92, 94, 95, 95, 100, 93, 88, 80],
    ("spring", False): [63, 62, 60, 58, 59, 65, 72, 85, 95, 99, 100, 99, 93, 92, 90, 88, 90, 92, 96, 98, 96, 90, 80, 70],
    ("spring", True): [75, 73, 69, 66, 65, 65, 68, 74, 83, 89, 92, 94, 91, 90, 90, 86, 85, 88, 92, 100, 97, 95, 90, 85],
}


def season(week):
    if week < 8 or week >= 43:
        return "winter"
    if 17 <= week < 30:
        return "summer"
    return "spring"


def load_shape():
    out = []
    for w in range(52):
        for d in range(7):
            prof = HOURLY[(season(w), d >= 5)]
            for h in range(24):
                out.append(WEEKLY[w] * DAILY[d] * prof[h] / 1e6)
    while len(out) < 8760:
        out.append(out[len(out) - 24])
    return out


def solar_shape(rng):
    out = []
    for day in range(365):
        seasonal = 0.75 + 0.25 * math.cos(2 * math.pi * (day - 172) / 365)
        cloud = rng.uniform(0.35, 1.0)
        for h in range(24):
            s = math.sin(math.pi * (h + 0.5 - 6) / 13) if 6 <= h < 19 else 0.0
            out.append(round(max(0.0, s) * seasonal * cloud, 4))
    return out


def main():
    rng = random.Random(79)
    load = load_shape()
    solar = solar_shape(rng)
    price = [round(15 + 70 * x ** 3, 3) for x in load]
    with open(os.path.join(OUT, "rts24_series.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["load", "solar", "price"])
        for row in zip(load, solar, price):
            w.writerow([f"{row[0]:.6f}", row[1], row[2]])

    pv = sorted({u[0] - 1 for u in UNITS})
    doc = {
        "buses": [
            {"id": i, "kind": "PV" if i in pv else "PQ",
             "load_series": "load", "load_scale": BUS_LOAD[i]}
            for i in range(24)
        ],
        "lines": [{"from": a - 1, "to": b - 1, "reactance": x, "flow_limit": r} for a, b, x, r in LINES],
        "cg_units": [{"bus": b - 1, "capacity": c, "mttf": f, "mttr": r}
                     for b, c, n, f, r in UNITS for _ in range(n)],
        "rg_units": [],
        "ges_units": [],
        "series_files": ["rts24_series.csv"],
        "study": {
            "horizon_hours": 8760,
            "chance_level": 0.05,
            "seed": 2024,
            "years": 1,
            "scenarios": 50,
            "price_series": "price",
            "res_penetration": 0.3,
            "rg_template": {"capacity_factor_series": "solar", "mttf": 1000, "mttr": 0},
            "ges_fleet": {
                "placement": "bundled-with-rg",
                "power_fraction": 0.3,
                "duration_hours": 4,
                "template": {"name": "ES", "kind": "ES-R", "eta_c": 0.9, "eta_d": 0.9,
                             "self_discharge": 0.002, "soc_init": 0.4, "soc_min": 0.0, "soc_max": 1.0,
                             "for_rate": 0.05, "outage_mttr": 24,
                             "degradation": {"enabled": True, "life_cycles": 4000, "soh_end": 0.8,
                                             "kappa_mean": 0.5, "kappa_std": 0.1}},
            },
            "epsc_template": {"name": "ES", "kind": "ES-D", "p_charge_max": 1, "energy_rated": 4,
                              "eta_c": 0.9, "eta_d": 0.9, "self_discharge": 0.002, "soc_init": 0.4,
                              "for_rate": 0.05, "outage_mttr": 24},
        },
    }
    with open(os.path.join(OUT, "rts24.json"), "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
