#!/usr/bin/env python3
"""Writes the bundled scenario documents into crates/core/scenarios/."""

from fractions import Fraction
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "crates" / "core" / "scenarios"


def fmt_prob(p):
    return repr(float(p))


def normalise(occ):
    """Rounds to 6 decimals and pushes the residue onto the largest entry so the sum is exact."""
    occ = {k: Fraction(v).limit_denominator(10**6) for k, v in occ.items() if v > 0}
    total = sum(occ.values())
    occ = {k: Fraction(round(v / total * 10**6), 10**6) for k, v in occ.items()}
    big = max(occ, key=lambda k: (occ[k], k))
    occ[big] += 1 - sum(occ.values())
    return occ


def render(name, population, waypoints, arcs, goals, charging, slots, header):
    out = [header, f'name = "{name}"', f"population = {population}", "", "arcs = ["]
    out += [f'    ["{a}", "{b}"],' for a, b in arcs]
    out += ["]", "", "[stations]"]
    out.append("goals = [" + ", ".join(f'"{g}"' for g in goals) + "]")
    out += [f'charging = "{charging}"', ""]
    for wid, x, y, r, label in waypoints:
        out += ["[[waypoints]]", f'id = "{wid}"', f"x = {float(x)}", f"y = {float(y)}",
                f"radius = {float(r)}", f'label = "{label}"', ""]
    for s in slots:
        occ = normalise(s["occupancy"])
        assert sum(occ.values()) == 1
        out += ["[[slots]]", f'id = "{s["id"]}"', f'start = "{s["start"]}"', f'end = "{s["end"]}"',
                f'task_count = {s["tasks"]}']
        if "workers" in s:
            out.append(f'workers = {s["workers"]}')
        out.append(f"task = {s['task']}")
        out.append("occupancy = { " + ", ".join(f"{k} = {fmt_prob(v)}" for k, v in sorted(occ.items())) + " }")
        out.append("")
    ids = [w[0] for w in waypoints]
    assert len(set(ids)) == len(ids)
    return "\n".join(out)


def pick_and_place(src, dst):
    return ('{ kind = "pick_and_place", from = [' + ", ".join(f'"{s}"' for s in src) + "], to = ["
            + ", ".join(f'"{d}"' for d in dst) + "] }")


COVERAGE = '{ kind = "coverage" }'


def hours(i):
    return f"{7 + i:02d}:00", f"{8 + i:02d}:00"


def desk20():
    wps = [
        ("BL", 0, 0, 1.0, "shelf"), ("BC", 4, 0, 1.0, "shelf"), ("BR", 8, 0, 1.0, "shelf"),
        ("TL", 0, 8, 1.0, "shelf"), ("TC", 4, 8, 1.0, "shelf"), ("TR", 8, 8, 1.0, "shelf"),
        ("A1", 0, 2.7, 1.0, "shelf"), ("A2", 0, 5.3, 1.0, "shelf"),
        ("B1", 4, 2.7, 1.0, "shelf"), ("B2", 4, 5.3, 1.0, "shelf"),
        ("C1", 8, 2.7, 1.0, "shelf"), ("C2", 8, 5.3, 1.0, "shelf"),
        ("K1", 0, 10.5, 1.2, "corridor"), ("K2", 8, 10.5, 1.2, "corridor"),
        ("OF1", -3, 10.5, 1.5, "office"), ("OF2", 11, 10.5, 1.5, "office"),
        ("CA", 4, 12.5, 2.0, "canteen"), ("WC1", -3, 13, 1.0, "toilet"),
        ("EN", 12, 0, 1.5, "entrance"), ("CH", -3, 0, 1.0, "charging"),
    ]
    arcs = [tuple(a.split("-")) for a in (
        "BL-A1 A1-A2 A2-TL BC-B1 B1-B2 B2-TC BR-C1 C1-C2 C2-TR TL-TC TC-TR BL-BC BC-BR "
        "TL-K1 TR-K2 K1-OF1 K2-OF2 K1-CA K2-CA OF1-WC1 BL-CH BR-EN").split()]
    # pickers crowd one aisle; everybody else is in the offices, the canteen or the corridor
    background = {"OF1": 0.08, "OF2": 0.08, "CA": 0.06, "K1": 0.02, "K2": 0.02, "WC1": 0.02, "EN": 0.02}

    def working(aisle):
        occ = dict(background)
        occ[f"{aisle}1"] = 0.35
        occ[f"{aisle}2"] = 0.35
        return occ

    delivery = pick_and_place(["BL", "BC", "BR"], ["TL", "TC", "TR"])
    pattern = {1: "A", 2: "B", 3: "C", 4: "A", 6: "B", 7: "C", 8: "A", 9: "B"}
    slots = []
    for i in range(11):
        start, end = hours(i)
        s = {"id": f"S{i + 1}", "start": start, "end": end, "tasks": 50, "task": delivery}
        if i == 0:
            s["occupancy"] = {"EN": 0.3, "OF1": 0.2, "OF2": 0.2, "K1": 0.1, "K2": 0.1, "CA": 0.1}
        elif i == 5:
            s["occupancy"] = {"CA": 0.5, "K1": 0.1, "K2": 0.1, "OF1": 0.1, "OF2": 0.1, "WC1": 0.1}
        elif i == 10:
            s.update(occupancy={"CH": 1.0}, task=COVERAGE, tasks=40, workers=0)
        else:
            s["occupancy"] = working(pattern[i])
        slots.append(s)
    header = ("# Desk-scale warehouse: three shelf aisles (A, B, C) between a bottom and a top row of\n"
              "# goal stations, a corridor to the offices and the canteen, an entrance and a charging dock.\n")
    return render("desk20", 20, wps, arcs, ["BL", "BC", "BR", "TL", "TC", "TR"], "CH", slots, header)


def warehouse73():
    cols = 8
    xs = [4 * i for i in range(cols)]
    wps, arcs = [], []
    # loading docks, bottom row, three aisle points, top row, corridor, offices
    rows = [("D", -3, 1.0, "entrance"), ("B", 0, 1.0, "shelf"), ("P", 2.5, 1.0, "shelf"),
            ("Q", 5.0, 1.0, "shelf"), ("R", 7.5, 1.0, "shelf"), ("T", 10, 1.0, "shelf"),
            ("K", 13, 1.2, "corridor"), ("O", 16, 1.5, "office")]
    for prefix, y, r, label in rows:
        for i, x in enumerate(xs):
            wps.append((f"{prefix}{i + 1}", x, y, r, label))
    for i in range(cols):
        chain = [f"{p}{i + 1}" for p, *_ in rows]
        arcs += list(zip(chain, chain[1:]))
    for prefix in ("B", "Q", "T", "K"):
        arcs += [(f"{prefix}{i + 1}", f"{prefix}{i + 2}") for i in range(cols - 1)]
    for i in range(4):
        wps.append((f"CA{i + 1}", 4 + 8 * i, 19.5, 2.0, "canteen"))
        arcs += [(f"O{2 * i + 1}", f"CA{i + 1}"), (f"O{2 * i + 2}", f"CA{i + 1}")]
    arcs += [("CA1", "CA2"), ("CA2", "CA3"), ("CA3", "CA4")]
    wps += [("WC1", -4, 16, 1.0, "toilet"), ("WC2", 32, 16, 1.0, "toilet"),
            ("EN1", -4, -3, 1.5, "entrance"), ("EN2", 32, -3, 1.5, "entrance"),
            ("CH", -4, 0, 1.0, "charging")]
    arcs += [("WC1", "O1"), ("WC2", "O8"), ("EN1", "D1"), ("EN2", "D8"), ("CH", "B1")]
    assert len(wps) == 73, len(wps)

    social = [w[0] for w in wps if w[4] in ("office", "canteen", "corridor", "toilet")]
    background = {w: 0.4 / len(social) for w in social}

    def working(c):
        # one busy aisle, the rest of the crowd off the shop floor; goal stations stay clear
        occ = dict(background)
        for p in "PQR":
            occ[f"{p}{c}"] = 0.2
        return occ

    def zone(c):
        # the busy aisle and its two neighbours, so every leg fits the deadline
        span = range(c - 1, c + 2)
        return pick_and_place([f"B{k}" for k in span], [f"T{k}" for k in span])

    hot = {1: 2, 2: 4, 3: 6, 4: 3, 6: 7, 7: 5, 8: 2, 9: 6}
    slots = []
    for i in range(11):
        start, end = hours(i)
        s = {"id": f"S{i + 1}", "start": start, "end": end, "tasks": 200, "task": zone(hot.get(i, 5))}
        if i == 0:
            s["occupancy"] = {"EN1": 0.25, "EN2": 0.25, **{f"O{k + 1}": 0.5 / 8 for k in range(cols)}}
        elif i == 5:
            s["occupancy"] = {**{f"CA{k + 1}": 0.15 for k in range(4)},
                              **{f"K{k + 1}": 0.3 / 8 for k in range(cols)}, "WC1": 0.05, "WC2": 0.05}
        elif i == 10:
            s.update(occupancy={"CH": 1.0}, task=COVERAGE, workers=0)
        else:
            s["occupancy"] = working(hot[i])
        slots.append(s)
    header = ("# Full-scale warehouse: eight shelf aisles between loading docks and a top row, a\n"
              "# corridor, offices, a four-area canteen, toilets, two entrances and a charging dock.\n")
    goals = [f"B{i + 1}" for i in range(cols)] + [f"T{i + 1}" for i in range(cols)]
    return render("warehouse73", 50, wps, arcs, goals, "CH", slots, header)


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "desk20.toml").write_text(desk20())
    (OUT / "warehouse73.toml").write_text(warehouse73())
