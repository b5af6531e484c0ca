#!/usr/bin/env python3
"""Breadth-first enumeration of the taxi MDP, compared with `pia export-model`."""

import json
import pathlib
import subprocess
import sys
import tempfile
from collections import deque
from fractions import Fraction

ACTIONS = ["north", "east", "south", "west", "pick_up", "drop"]
MOVES = [(0, 1), (1, 0), (0, -1), (-1, 0)]


def successors(s, cfg):
    """Exact successor distribution of state s under each action."""
    w, h = cfg["grid_w"], cfg["grid_h"]
    locs = [tuple(c) for c in cfg["pickup_locations"]]
    station = tuple(cfg["gas_station"])
    x, y, xl, yl, xd, yd, fuel, passenger, jobs, done = s
    out = []
    for a in range(len(ACTIONS)):
        if done:
            out.append({s: Fraction(1)})
            continue
        nx, ny, nfuel = x, y, fuel
        if a < 4:
            nx = min(max(x + MOVES[a][0], 0), w - 1)
            ny = min(max(y + MOVES[a][1], 0), h - 1)
            nfuel = fuel - 1
        if (x, y) == station:
            nfuel = cfg["max_fuel"]
        npass, njobs, dropped = passenger, jobs, False
        if a == 4 and not passenger and (x, y) == (xl, yl):
            npass = 1
        if a == 5 and passenger and (x, y) == (xd, yd):
            npass, njobs, dropped = 0, jobs + 1, True
        ndone = int(nfuel == 0 or njobs == cfg["max_jobs"])
        if not dropped or ndone:
            out.append({(nx, ny, xl, yl, xd, yd, nfuel, npass, njobs, ndone): Fraction(1)})
            continue
        dist = {}
        p = Fraction(1, len(locs) * (len(locs) - 1))
        for src in locs:
            for dst in locs:
                if src != dst:
                    t = (nx, ny, *src, *dst, nfuel, npass, njobs, ndone)
                    dist[t] = dist.get(t, 0) + p
        out.append(dist)
    return out


def explore(cfg):
    start = (cfg["grid_w"] // 2, cfg["grid_h"] // 2, *cfg["pickup_locations"][0], *cfg["pickup_locations"][1],
             cfg["max_fuel"], 0, 0, 0)
    seen = {start: None}
    queue = deque([start])
    transitions = 0
    while queue:
        s = queue.popleft()
        rows = successors(s, cfg)
        assert all(sum(r.values()) == 1 for r in rows)
        for r in rows:
            transitions += len(r)
            for t in r:
                if t not in seen:
                    seen[t] = None
                    queue.append(t)
    return set(seen), transitions


def main(cli):
    presets = {
        "default": {"grid_w": 5, "grid_h": 5, "pickup_locations": [[0, 0], [0, 4], [4, 0], [4, 4]],
                    "gas_station": [1, 2], "max_fuel": 10, "max_jobs": 2},
        "reduced": {"grid_w": 3, "grid_h": 3, "pickup_locations": [[0, 0], [0, 2], [2, 0], [2, 2]],
                    "gas_station": [1, 2], "max_fuel": 5, "max_jobs": 1},
    }
    failed = False
    with tempfile.TemporaryDirectory() as tmp:
        for name, cfg in presets.items():
            out = pathlib.Path(tmp) / name
            subprocess.run([cli, "export-model", "--env", "taxi", "--env-config", json.dumps(cfg), "--out", str(out)],
                           check=True, capture_output=True)
            model = json.loads((out / "model.json").read_text())
            states, transitions = explore(cfg)
            got_states = {tuple(s) for s in model["states"]}
            got_transitions = sum(len(e) for row in model["transitions"].values() for e in row.values())
            ok = got_states == states and got_transitions == transitions
            failed |= not ok
            print(f"{'ok' if ok else 'MISMATCH'} {name}: oracle {len(states)} states / {transitions} transitions, "
                  f"pia {len(got_states)} / {got_transitions}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1]))
