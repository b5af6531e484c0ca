#!/usr/bin/env python3
"""Runs each CLI command once and validates every output against schemas/."""

import csv
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

CSV_HEADERS = {
    "pi_map.csv": ["feature", "pi", "r", "r_adv", "normalized"],
    "sri_map.csv": ["feature", "sri", "clean", "attacked", "normalized"],
    "training.csv": ["episode", "reward", "sliding100", "epsilon"],
}
JSON_SCHEMAS = {
    "run.json": "run",
    "timings.json": "timings",
    "check.json": "check",
    "pi_map.json": "pi_map",
    "sri_map.json": "sri_map",
    "attack.json": "attack",
    "robustness.json": "robustness",
    "model.json": "model",
    "policy.json": "policy",
}


def main(cli, root):
    schemas = {
        name: json.loads((root / "schemas" / f"{name}.schema.json").read_text())
        for name in set(JSON_SCHEMAS.values())
    }
    data = root / "data"
    failures = []
    checked = 0
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        policy = tmp / "train" / "policy.json"
        mini = ["--env", "freeway", "--preset", "mini", "--policy", str(tmp / "fw" / "policy.json")]
        reduced = ["--env", "taxi", "--preset", "reduced", "--policy", str(policy)]
        commands = {
            "train": ["train", "--env", "taxi", "--preset", "reduced", "--episodes", "20", "--hidden-layers", "1",
                      "--neurons", "8"],
            "fw": ["train", "--env", "freeway", "--preset", "mini", "--episodes", "5", "--hidden-layers", "1",
                   "--neurons", "8"],
            "check": ["check", "--model", str(data / "fig2.json"), "--policy", str(data / "fig2_policy.json"),
                      "--prop", "P=? [ F x=2 ]"],
            "statistical": ["check", *reduced, "--prop", "station_empty", "--samples", "200"],
            "pimap": ["pi-map", *reduced, "--prop", "deadlock1"],
            "srimap": ["sri-map", *mini, "--n", "5"],
            "attack": ["attack", *mini, "--prop", "crossed", "--baseline", "fgsm"],
            "robustness": ["robustness", "--model", str(data / "fig2.json"), "--policy",
                           str(data / "fig2_policy.json"), "--feature", "x", "--epsilon", "1", "--prop",
                           "Pmax=? [ F x=2 ]"],
            "box": ["robustness", *reduced, "--box", "--epsilon", "1", "--prop", "deadlock2"],
            "export": ["export-model", "--env", "fig2"],
            "export_dtmc": ["export-model", "--model", str(data / "fig2.json"), "--policy",
                            str(data / "fig2_policy.json")],
        }
        for name, args in commands.items():
            out = tmp / name
            proc = subprocess.run([cli, *args, "--out", str(out)], capture_output=True, text=True)
            if proc.returncode != 0:
                failures.append(f"{name}: exit {proc.returncode}: {proc.stderr.strip()}")
                continue
            for path in sorted(out.iterdir()):
                if path.name in JSON_SCHEMAS:
                    try:
                        jsonschema.validate(json.loads(path.read_text()), schemas[JSON_SCHEMAS[path.name]])
                    except jsonschema.ValidationError as e:
                        failures.append(f"{name}/{path.name}: {e.message}")
                elif path.name in CSV_HEADERS:
                    with path.open(newline="") as f:
                        header = next(csv.reader(f))
                    if header != CSV_HEADERS[path.name]:
                        failures.append(f"{name}/{path.name}: header {header}")
                elif path.suffix == ".csv":
                    pass  # attack maps and grids have data-dependent columns
                else:
                    failures.append(f"{name}: unexpected output {path.name}")
                    continue
                checked += 1
        for path in (data / "fig2.json", data / "fig2_policy.json"):
            schema = schemas["model" if path.name == "fig2.json" else "policy"]
            try:
                jsonschema.validate(json.loads(path.read_text()), schema)
            except jsonschema.ValidationError as e:
                failures.append(f"{path.name}: {e.message}")
            checked += 1
    for f in failures:
        print("FAIL", f)
    print(f"{checked} files checked, {len(failures)} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1], pathlib.Path(sys.argv[2])))
