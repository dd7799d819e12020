"""Validate scenario files against the shipped JSON Schema.

usage: check_scenario_schema.py SCHEMA SCENARIO_DIR
"""

import json
import pathlib
import sys

import jsonschema


def main(schema_path, scenario_dir):
    schema = json.loads(pathlib.Path(schema_path).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    files = sorted(pathlib.Path(scenario_dir).glob("*.json"))
    if not files:
        print(f"no scenarios in {scenario_dir}")
        return 1
    failed = 0
    for path in files:
        errors = list(validator.iter_errors(json.loads(path.read_text())))
        for e in errors:
            print(f"{path.name}: {e.json_path}: {e.message}")
        failed += bool(errors)
    # Unknown fields must be rejected by the schema as well as the tool.
    bad = {"schema_version": 1, "kind": "bb84", "parameters": {"slots": 3, "colour": "red"}}
    if validator.is_valid(bad):
        print("schema accepted an unknown parameter")
        failed += 1
    print(f"{len(files) - failed}/{len(files)} scenarios valid")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:]))
