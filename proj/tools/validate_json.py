#!/usr/bin/env python3
"""Validate mwer JSON artifacts against the schemas in schemas/.

usage: validate_json.py [--schemas DIR] [--expect-invalid] SCHEMA=FILE...

SCHEMA is a schema name such as `aggregate` or `report_line`. Files ending
in .jsonl are checked line by line.
"""

import argparse
import json
import pathlib
import sys

import jsonschema
import referencing

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_registry(schema_dir):
    resources = []
    schemas = {}
    for path in sorted(schema_dir.glob("*.schema.json")):
        doc = json.loads(path.read_text())
        resources.append((doc["$id"], referencing.Resource.from_contents(doc)))
        schemas[path.name[: -len(".schema.json")]] = doc
    return schemas, referencing.Registry().with_resources(resources)


def documents(path):
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".jsonl":
        for n, line in enumerate(text.splitlines(), 1):
            if line.strip():
                yield f"{path}:{n}", json.loads(line)
    else:
        yield str(path), json.loads(text)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--schemas", type=pathlib.Path, default=ROOT / "schemas")
    ap.add_argument("--expect-invalid", action="store_true")
    ap.add_argument("pairs", nargs="+", metavar="SCHEMA=FILE")
    args = ap.parse_args()

    schemas, registry = load_registry(args.schemas)
    bad = 0
    for pair in args.pairs:
        name, _, file = pair.partition("=")
        if name not in schemas:
            print(f"unknown schema {name}", file=sys.stderr)
            return 2
        validator = jsonschema.Draft202012Validator(schemas[name], registry=registry)
        for where, doc in documents(pathlib.Path(file)):
            errors = list(validator.iter_errors(doc))
            if errors and not args.expect_invalid:
                bad += 1
                for e in errors[:3]:
                    print(f"{where}: {'/'.join(map(str, e.absolute_path))}: {e.message}", file=sys.stderr)
            if not errors and args.expect_invalid:
                bad += 1
                print(f"{where}: unexpectedly valid against {name}", file=sys.stderr)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
