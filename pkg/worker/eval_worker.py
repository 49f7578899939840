#!/usr/bin/env python3
"""Reference external evaluator speaking the JSON-lines protocol on
stdin/stdout.

Modes:
  replay      answer eval requests from a results table file:
              {"default": x|null, "entries": [{"channels": [...], "performance": y}]}
  cardinality answer |subset| / n, with n taken from the init handshake

Protocol (one JSON object per line, UTF-8):
  <- {"type":"init","channels":[all names],"task":label}   -> {"type":"ready"}
  <- {"type":"eval","channels":[subset names]}             -> {"type":"result","performance":x}
  <- {"type":"shutdown"}                                    (exit 0)
Malformed or unknown requests get {"type":"error","detail":...} and the loop
continues. Standard library only.
"""
import argparse
import json
import sys

SEP = "\x1f"


def load_table(path):
    with open(path) as fh:
        doc = json.load(fh)
    table = {}
    for item in doc.get("entries", []):
        key = SEP.join(sorted(item["channels"]))
        table[key] = float(item["performance"])
    return table, doc.get("default")


def main(argv=None):
    parser = argparse.ArgumentParser(description="reference external evaluator")
    parser.add_argument("--mode", choices=["replay", "cardinality"], required=True)
    parser.add_argument("--table", help="results table JSON (replay mode)")
    args = parser.parse_args(argv)

    table, default = {}, None
    if args.mode == "replay":
        if not args.table:
            parser.error("--table is required in replay mode")
        table, default = load_table(args.table)

    out = sys.stdout.buffer
    n_channels = None
    result_lines = {}  # performance value -> serialized reply, avoids re-dumping

    def reply(obj):
        out.write(json.dumps(obj, separators=(",", ":")).encode() + b"\n")
        out.flush()

    def error(detail):
        reply({"type": "error", "detail": detail})

    def result(value):
        line = result_lines.get(value)
        if line is None:
            line = (
                json.dumps(
                    {"type": "result", "performance": value}, separators=(",", ":")
                ).encode()
                + b"\n"
            )
            result_lines[value] = line
        out.write(line)
        out.flush()

    for line in sys.stdin.buffer:
        if not line.strip():
            continue
        try:
            req = json.loads(line)
        except ValueError:
            error("request is not valid JSON")
            continue
        if not isinstance(req, dict):
            error("request must be a JSON object")
            continue
        kind = req.get("type")
        if kind == "init":
            channels = req.get("channels")
            if not isinstance(channels, list) or not channels:
                error("init needs a non-empty channels list")
                continue
            n_channels = len(channels)
            reply({"type": "ready"})
        elif kind == "eval":
            channels = req.get("channels")
            if not isinstance(channels, list):
                error("eval needs a channels list")
                continue
            if args.mode == "cardinality":
                if n_channels is None:
                    error("eval before init")
                    continue
                result(len(channels) / n_channels)
            else:
                value = table.get(SEP.join(sorted(channels)), default)
                if value is None:
                    error("no table entry for subset and no default")
                    continue
                result(value)
        elif kind == "shutdown":
            return 0
        else:
            error(f"unknown request type: {kind!r}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
