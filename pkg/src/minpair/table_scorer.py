"""Reference external-scorer adapter backed by a score table.

Speaks the NDJSON wire protocol on stdin/stdout; useful as a mock in
tests and as a template for adapters around real NMT systems.

    python -m minpair.table_scorer scores.tsv [--reverse]

``--reverse`` buffers each batch (delimited by an empty line or EOF) and
answers in reverse order, to exercise order-independent clients.
"""

from __future__ import annotations

import argparse
import json
import sys


def _load_table(path: str) -> dict[tuple[str, str], list[float]]:
    table = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            pair_id, variant, values = line.split("\t")
            table[(pair_id, variant)] = [float(v) for v in values.split(",")]
    return table


def _respond(request: dict, table: dict, out) -> None:
    rid = request["id"]
    pair_id, variant = rid.rsplit("#", 1)
    values = table[(pair_id, variant)]
    out.write(json.dumps({"id": rid, "token_logprobs": values}) + "\n")
    out.flush()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("table")
    parser.add_argument("--reverse", action="store_true",
                        help="answer each batch in reverse order")
    parser.add_argument("--duplicate-first", action="store_true",
                        help="misbehave: answer the first request twice (for protocol tests)")
    args = parser.parse_args(argv)
    table = _load_table(args.table)

    buffered: list[dict] = []
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        request = json.loads(line)
        if args.duplicate_first:
            _respond(request, table, sys.stdout)
            _respond(request, table, sys.stdout)
            args.duplicate_first = False
            continue
        if args.reverse:
            buffered.append(request)
            if len(buffered) >= 2:
                for r in reversed(buffered):
                    _respond(r, table, sys.stdout)
                buffered.clear()
        else:
            _respond(request, table, sys.stdout)
    for r in reversed(buffered):
        _respond(r, table, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
