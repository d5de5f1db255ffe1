#!/usr/bin/env python3
"""Test fixture: answers every request with a fixed label.

Flags:
    --label LABEL     response label (default UNRELATED)
    --probs           attach a consistent probability vector
    --shuffle         buffer all requests, answer in reverse id order
    --garble          emit one non-JSON line before each response
    --bad-probs       probs that do not sum to 1
    --wrong-argmax    probs whose argmax is not the label
    --wrong-id        respond with id + 1000
    --error           respond {"id": ..., "error": ...} to everything
    --crash-after N   exit abruptly after N responses
    --sleep S         sleep S seconds before each response
    --no-handshake    never print the handshake line
"""

import argparse
import json
import sys
import time

LABELS = ["A_IN_B", "B_IN_A", "A_ON_B", "B_ON_A", "UNRELATED"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--label", default="UNRELATED")
    ap.add_argument("--probs", action="store_true")
    ap.add_argument("--shuffle", action="store_true")
    ap.add_argument("--garble", action="store_true")
    ap.add_argument("--bad-probs", action="store_true")
    ap.add_argument("--wrong-argmax", action="store_true")
    ap.add_argument("--wrong-id", action="store_true")
    ap.add_argument("--error", action="store_true")
    ap.add_argument("--crash-after", type=int, default=-1)
    ap.add_argument("--sleep", type=float, default=0.0)
    ap.add_argument("--no-handshake", action="store_true")
    args = ap.parse_args()

    if not args.no_handshake:
        print(json.dumps({"ready": True, "protocol": 1}), flush=True)

    answered = 0
    pending = []
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        req = json.loads(line)
        pending.append(req)
        if args.shuffle:
            continue
        answered = flush(pending, args, answered)
        pending = []
    if pending:
        flush(sorted(pending, key=lambda r: -r["id"]), args, answered)


def flush(requests, args, answered):
    for req in requests:
        if args.crash_after >= 0 and answered >= args.crash_after:
            sys.exit(9)
        if args.sleep:
            time.sleep(args.sleep)
        if args.garble:
            print("!!! not json !!!", flush=True)
        rid = req["id"] + 1000 if args.wrong_id else req["id"]
        if args.error:
            print(json.dumps({"id": rid, "error": "synthetic failure"}), flush=True)
            answered += 1
            continue
        doc = {"id": rid, "label": args.label}
        if args.probs or args.bad_probs or args.wrong_argmax:
            probs = {name: 0.025 for name in LABELS}
            probs[args.label] = 0.9
            if args.bad_probs:
                probs[args.label] = 0.5
            if args.wrong_argmax:
                other = next(n for n in LABELS if n != args.label)
                probs[args.label], probs[other] = 0.1, 0.825
            doc["probs"] = probs
        print(json.dumps(doc), flush=True)
        answered += 1
    return answered


if __name__ == "__main__":
    main()
