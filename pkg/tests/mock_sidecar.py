"""Scriptable stand-in for an external re-ranking sidecar.

Usage: python mock_sidecar.py MODE

Modes:
  identity   score candidates in request order (highest first), preserving
             the stage-one ordering
  reverse    score candidates in reverse request order
  omit-first respond without the first candidate's docid
  garbage    emit a non-JSON line
  wrong-qid  respond with a different qid
  error      emit a protocol error object per request
  silent     read requests but never respond
  die        exit immediately
"""

import json
import sys


def main() -> int:
    mode = sys.argv[1] if len(sys.argv) > 1 else "identity"
    if mode == "die":
        return 3
    for line in sys.stdin:
        if not line.strip():
            continue
        request = json.loads(line)
        qid = request["qid"]
        docids = [c["docid"] for c in request["candidates"]]
        if mode == "silent":
            continue
        if mode == "garbage":
            sys.stdout.write("this is not json\n")
        elif mode == "wrong-qid":
            sys.stdout.write(json.dumps({"qid": qid + "-not", "scores": []}) + "\n")
        elif mode == "error":
            sys.stdout.write(json.dumps({"qid": qid, "error": "boom"}) + "\n")
        else:
            if mode == "omit-first":
                docids = docids[1:]
            n = len(docids)
            if mode == "reverse":
                scores = [{"docid": d, "score": float(i)} for i, d in enumerate(docids)]
            else:
                scores = [{"docid": d, "score": float(n - i)} for i, d in enumerate(docids)]
            sys.stdout.write(json.dumps({"qid": qid, "scores": scores}) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
