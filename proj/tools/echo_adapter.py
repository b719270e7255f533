#!/usr/bin/env python3
"""Reference external adapter: echoes ground truth over the wire protocol.

Speaks newline-delimited JSON on stdin/stdout. For every predict request it
looks the case up in the suite.json next to the request's image and answers
with the stored keypoints and their tight bounding box, exactly like the
built-in oracle adapter.
"""

import json
import os
import sys


def load_suite_index(directory, cache={}):
    if directory not in cache:
        with open(os.path.join(directory, "suite.json"), "r", encoding="utf-8") as fh:
            cases = json.load(fh)
        cache[directory] = {case["id"]: case for case in cases}
    return cache[directory]


def reply(message):
    sys.stdout.write(json.dumps(message) + "\n")
    sys.stdout.flush()


def main():
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        request = json.loads(line)
        kind = request.get("type")
        if kind == "hello":
            if request.get("version") != 1:
                print("unsupported protocol version", file=sys.stderr)
                return 1
            reply({"type": "hello", "version": 1, "model": "oracle"})
        elif kind == "predict":
            image = request["image"]
            index = load_suite_index(os.path.dirname(image))
            case = index[request["id"]]
            keypoints = case["keypoints"]
            xs = [p[0] for p in keypoints]
            ys = [p[1] for p in keypoints]
            reply(
                {
                    "type": "result",
                    "id": request["id"],
                    "detected": True,
                    "bbox": [min(xs), min(ys), max(xs), max(ys)],
                    "keypoints": keypoints,
                }
            )
        else:
            print("unknown message type: %r" % kind, file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
