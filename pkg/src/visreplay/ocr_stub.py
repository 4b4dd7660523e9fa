"""Stand-in OCR command for the subprocess text-provider interface.

Reads PNG bytes on stdin and prints the matching entry of a text fixture
file as a JSON array. Exits with status 2 when the image is unknown.

    python -m visreplay.ocr_stub FIXTURE.json < screen.png
"""

import json
import sys

from .imaging import decode_png, image_digest


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: python -m visreplay.ocr_stub FIXTURE.json", file=sys.stderr)
        return 64
    with open(argv[0], encoding="utf-8") as fh:
        fixture = json.load(fh)
    digest = image_digest(decode_png(sys.stdin.buffer.read()))
    if digest not in fixture:
        print(f"unknown image {digest[:12]}", file=sys.stderr)
        return 2
    json.dump(fixture[digest], sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
