"""Sequential deliberation: pairwise bargaining as a social choice mechanism."""

import sys


def main() -> None:
    from seqdelib.cli import parse_and_dispatch

    sys.exit(parse_and_dispatch(sys.argv[1:]))
