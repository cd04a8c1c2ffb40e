"""kemenytool - Kemeny-constant edge centralities for weighted graphs.

Entry point. Run with:
    python main.py <subcommand> --input graph.txt [options]
"""
import sys
import os

# Ensure the project root is on sys.path so that absolute imports work
# when running as `python main.py` from any working directory.
_ROOT = os.path.dirname(os.path.abspath(__file__))
if _ROOT not in sys.path:
    sys.path.insert(0, _ROOT)

from cli.app import main as cli_main


def main(argv=None) -> int:
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
