import sys

from rainbowfq.cli import main

if __name__ == "__main__":
    sys.exit(main())
