"""Allow ``python -m etf_fingerprinting`` to run the command-line tool."""
import sys

from etf_fingerprinting.cli import main

sys.exit(main())
