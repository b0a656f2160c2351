#!/usr/bin/env python3
"""Run the full certified campaign, write the JSON report and the projection
point clouds next to this script's working directory.

Equivalent to:  revcover prove-paper --report proof_report.json --plot clouds
"""

import sys

from revcover.cli import main

if __name__ == "__main__":
    sys.exit(main(["prove-paper", "--report", "proof_report.json",
                   "--plot", "clouds", *sys.argv[1:]]))
