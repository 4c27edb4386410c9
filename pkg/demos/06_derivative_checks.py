"""Finite-difference audit of every field in the two-agent scenario.

Equivalent to: pcipm validate --scenario two-agent
"""
from pcipm.cli import main

raise SystemExit(main(["validate", "--scenario", "two-agent", "--points", "50"]))
