"""Stub generator that never answers in time."""
import sys
import time


for line in sys.stdin:
    time.sleep(30)
    sys.stdout.write("OK text=too%20late\n")
    sys.stdout.flush()
