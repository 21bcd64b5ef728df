#!/usr/bin/env python3
"""Run the acceptance suite verbosely.

Two tests assert fixed target values that the exact computation
contradicts and are expected to fail (see the module docstring of
tests/test_acceptance.py): test_flat_chart_table_literal_n2 and
test_abelian_dim2_degree2_target_dimensions.  Everything else must pass.
"""

import sys
from pathlib import Path

import pytest

EXPECTED_FAILURES = {
    "test_flat_chart_table_literal_n2",
    "test_abelian_dim2_degree2_target_dimensions",
}


def main() -> int:
    target = Path(__file__).resolve().parent.parent / "tests" \
        / "test_acceptance.py"
    code = pytest.main(["-v", str(target)])
    print()
    print("expected failures (asserted targets the exact computation "
          "contradicts):")
    for name in sorted(EXPECTED_FAILURES):
        print(f"  {name}")
    return code


if __name__ == "__main__":
    sys.exit(main())
