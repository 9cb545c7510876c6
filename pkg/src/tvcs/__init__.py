"""Total-variation compressive sensing recovery with nonlocal multiplier filtering."""
