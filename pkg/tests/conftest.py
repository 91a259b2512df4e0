"""Shared test configuration.

Property-based tests use hypothesis; numpy-heavy examples can exceed the
default 200ms deadline on slow CI boxes, so the deadline is disabled here
and determinism is kept via derandomize.
"""

from hypothesis import settings

settings.register_profile("mirropt", deadline=None, derandomize=True)
settings.load_profile("mirropt")
