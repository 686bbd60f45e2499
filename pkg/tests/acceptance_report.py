"""Registry for acceptance one-liners; conftest prints them in the summary."""

LINES = []


def record(number, name, ok, detail):
    """Register one criterion outcome; returns ok so callers can assert on it."""
    LINES.append((number, name, bool(ok), detail))
    return bool(ok)
