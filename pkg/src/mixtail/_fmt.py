"""Numeric output formatting shared by the table writers and the CLI."""

from __future__ import annotations

import math


def fg17(value: float) -> str:
    """17 significant digits, empty string for missing (NaN)."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return f"{value:.17g}"
