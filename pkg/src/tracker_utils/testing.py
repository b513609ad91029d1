"""
Assertion helpers for tracker outputs, curves and bench tables.

Usage in tests:
    from tracker_utils.testing import assert_monotone, assert_boxes_valid, validate_output

    def test_curves(result):
        assert_monotone(result.precision_curve, increasing=True)
        assert_monotone(result.success_curve, increasing=False)

    def test_summary(table):
        validate_output(table, {
            "columns": {"sequence": "string", "auc": "double", "fps": "double"},
            "not_null": ["sequence", "auc"],
            "unique": ["sequence", "config"],
            "min_rows": 3,
        })
"""

import math

import numpy as np
import pyarrow as pa


# =============================================================================
# Sequence Validators
# =============================================================================

def assert_monotone(values, increasing: bool = True, strict: bool = False, name: str = "values") -> None:
    """Assert a 1D sequence is non-decreasing (or non-increasing; strictly if asked)."""
    v = np.asarray(values, dtype=np.float64)
    diffs = np.diff(v) if increasing else -np.diff(v)
    bad = np.nonzero(diffs <= 0 if strict else diffs < 0)[0]
    direction = ("strictly " if strict else "") + ("increasing" if increasing else "decreasing")
    assert bad.size == 0, f"{name} not {direction} at index {int(bad[0]) + 1}: {v[bad[0]]} -> {v[bad[0] + 1]}"


def assert_in_range(values, min_val: float = None, max_val: float = None, name: str = "values") -> None:
    """Assert all non-NaN values lie within [min_val, max_val]."""
    v = np.asarray(values, dtype=np.float64).ravel()
    v = v[~np.isnan(v)]
    invalid = []
    for x in v:
        if min_val is not None and x < min_val:
            invalid.append(float(x))
        elif max_val is not None and x > max_val:
            invalid.append(float(x))
    assert not invalid, f"{name} has values outside range [{min_val}, {max_val}]: {invalid[:5]}..."


# =============================================================================
# Box Validators
# =============================================================================

def assert_boxes_valid(rects, frame_size: tuple[int, int] | None = None, min_side: float = 0.0) -> None:
    """Assert (x, y, w, h) rectangles are finite with positive size; centers inside the frame if given."""
    for i, rect in enumerate(rects):
        x, y, w, h = rect
        assert all(math.isfinite(c) for c in rect), f"box {i} has non-finite coordinates: {rect}"
        assert w > min_side and h > min_side, f"box {i} has size {w}x{h} (min {min_side})"
        if frame_size is not None:
            cx, cy = x + w / 2.0, y + h / 2.0
            width, height = frame_size
            assert 0 <= cx <= width and 0 <= cy <= height, f"box {i} center ({cx}, {cy}) outside {width}x{height}"


# =============================================================================
# Schema Validator
# =============================================================================

def validate_output(table: pa.Table, schema: dict) -> None:
    """Validate table against schema. Raises AssertionError on failure.

    Args:
        table: PyArrow table to validate
        schema: Validation schema with optional keys:
            - columns: dict of {column_name: expected_type_substring}
            - not_null: list of column names that must not have nulls
            - unique: list of column names that form a unique key (composite if multiple)
            - min_rows: minimum expected row count
            - max_rows: maximum expected row count
            - ranges: dict of {column_name: (min, max)}
    """
    if min_rows := schema.get("min_rows"):
        assert len(table) >= min_rows, f"Expected >= {min_rows} rows, got {len(table)}"

    if max_rows := schema.get("max_rows"):
        assert len(table) <= max_rows, f"Expected <= {max_rows} rows, got {len(table)}"

    if columns := schema.get("columns"):
        table_columns = set(table.column_names)
        for col, expected_type in columns.items():
            assert col in table_columns, f"Missing column: {col}"
            actual_type = str(table.schema.field(col).type)
            assert expected_type in actual_type, (
                f"Column '{col}': expected type containing '{expected_type}', got '{actual_type}'"
            )

    if not_null := schema.get("not_null"):
        for col in not_null:
            null_count = table.column(col).null_count
            assert null_count == 0, f"Column '{col}' has {null_count} null values"

    if unique := schema.get("unique"):
        if isinstance(unique, str):
            unique = [unique]
        rows = list(zip(*(table.column(col).to_pylist() for col in unique)))
        duplicates = len(rows) - len(set(rows))
        assert duplicates == 0, f"Columns {unique} have {duplicates} duplicate combinations"

    for col, (lo, hi) in schema.get("ranges", {}).items():
        values = [v for v in table.column(col).to_pylist() if v is not None]
        assert_in_range(values, lo, hi, name=f"Column '{col}'")
