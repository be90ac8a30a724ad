"""
Result writers.

CSV: a versioned header comment naming the columns, one "# key=value" comment per
summary entry, then the table with 17 significant digits. JSON: sorted keys and
shortest round-trip floats. Both are written atomically and byte-identically for
identical inputs.
"""

from pathlib import Path
from typing import Any, Dict, Union
import json
import math

import numpy as np
import pandas as pd

from ..core.exceptions import InvalidConfigurationError
from ..core.files import atomic_write_text

FORMAT_VERSION = 1


def _native(value: Any) -> Any:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, Path):
        return str(value)
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


def _summary_text(value: Any) -> str:
    value = _native(value)
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value).replace("\n", " ")


def format_csv(df: pd.DataFrame, summary: Dict[str, Any], table_name: str) -> str:
    lines = [f"# {table_name}/v{FORMAT_VERSION}: {','.join(map(str, df.columns))}"]
    for key in sorted(summary):
        if summary[key] is None:
            continue
        lines.append(f"# {key}={_summary_text(summary[key])}")
    body = df.to_csv(index=False, float_format="%.17g", lineterminator="\n")
    return "\n".join(lines) + "\n" + body


def _json_float(value: Any) -> Any:
    # JSON has no inf/nan literals
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def format_json(df: pd.DataFrame, summary: Dict[str, Any], table_name: str) -> str:
    rows = [
        {str(key): _json_float(_native(value)) for key, value in record.items()}
        for record in df.to_dict(orient="records")
    ]
    document = {
        "table": table_name,
        "version": FORMAT_VERSION,
        "columns": [str(column) for column in df.columns],
        "summary": {
            key: _json_float(_native(value)) for key, value in summary.items() if value is not None
        },
        "rows": rows,
    }
    return json.dumps(document, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_table(
    df: pd.DataFrame,
    summary: Dict[str, Any],
    path: Union[str, Path],
    fmt: str,
    table_name: str,
) -> Path:
    """Serialize a result table and its summary to path in csv or json"""
    if fmt == "csv":
        text = format_csv(df, summary, table_name)
    elif fmt == "json":
        text = format_json(df, summary, table_name)
    else:
        raise InvalidConfigurationError(f"unknown output format {fmt!r}, expected csv or json")
    return atomic_write_text(path, text)
