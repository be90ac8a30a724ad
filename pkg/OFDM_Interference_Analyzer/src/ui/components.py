from typing import Any, Dict, Optional
import math

import pandas as pd
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

console = Console(stderr=True)


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.6g}"
    return str(value)


def display_summary(summary: Dict[str, Any], title: str = "Run summary"):
    """
    Display the run summary as a two-column key/value table
    """
    table = Table(title=f"📋 {title}", show_header=False, title_justify="left")
    table.add_column("key", style="cyan", no_wrap=True)
    table.add_column("value", style="white")

    for key, value in summary.items():
        if value is None or value == "":
            continue
        table.add_row(key, _format_value(value))

    console.print(table)


def display_table_preview(df: pd.DataFrame, max_display: int = 12, title: Optional[str] = None):
    """
    Display the first rows of a result table
    """
    if df.empty:
        console.print("[yellow]⚠️ Result table is empty.[/yellow]")
        return

    table = Table(title=title, title_justify="left")
    for column in df.columns:
        table.add_column(str(column), justify="right" if pd.api.types.is_numeric_dtype(df[column]) else "left")

    for row in df.head(max_display).itertuples(index=False):
        table.add_row(*(_format_value(value) for value in row))

    console.print(table)
    if len(df) > max_display:
        console.print(f"[dim]Showing first {max_display} rows out of {len(df)}.[/dim]")


def display_rate(rate_bps: float, label: str = "Achievable rate"):
    """
    Display an aggregate rate in Mbit/s
    """
    console.print(Panel.fit(f"📈 {label}: [bold]{rate_bps / 1e6:.4f} Mbit/s[/bold]"))


def display_error_message(error_message: str):
    """
    Display error messages in a user-friendly format
    """
    console.print(f"[bold red]❌ {error_message}[/bold red]")


def display_success(message: str):
    console.print(f"[green]✅ {message}[/green]")
