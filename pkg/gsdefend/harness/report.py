"""ResultsTable rendering as CSV and Markdown.

Ratio columns are derived from the raw values at render time and never stored.
"""

from gsdefend.core.models import RATIO_COLUMNS, ResultsTable

RAW_COLUMNS = ("mode", "max_gaussian_count", "memory_proxy", "train_time_sec", "psnr", "ssim", "fps", "mean_anisotropy")


def format_ratio(ratio: float | None) -> str:
    """value / clean as '2.31×↑' (at least clean) or '1.84×↓' (below clean, shown as clean / value)."""
    if ratio is None:
        return "n/a"
    if ratio >= 1:
        return f"{ratio:.2f}×↑"
    return f"{1 / ratio:.2f}×↓"


def _cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def to_csv(table: ResultsTable) -> str:
    header = list(RAW_COLUMNS) + [f"{column}_ratio" for column in RATIO_COLUMNS]
    lines = [f"# seed={table.seed}", ",".join(header)]
    for row in table.rows:
        raw = row.model_dump(mode="json")
        ratios = [format_ratio(table.ratio(row.mode, column)) for column in RATIO_COLUMNS]
        lines.append(",".join([_cell(raw[column]) for column in RAW_COLUMNS] + ratios))
    return "\n".join(lines) + "\n"


def to_markdown(table: ResultsTable) -> str:
    header = [
        "Mode",
        "Max Gaussians",
        "vs clean",
        "Memory proxy (bytes)",
        "vs clean",
        "Train time (s)",
        "vs clean",
        "PSNR (dB)",
        "SSIM",
        "FPS",
        "vs clean",
        "Anisotropy",
    ]
    lines = [
        f"Results for seed {table.seed}",
        "",
        "| " + " | ".join(header) + " |",
        "|" + "---|" * len(header),
    ]
    for row in table.rows:
        cells = [
            row.mode.value,
            str(row.max_gaussian_count),
            format_ratio(table.ratio(row.mode, "max_gaussian_count")),
            str(row.memory_proxy),
            format_ratio(table.ratio(row.mode, "memory_proxy")),
            f"{row.train_time_sec:.1f}",
            format_ratio(table.ratio(row.mode, "train_time_sec")),
            f"{row.psnr:.2f}",
            f"{row.ssim:.4f}",
            f"{row.fps:.1f}",
            format_ratio(table.ratio(row.mode, "fps")),
            f"{row.mean_anisotropy:.4f}",
        ]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"
