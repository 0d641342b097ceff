from .exporter import export_payloads, write_manifest
from .tables import build_table, render_csv

__all__ = ["export_payloads", "write_manifest", "build_table", "render_csv"]
