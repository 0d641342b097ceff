from __future__ import annotations

from varwidthci.cli import main


def run_app() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run_app()
