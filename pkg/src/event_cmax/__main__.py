"""Entry-point for `python -m event_cmax`."""

from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
