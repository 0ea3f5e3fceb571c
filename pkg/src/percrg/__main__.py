"""python -m percrg entry point."""

from percrg.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
