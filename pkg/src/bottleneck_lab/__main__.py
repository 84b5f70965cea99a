"""Entry point for `python -m bottleneck_lab`."""

from .cli import main

if __name__ == "__main__":
    main()
