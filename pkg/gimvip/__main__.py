"""Console entry point: ``gimvip`` or ``python -m gimvip``."""

import sys
from typing import List, Optional

from .app import GimvipApp


def main(argv: Optional[List[str]] = None) -> int:
    return GimvipApp().run(argv)


if __name__ == "__main__":
    sys.exit(main())
