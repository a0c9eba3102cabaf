import sys

from qmprime.cli import main

sys.exit(main())
