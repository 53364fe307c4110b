import sys

from aoslice.cli import main

sys.exit(main())
