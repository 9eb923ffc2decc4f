import sys

from gridsynth.cli import main

sys.exit(main())
