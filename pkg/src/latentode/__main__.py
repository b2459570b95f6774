import sys

from latentode.cli import main

sys.exit(main())
