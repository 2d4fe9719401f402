import sys

from wensemble.cli import main

sys.exit(main())
