import sys

from mermin_lab.cli import main

sys.exit(main())
