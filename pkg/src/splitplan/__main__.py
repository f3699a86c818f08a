import sys

from splitplan.cli import main

sys.exit(main())
