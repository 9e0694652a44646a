import sys

from rescont.cli import main

sys.exit(main())
