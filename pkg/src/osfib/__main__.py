import sys

from osfib.cli import main

sys.exit(main())
