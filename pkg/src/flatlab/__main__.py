import sys

from flatlab.cli import main

sys.exit(main())
