import sys

from wehrl.cli import main

sys.exit(main())
