import sys

from purcellkit.cli import main

sys.exit(main())
