import sys

from projshape.cli import main

sys.exit(main())
