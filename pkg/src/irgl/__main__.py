import sys

from irgl.cli import main

sys.exit(main())
