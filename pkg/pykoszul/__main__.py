import sys

from pykoszul.cli import main

sys.exit(main())
