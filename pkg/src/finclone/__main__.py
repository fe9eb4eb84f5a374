import sys

from finclone.cli import main

sys.exit(main())
