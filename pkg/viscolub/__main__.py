import sys

from viscolub.cli import main


sys.exit(main())
