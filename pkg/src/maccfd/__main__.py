import sys

from maccfd.cli import main

sys.exit(main())
