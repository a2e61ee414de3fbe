import sys

from njcones.cli import main

sys.exit(main())
