import sys

from pstab.main import main

sys.exit(main())
