import sys

from qflow.main import main

sys.exit(main())
