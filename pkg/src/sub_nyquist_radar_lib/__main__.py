import sys

from sub_nyquist_radar_lib.harness.cli import main

sys.exit(main())
