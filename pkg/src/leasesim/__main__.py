from leasesim.cli import main

raise SystemExit(main())
