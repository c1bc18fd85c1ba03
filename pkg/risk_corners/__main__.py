from risk_corners.cli import main

raise SystemExit(main())
