from confqkd.cli import main

raise SystemExit(main())
