from quiverrep.cli import main

main()
