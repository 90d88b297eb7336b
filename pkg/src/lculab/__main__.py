from lculab.cli import main

main()
