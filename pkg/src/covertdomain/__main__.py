from covertdomain.cli import main

main()
