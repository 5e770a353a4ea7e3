from mlnet.cli import main

main()
