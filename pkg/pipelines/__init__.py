"""One pipeline per command-line subcommand plus the run configuration loader."""
