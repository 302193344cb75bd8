"""Command-line surface: subcommand dispatch and result emitters."""
