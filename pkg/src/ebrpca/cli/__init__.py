"""Command-line entry point (`ebrpca`) and adapter bootstrap."""
