"""Domain layer: value types, solvers, generators and metrics (no I/O)."""
