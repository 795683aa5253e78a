"""Recipe-driven experiments: config, deterministic runner, CLI."""
