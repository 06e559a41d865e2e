"""Bundled experiment presets (YAML), loadable by name from the CLI."""
