"""Packaged JSON: the config schema and the bundled experiment."""
