"""Configuration package: environment loading, config files and logging setup."""
