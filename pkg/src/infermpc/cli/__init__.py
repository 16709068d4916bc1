"""Command-line front end, experiment configuration and figure recipes."""
