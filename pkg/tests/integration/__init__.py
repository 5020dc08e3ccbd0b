"""Integration tests for vertical-relpose."""
