"""Unit tests for vertical-relpose."""
