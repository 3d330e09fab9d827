"""Tests for style-transformer package."""
