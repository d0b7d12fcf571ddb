"""Tests for the econodyn package."""
