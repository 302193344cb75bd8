"""Unit tests for the bid optimizer."""
