"""Tests for facetspace."""
