"""Tests for pyontoevolution."""
