"""Test suite for isec."""
