"""Test doubles for the agent protocol."""
