"""Test package for event-cmax."""
