"""End-to-end verifiable voting."""
