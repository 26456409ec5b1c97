"""Pure-Python implementations of the group kernels (import-time fallback)."""
