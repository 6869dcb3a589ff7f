"""
ssicert test suite

Run with: pytest tests/ -v          (add -m "not slow" to skip the long runs)
"""
